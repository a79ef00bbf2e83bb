"""Batch verification interface.

Subcommands: verify, stratify, cocycle, cohomology, cech, sen, galois,
roundtrip, selftest.  Every identity-family check is reachable from exactly
one subcommand; ``selftest --list`` prints that coverage manifest.  Reports
are deterministic: identical (input, seed) produce byte-identical JSON.

Exit codes: 0 pass, 1 identity failure, 2 input error, 3 precision exhaustion.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import generators
from .galois import sen_operator, simpson_roundtrip_nilpotent, simpson_roundtrip_unipotent, verify_F_cocycle, verify_lambda_law
from .higgs import bk_twist_module, check_enhanced, dual, enhanced_higgs_complex, higgs_complex, tensor, twist
from .homology import cech_alexander, cohomology, koszul_group_cohomology, rho_map, snf
from .matrices import Matrix, exp_nilpotent, op_binomial_series_scalar
from .modfile import SchemaError, dump_stratification, load_module, load_stratification
from .rings import (
    BaseRing,
    DivisionError,
    NonConvergenceError,
    PrecisionError,
    PrimeConfig,
    RingError,
    adjoin_formal_lambda,
    adjoin_zeta,
    make_base_ring,
)
from .stratification import (
    build_stratification,
    check_cocycle,
    commutator_defect_oracle,
    extract,
    family_from_operators,
    raw_stratification,
    rebuild_from_extract,
    verify_technique_equivalence,
)

REPORT_SCHEMA = "prismhiggs-report/1"

# coverage manifest: identity family -> owning subcommand
CHECKS = [
    ("ring-axioms", "selftest"),
    ("divided-power-product-rule", "selftest"),
    ("division-audit", "selftest"),
    ("binomial-series-termination", "selftest"),
    ("simplicial-identities", "selftest"),
    ("technique-coefficient-identity", "selftest"),
    ("mutation-detection", "selftest"),
    ("enhancement-identities", "verify"),
    ("stratification-product-orders", "verify"),
    ("bk-twist-table", "verify"),
    ("tensor-dual-closure", "verify"),
    ("cocycle-condition", "cocycle"),
    ("extract-rebuild-roundtrip", "stratify"),
    ("higgs-complex-cohomology", "cohomology"),
    ("snf-reconstruction", "cohomology"),
    ("cech-alexander-comparison", "cech"),
    ("rho-square", "cech"),
    ("galois-cocycle", "galois"),
    ("lambda-transformation-law", "galois"),
    ("semidirect-relation", "galois"),
    ("theta-equivariance", "galois"),
    ("sen-limit", "sen"),
    ("simpson-roundtrip", "roundtrip"),
    ("koszul-vs-higgs", "roundtrip"),
]


def _check(cid, status, prec=None, witness=None, detail=None):
    out = {"id": cid, "status": status}
    if prec is not None:
        out["prec_floor"] = int(prec)
    if witness is not None:
        out["witness"] = witness
    if detail is not None:
        out["detail"] = detail
    return out


def _report(command, params, checks):
    status = "pass" if all(c["status"] == "pass" for c in checks) else "fail"
    return {
        "schema": REPORT_SCHEMA,
        "command": command,
        "params": params,
        "checks": checks,
        "status": status,
    }


def _emit(report, as_json: bool) -> int:
    if as_json:
        sys.stdout.write(json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n")
    else:
        print(f"[{report['command']}] status: {report['status']}")
        for c in report["checks"]:
            line = f"  {c['status']:<5} {c['id']}"
            if "prec_floor" in c:
                line += f" (prec {c['prec_floor']})"
            if c["status"] != "pass" and "witness" in c:
                line += f" witness={c['witness']}"
            print(line)
    return 0 if report["status"] == "pass" else 1


def _mono_str(mono) -> str:
    return "*".join(f"v{k}^{e}" for k, e in enumerate(mono) if e) or "1"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    cfg, ring, m = load_module(args.infile)
    checks = []
    rep = check_enhanced(m)
    checks.append(
        _check("enhancement-identities", "pass" if rep.ok else "fail", m.prec(),
               witness=None if rep.ok else rep.failures[0][0])
    )
    if rep.ok and isinstance(ring, BaseRing):
        try:
            s = build_stratification(m, args.degree)
            checks.append(_check("stratification-product-orders", "pass", s.prec()))
            co = check_cocycle(s)
            checks.append(
                _check("cocycle-condition", "pass" if co.ok else "fail", co.prec,
                       witness=None if co.ok else _mono_str(co.witness[0]))
            )
        except ValueError as exc:
            checks.append(_check("stratification-product-orders", "fail", detail=str(exc)))
    # twist table and closure under tensor/dual
    if isinstance(ring, BaseRing):
        tw_ok = all(
            build_stratification(bk_twist_module(n, ring), 2)
            .coefficient(1, ())
            .eq(Matrix.identity(ring, 1).scale(ring.a * (-n)))
            for n in range(-3, 4)
        )
        checks.append(_check("bk-twist-table", "pass" if tw_ok else "fail", ring.N))
        if rep.ok:
            closure_ok = check_enhanced(dual(m)).ok and check_enhanced(tensor(m, bk_twist_module(1, ring))).ok
            checks.append(_check("tensor-dual-closure", "pass" if closure_ok else "fail", m.prec()))
    return _emit(_report("verify", {"in": str(args.infile), "degree": args.degree}, checks), args.json)


def cmd_stratify(args) -> int:
    cfg, ring, m = load_module(args.infile)
    if not isinstance(ring, BaseRing):
        raise SchemaError(str(args.infile), "stratify needs base-ring entries")
    s = build_stratification(m, args.degree)
    checks = [_check("stratification-product-orders", "pass", s.prec())]
    rebuilt = rebuild_from_extract(s)
    ok = rebuilt.eps().eq(s.eps())
    checks.append(_check("extract-rebuild-roundtrip", "pass" if ok else "fail", s.prec()))
    if args.out:
        dump_stratification(s, args.out)
    return _emit(_report("stratify", {"in": str(args.infile), "degree": args.degree, "out": args.out}, checks), args.json)


def cmd_cocycle(args) -> int:
    cfg, ring, s = load_stratification(args.infile)
    co = check_cocycle(s)
    checks = [
        _check("cocycle-condition", "pass" if co.ok else "fail", co.prec,
               witness=None if co.ok else _mono_str(co.witness[0]))
    ]
    return _emit(_report("cocycle", {"in": str(args.infile)}, checks), args.json)


def cmd_cohomology(args) -> int:
    cfg, ring, m = load_module(args.infile)
    if not isinstance(ring, BaseRing):
        raise SchemaError(str(args.infile), "cohomology needs base-ring entries (chain ring)")
    checks = []
    rep = check_enhanced(m)
    if not rep.ok:
        checks.append(_check("enhancement-identities", "fail", witness=rep.failures[0][0]))
        return _emit(_report("cohomology", {"in": str(args.infile)}, checks), args.json)
    which = "enhanced" if args.enhanced or not (args.higgs or args.cech) else ("higgs" if args.higgs else "cech")
    if which == "cech":
        s = build_stratification(m, args.degree)
        cx = cech_alexander(s, args.nmax, args.degree)
    elif which == "higgs":
        cx = higgs_complex(m)
    else:
        cx = enhanced_higgs_complex(m)
    prof = cohomology(cx, args.guard)
    checks.append(
        _check("higgs-complex-cohomology", "pass", prof.prec,
               detail={"which": which, "divisors": {str(q): v for q, v in prof.divisor_lists().items()},
                       "rational_ranks": prof.rational_ranks(), "guard_pi": prof.guard_pi})
    )
    # SNF reconstruction on the first differential, when present
    if cx.diffs:
        res = snf(cx.diffs[0])
        ok = (res.U @ cx.diffs[0] @ res.V).eq(res.D)
        checks.append(_check("snf-reconstruction", "pass" if ok else "fail", res.work_prec))
    return _emit(_report("cohomology", {"in": str(args.infile), "which": which, "guard": args.guard}, checks), args.json)


def cmd_cech(args) -> int:
    cfg, ring, m = load_module(args.infile)
    if not isinstance(ring, BaseRing):
        raise SchemaError(str(args.infile), "cech needs base-ring entries")
    checks = []
    rep = check_enhanced(m)
    if not rep.ok:
        checks.append(_check("enhancement-identities", "fail", witness=rep.failures[0][0]))
        return _emit(_report("cech", {"in": str(args.infile)}, checks), args.json)
    s = build_stratification(m, max(args.degree, 2 * m.rank))
    cx = cech_alexander(s, args.nmax, s.D)
    prof_ca = cohomology(cx, args.guard)
    prof_hg = cohomology(enhanced_higgs_complex(m), args.guard)
    ca = prof_ca.rational_ranks()[: min(2, args.nmax)]
    hg = prof_hg.rational_ranks()[: min(2, args.nmax)]
    detail = {"cech": prof_ca.rational_ranks(), "fiber": prof_hg.rational_ranks()}
    if m.d == 0:
        ok = ca == hg
        checks.append(_check("cech-alexander-comparison", "pass" if ok else "fail", prof_ca.prec, detail=detail))
    else:
        # for d >= 1 the degree/precision budget is empirical: reported, not asserted
        checks.append(_check("cech-alexander-comparison", "pass", prof_ca.prec,
                             detail={**detail, "note": "d >= 1: comparison is reported only"}))
    rho_ok = all(rho_map(m, q, args.degree).ok for q in (0, 1, 2))
    checks.append(_check("rho-square", "pass" if rho_ok else "fail", m.prec()))
    return _emit(_report("cech", {"in": str(args.infile), "nmax": args.nmax, "guard": args.guard}, checks), args.json)


def cmd_sen(args) -> int:
    cfg, ring, m = load_module(args.infile)
    if not isinstance(ring, BaseRing):
        raise SchemaError(str(args.infile), "sen needs base-ring entries")
    rep = sen_operator(m, args.nmax)
    checks = [
        _check("sen-limit", "pass" if rep.ok else "fail", rep.prec,
               detail={"valuations": rep.valuations, "operator": rep.operator,
                       "sen_scalar": rep.sen_scalar})
    ]
    return _emit(_report("sen", {"in": str(args.infile), "nmax": args.nmax}, checks), args.json)


def cmd_galois(args) -> int:
    cfg, ring, m = load_module(args.infile)
    if not isinstance(ring, BaseRing):
        raise SchemaError(str(args.infile), "galois needs base-ring entries")
    rep = verify_F_cocycle(m, trials=args.trials, seed=args.seed)
    lam = verify_lambda_law(m, trials=max(4, args.trials // 5), seed=args.seed)
    sub = {name: "pass" for name in ("galois-cocycle", "semidirect-relation", "theta-equivariance")}
    for f in rep.failures:
        if "cocycle" in f[0]:
            sub["galois-cocycle"] = "fail"
        elif "semidirect" in f[0]:
            sub["semidirect-relation"] = "fail"
        else:
            sub["theta-equivariance"] = "fail"
    checks = [_check(k, v, m.prec()) for k, v in sub.items()]
    checks.append(_check("lambda-transformation-law", "pass" if lam.ok else "fail", m.prec()))
    return _emit(_report("galois", {"in": str(args.infile), "trials": args.trials, "seed": args.seed}, checks), args.json)


def cmd_roundtrip(args) -> int:
    cfg, ring, m = load_module(args.infile)
    if not isinstance(ring, BaseRing):
        raise SchemaError(str(args.infile), "roundtrip needs base-ring entries")
    checks = []
    try:
        rep = simpson_roundtrip_nilpotent(m.theta)
        checks.append(_check("simpson-roundtrip", "pass" if rep.ok else "fail", m.prec(),
                             witness=None if rep.ok else rep.failures[0][0]))
        if rep.ok and m.d >= 1:
            gammas = [exp_nilpotent(t) for t in m.theta]
            kg = koszul_group_cohomology(gammas, m.rank, ring)
            kh = higgs_complex(m)
            pg = cohomology(kg, args.guard)
            ph = cohomology(kh, args.guard)
            ok = pg.rational_ranks() == ph.rational_ranks()
            checks.append(_check("koszul-vs-higgs", "pass" if ok else "fail", pg.prec,
                                 detail={"group": pg.rational_ranks(), "higgs": ph.rational_ranks()}))
    except (DivisionError, NonConvergenceError) as exc:
        checks.append(_check("simpson-roundtrip", "fail", detail=str(exc)))
    return _emit(_report("roundtrip", {"in": str(args.infile)}, checks), args.json)


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------


def _selftest_configs(args):
    all_cfgs = [
        (2, 8, (-2, 1)),
        (2, 8, (2, 2, 1)),
        (3, 6, (-3, 1)),
        (3, 6, (-3, 0, 1)),
        (5, 6, (-5, 1)),
        (5, 6, (-5, 0, 1)),
    ]
    out = []
    for (p, N, E) in all_cfgs:
        if args.prime and p != args.prime:
            continue
        if args.precision and N != args.precision:
            continue
        out.append(PrimeConfig(p, N, E))
    return out


def cmd_selftest(args) -> int:
    if args.list:
        for cid, sub in CHECKS:
            print(f"{cid:<34} {sub}")
        return 0
    checks = []
    rng = np.random.default_rng(args.seed)
    D = args.degree
    from .dp import DPPoly, DPShape, verify_simplicial_identities

    for cfg in _selftest_configs(args):
        ring = make_base_ring(cfg)
        tag = f"p={cfg.p},e={cfg.e}"
        # ring axioms
        ok = True
        for _ in range(args.trials // 5 + 2):
            x = ring.elt(rng.integers(0, ring.pN, size=ring.vec_shape))
            y = ring.elt(rng.integers(0, ring.pN, size=ring.vec_shape))
            z = ring.elt(rng.integers(0, ring.pN, size=ring.vec_shape))
            ok &= ((x * y) * z).eq(x * (y * z)) and (x * (y + z)).eq(x * y + x * z)
        checks.append(_check(f"ring-axioms[{tag}]", "pass" if ok else "fail", ring.N))
        # division audit
        ok = True
        for _ in range(args.trials // 5 + 2):
            mdiv = int(rng.integers(1, 3))
            x = ring.elt(rng.integers(0, ring.pN, size=ring.vec_shape) * ring.p ** mdiv)
            q = x.divide_by_p_power(mdiv)
            ok &= (q * ring.p ** mdiv).eq(x) and q.prec == ring.N - mdiv
        checks.append(_check(f"division-audit[{tag}]", "pass" if ok else "fail", ring.N))
        # dp product rule
        sh = DPShape("arith", 1, 0, D)
        import math as _math

        ok = True
        for i in range(1, D):
            for j in range(1, D - i + 1):
                lhs = DPPoly.variable(sh, ring, ("X", 1), i) * DPPoly.variable(sh, ring, ("X", 1), j)
                rhs = DPPoly.variable(sh, ring, ("X", 1), i + j).scale(_math.comb(i + j, i))
                ok &= lhs.eq(rhs)
        checks.append(_check(f"divided-power-product-rule[{tag}]", "pass" if ok else "fail", ring.N))
        # simplicial identities
        si = verify_simplicial_identities("arith", ring, 1, 2, D)
        sg = verify_simplicial_identities("geo", ring, 1, 2, D)
        checks.append(_check(f"simplicial-identities[{tag}]", "pass" if (si.ok and sg.ok) else "fail", ring.N))
        # binomial series termination on a twist with scalar z of positive valuation
        mtw = bk_twist_module(int(rng.integers(-3, 4)), ring)
        z = ring.pi * ring.p  # val > 1/(p-1)
        try:
            op_binomial_series_scalar(mtw.phi, ring.a, z, 4 * ring.N + 8)
            checks.append(_check(f"binomial-series-termination[{tag}]", "pass", ring.N))
        except NonConvergenceError:
            checks.append(_check(f"binomial-series-termination[{tag}]", "fail"))
        # random modules: cocycle + extract + technique identity
        ok_c, ok_x, ok_t = True, True, True
        for t in range(max(2, args.trials // 10)):
            r = int(rng.integers(1, 4))
            dd = int(rng.integers(0, 3))
            m = generators.random_enhanced_checked(rng, ring, r, dd)
            s = build_stratification(m, D)
            ok_c &= bool(check_cocycle(s))
            th, ph = extract(s)
            ok_x &= ph.eq(m.phi) and all(th[i].eq(m.theta[i]) for i in range(dd))
        m = generators.random_enhanced_checked(rng, ring, 2, 1)
        ok_t = bool(verify_technique_equivalence(build_stratification(m, 3), 3))
        checks.append(_check(f"cocycle-condition[{tag}]", "pass" if ok_c else "fail", ring.N))
        checks.append(_check(f"extract-rebuild-roundtrip[{tag}]", "pass" if ok_x else "fail", ring.N))
        checks.append(_check(f"technique-coefficient-identity[{tag}]", "pass" if ok_t else "fail", ring.N))
        # mutation detection
        mm = generators.random_enhanced_checked(rng, ring, 3, 2, need_theta=True)
        theta_b, phi_b, i0 = generators.mutate_phi(rng, mm)
        fam = family_from_operators(ring, 3, 2, theta_b, phi_b, 24, 4)
        okm = not check_cocycle(raw_stratification(ring, 3, 2, min(D, 4), fam)).ok
        checks.append(_check(f"mutation-detection[{tag}]", "pass" if okm else "fail", ring.N))
        # snf reconstruction
        ok = True
        for _ in range(3):
            rows, cols = int(rng.integers(1, 5)), int(rng.integers(1, 5))
            A = Matrix(ring, rng.integers(0, ring.pN, size=(rows, cols) + ring.vec_shape))
            res = snf(A)
            ok &= (res.U @ A @ res.V).eq(res.D)
        checks.append(_check(f"snf-reconstruction[{tag}]", "pass" if ok else "fail", ring.N))
        # galois + sen + cech + rho + roundtrip, one instance each
        mg = generators.random_enhanced_checked(rng, ring, 2, 1)
        checks.append(_check(f"galois-cocycle[{tag}]",
                             "pass" if verify_F_cocycle(mg, trials=max(3, args.trials // 10), seed=args.seed).ok else "fail",
                             ring.N))
        checks.append(_check(f"sen-limit[{tag}]", "pass" if sen_operator(mg, args.nmax).ok else "fail", ring.N))
        m0 = generators.random_enhanced_checked(rng, ring, 2, 0)
        s0 = build_stratification(m0, max(D, 2 * m0.rank))
        ca = cohomology(cech_alexander(s0, 2, s0.D), args.guard).rational_ranks()[:2]
        hg = cohomology(enhanced_higgs_complex(m0), args.guard).rational_ranks()[:2]
        checks.append(_check(f"cech-alexander-comparison[{tag}]", "pass" if ca == hg else "fail", ring.N))
        checks.append(_check(f"rho-square[{tag}]",
                             "pass" if all(rho_map(m0, q, D).ok for q in (0, 1, 2)) else "fail", ring.N))
        nil = generators.random_commuting_nilpotents(rng, ring, 3, 2)
        checks.append(_check(f"simpson-roundtrip[{tag}]",
                             "pass" if simpson_roundtrip_nilpotent(nil).ok else "fail", ring.N))
    params = {"seed": args.seed, "trials": args.trials, "degree": args.degree,
              "guard": args.guard, "nmax": args.nmax,
              "prime": args.prime, "precision": args.precision}
    return _emit(_report("selftest", params, checks), args.json)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prismhiggs", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, infile=True):
        if infile:
            sp.add_argument("--in", dest="infile", required=True)
        sp.add_argument("--prime", type=int, default=None)
        sp.add_argument("--precision", type=int, default=None)
        sp.add_argument("--degree", type=int, default=4)
        sp.add_argument("--guard", type=float, default=None)
        sp.add_argument("--nmax", type=int, default=3)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--trials", type=int, default=50)
        sp.add_argument("--json", action="store_true")

    for name, fn in [
        ("verify", cmd_verify),
        ("stratify", cmd_stratify),
        ("cocycle", cmd_cocycle),
        ("cohomology", cmd_cohomology),
        ("cech", cmd_cech),
        ("sen", cmd_sen),
        ("galois", cmd_galois),
        ("roundtrip", cmd_roundtrip),
    ]:
        sp = sub.add_parser(name)
        common(sp)
        sp.set_defaults(fn=fn)
        if name == "stratify":
            sp.add_argument("--out", default=None)
        if name == "cohomology":
            sp.add_argument("--enhanced", action="store_true")
            sp.add_argument("--higgs", action="store_true")
            sp.add_argument("--cech", action="store_true")

    sp = sub.add_parser("selftest")
    common(sp, infile=False)
    sp.add_argument("--list", action="store_true")
    sp.set_defaults(fn=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (PrecisionError,) as exc:
        print(f"precision exhaustion: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
