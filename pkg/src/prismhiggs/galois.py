"""The arithmetic side: explicit Galois actions, the Sen limit, and the
local Simpson round trip.

The group Gal(K_cyc,oo / K) is modeled by pairs (chi, c) with the
upper-triangular 2x2 law (chi1, c1)(chi2, c2) = (chi1 chi2, chi1 c2 + c1);
tau = (1, 1) generates the Kummer direction.  On the carrier H (x) the
formal-lambda ring the action is

    gamma^n g (x) = exp(sum_i -n_i (zeta_p - 1) lambda theta_i)
                    (1 + pi a (zeta_p - 1) lambda c(g))^(-phi/a) (x),

semilinear over the scalar action z -> z^chi, lambda -> g(lambda) with

    g(lambda) = chi (zeta_p-1)/(zeta_p^chi - 1) lambda
                (1 + pi a (zeta_p-1) lambda c(g))^(-1).

lambda itself never takes a numeric value; only this transformation law is
used, and every identity below holds formally in the Laurent variable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .higgs import CheckReport, EnhancedHiggsModule, check_enhanced, nilpotence_bound
from .matrices import (
    Matrix,
    binomial_product_coefficients,
    exp_nilpotent,
    log_unipotent,
    op_binomial_series_scalar,
)
from .rings import (INT, BaseRing, CycloRing, LambdaRing, RingElt, TruncationError,
                    adjoin_formal_lambda, adjoin_zeta)


@dataclass(frozen=True)
class GroupElement:
    """(chi, c): chi a unit mod p^N, c mod p^N; tau = (1, 1)."""

    chi: int
    c: int

    def compose(self, other: "GroupElement", pN: int) -> "GroupElement":
        return GroupElement((self.chi * other.chi) % pN, (self.chi * other.c + self.c) % pN)

    @staticmethod
    def identity() -> "GroupElement":
        return GroupElement(1, 0)

    @staticmethod
    def tau(power: int = 1) -> "GroupElement":
        return GroupElement(1, power)


class GaloisContext:
    """Carrier data for one enhanced Higgs module: the lambda-ring lift of
    theta and phi plus the cached structural constants."""

    def __init__(self, module: EnhancedHiggsModule, lambda_bound: int | None = None):
        ring = module.ring
        if not isinstance(ring, BaseRing):
            raise ValueError("the Galois carrier needs base-ring operator entries")
        rep = check_enhanced(module)
        if not rep.ok:
            raise ValueError(f"module is not enhanced: {rep.failures[0][0]}")
        self.module = module
        self.base = ring
        self.cyclo = adjoin_zeta(ring)
        self.lam_ring = adjoin_formal_lambda(self.cyclo, lambda_bound)
        self.pN = ring.pN
        L, C = self.lam_ring, self.cyclo

        def lift(vec):
            return L.embed_cyclo(C.embed_base(vec))

        self.theta = [t.map_ring(L, lift) for t in module.theta]
        self.phi = module.phi.map_ring(L, lift)
        self.a = L.a
        self.pi = L.pi
        self.zeta = L.zeta
        self.lam = L.lam
        self.zm1 = self.zeta - 1
        self.zm1c = (C.zeta_vec - C.one_vec()) % C.pN
        self.max_terms = nilpotence_bound(module) + ring.N * (ring.p - 1) + 8

    # -- scalar Galois action ------------------------------------------------
    def act_on_lambda(self, g: GroupElement) -> RingElt:
        """g(lambda) per the transformation law; chi must be a unit."""
        if g.chi % self.base.p == 0:
            raise ValueError("chi(g) must be a p-adic unit")
        L = self.lam_ring
        chi_mod_p = g.chi % self.base.p
        # (zeta^chi - 1)/(zeta - 1) = 1 + zeta + ... + zeta^(chi-1), a unit
        quot = L.zero()
        zpow = L.one()
        for t in range(chi_mod_p):
            if t:
                zpow = zpow * self.zeta
            quot = quot + zpow
        body = L.one() + self.pi * self.a * self.zm1 * self.lam * g.c
        return self.lam * quot.inverse() * body.inverse() * g.chi

    def scalar_action(self, g: GroupElement, x: RingElt) -> RingElt:
        """Semilinear action on lambda-ring scalars: z -> z^chi, lambda -> g(lambda)."""
        L = self.lam_ring
        zs = L.zsub_vec(x.vec, g.chi % self.base.p)
        mu = self.act_on_lambda(g)
        out = L.subst_lambda_vec(zs, mu.vec, min(x.prec, mu.prec))
        return RingElt(L, out, min(x.prec, mu.prec))

    def matrix_scalar_action(self, g: GroupElement, M: Matrix) -> Matrix:
        L = self.lam_ring
        mu = self.act_on_lambda(g)
        prec = min(M.prec, mu.prec)
        out = np.zeros_like(M.arr)
        for i in range(M.rows):
            for j in range(M.cols):
                zs = L.zsub_vec(M.arr[i, j], g.chi % self.base.p)
                out[i, j] = L.subst_lambda_vec(zs, mu.vec, prec)
        return Matrix(L, out, prec)

    # -- module action ---------------------------------------------------------
    # Both factors of the action have lambda-monomial coefficients, so they
    # are assembled slot by slot from base/cyclotomic products: the k-th
    # lambda slot of the Kummer factor is prod_{j<k}(phi + j a) (-pi(zeta-1)c)^[k]
    # and of the geometric factor (sum -n_i theta_i)^k ((zeta-1))^k / k!.

    def _lift_cyclo_block(self, arr_lam, slot, cyclo_mat):
        arr_lam[:, :, slot, :] = cyclo_mat.arr
        return cyclo_mat.prec

    def kummer_part(self, g: GroupElement, phi_base: Matrix | None = None) -> Matrix:
        """(1 + pi a (zeta-1) lambda c(g))^(-phi/a) as a finite lambda-matrix.

        ``phi_base`` (over the base ring) replaces the module's phi; the
        theta-equivariance mutation check feeds a broken operator here.
        """
        phi = self.module.phi if phi_base is None else phi_base
        ring = self.base
        cy = self.cyclo
        L = self.lam_ring
        rank = phi.rows
        coeffs = binomial_product_coefficients(phi, ring.a, self.max_terms)
        w = RingElt(cy, cy.mul_vec(cy.embed_base(ring.pi_vec), self.zm1c), phi.prec) * (-int(g.c))
        arr = np.zeros((rank, rank) + L.vec_shape, dtype=INT)
        prec = min(phi.prec, L.N)
        ident = Matrix.identity(cy, rank, prec)
        arr[:, :, L.bound, :] = ident.arr
        wk = cy.elt(cy.one_vec())
        for k in range(1, len(coeffs)):
            wk = (wk * w).divide_by_int(k)
            if wk.is_zero():
                prec = min(prec, wk.prec)
                break
            if k > L.bound:
                raise TruncationError("lambda window too small for the Kummer factor")
            block = coeffs[k].map_ring(cy, cy.embed_base).scale(wk)
            arr[:, :, L.bound + k, :] = block.arr
            prec = min(prec, block.prec)
        return Matrix(L, arr, prec)

    def geometric_part(self, geo) -> Matrix:
        """exp(sum_i -n_i (zeta-1) lambda theta_i), a finite unipotent matrix."""
        cy = self.cyclo
        L = self.lam_ring
        rank = self.module.rank
        acc = Matrix.zeros(cy, rank, rank, self.module.prec())
        for i, n_i in enumerate(geo):
            if n_i:
                acc = acc + self.module.theta[i].map_ring(cy, cy.embed_base).scale(-int(n_i))
        acc = acc.scale(RingElt(cy, self.zm1c, acc.prec))
        arr = np.zeros((rank, rank) + L.vec_shape, dtype=INT)
        prec = acc.prec
        term = Matrix.identity(cy, rank, acc.prec)
        arr[:, :, L.bound, :] = term.arr
        for k in range(1, rank + 1):
            term = (term @ acc).divide_by_int(k)
            if term.is_zero():
                break
            if k > L.bound:
                raise TruncationError("lambda window too small for the geometric factor")
            arr[:, :, L.bound + k, :] = term.arr
            prec = min(prec, term.prec)
        return Matrix(L, arr, prec)

    def action_matrix(self, g: GroupElement, geo=None) -> Matrix:
        geo = geo if geo is not None else (0,) * self.module.d
        A = self.kummer_part(g)
        if any(geo):
            A = self.geometric_part(geo) @ A
        return A

    def act(self, g: GroupElement, geo, x: Matrix) -> Matrix:
        """Semilinear action on a column vector over the lambda-ring."""
        return self.action_matrix(g, geo) @ self.matrix_scalar_action(g, x)

    def compose_full(self, h1, h2):
        """(geo1, g1) . (geo2, g2) = (geo1 + chi(g1) geo2, g1 g2)."""
        geo1, g1 = h1
        geo2, g2 = h2
        geo = tuple((int(a) + g1.chi * int(b)) % self.pN for a, b in zip(geo1, geo2))
        return geo, g1.compose(g2, self.pN)

    def lambda_degree_coefficient(self, M: Matrix, k: int) -> Matrix:
        """Extract the lambda^k coefficient of a lambda-matrix as a cyclo matrix."""
        L = self.lam_ring
        return Matrix(self.cyclo, M.arr[:, :, L.bound + k, :], M.prec)


# ---------------------------------------------------------------------------
# the action is a group homomorphism
# ---------------------------------------------------------------------------


def verify_F_cocycle(
    m: EnhancedHiggsModule, trials: int = 20, seed: int = 0, lambda_bound: int | None = None
) -> CheckReport:
    """act(h1) act(h2) = act(h1 h2) on random pairs, the semidirect relation
    g gamma_i g^{-1} = gamma_i^{chi(g)}, and the theta-equivariance shift."""
    ctx = GaloisContext(m, lambda_bound)
    rng = np.random.default_rng(seed)
    pN, p = ctx.pN, ctx.base.p
    failures = []

    def rand_g():
        while True:
            chi = int(rng.integers(1, min(pN, 1 << 30)))
            if chi % p:
                break
        return GroupElement(chi, int(rng.integers(0, min(pN, 1 << 30))))

    def rand_geo():
        return tuple(int(x) for x in rng.integers(0, 3, size=m.d))

    def full_matrix(h):
        geo, g = h
        return ctx.action_matrix(g, geo)

    for t in range(trials):
        h1 = (rand_geo(), rand_g())
        h2 = (rand_geo(), rand_g())
        lhs = full_matrix(h1) @ ctx.matrix_scalar_action(h1[1], full_matrix(h2))
        rhs = full_matrix(ctx.compose_full(h1, h2))
        if not lhs.eq(rhs):
            failures.append(("cocycle fails", h1, h2))
            break
    # semidirect relation: (0,g)(e_i,1) = (chi(g) e_i, g) = (chi(g) e_i, 1)(0, g)
    for i in range(m.d):
        g = rand_g()
        e_i = tuple(1 if j == i else 0 for j in range(m.d))
        left = ctx.action_matrix(g) @ ctx.matrix_scalar_action(g, ctx.action_matrix(GroupElement.identity(), e_i))
        chie = tuple(g.chi if j == i else 0 for j in range(m.d))
        right = ctx.action_matrix(GroupElement.identity(), chie) @ ctx.action_matrix(g)
        if not left.eq(right):
            failures.append(("semidirect relation fails", i, g))
    # theta-equivariance: B(phi + a) theta_i = theta_i B(phi)
    g = GroupElement.tau()
    B0 = ctx.kummer_part(g)
    B1 = ctx.kummer_part(g, m.phi.add_scalar_identity(m.ring.a))
    for i in range(m.d):
        if not (B1 @ ctx.theta[i]).eq(ctx.theta[i] @ B0):
            failures.append(("theta equivariance fails", i))
    return CheckReport(not failures, failures)


def verify_lambda_law(m: EnhancedHiggsModule, trials: int = 10, seed: int = 0) -> CheckReport:
    """act_on_lambda(g1 g2) = g1-action applied to act_on_lambda(g2)."""
    ctx = GaloisContext(m)
    rng = np.random.default_rng(seed)
    pN, p = ctx.pN, ctx.base.p
    failures = []
    for t in range(trials):
        while True:
            chi1 = int(rng.integers(1, min(pN, 1 << 30)))
            chi2 = int(rng.integers(1, min(pN, 1 << 30)))
            if chi1 % p and chi2 % p:
                break
        g1 = GroupElement(chi1, int(rng.integers(0, min(pN, 1 << 30))))
        g2 = GroupElement(chi2, int(rng.integers(0, min(pN, 1 << 30))))
        lhs = ctx.act_on_lambda(g1.compose(g2, pN))
        rhs = ctx.scalar_action(g1, ctx.act_on_lambda(g2))
        if not lhs.eq(rhs):
            failures.append(("lambda law fails", g1, g2))
    return CheckReport(not failures, failures)


# ---------------------------------------------------------------------------
# the Sen operator as a limit
# ---------------------------------------------------------------------------


@dataclass
class SenReport:
    ok: bool
    valuations: list  # per n: "zero@floor f" or the lower-bound valuation
    strictly_increasing: bool
    lambda1_matches: bool
    operator: str = "-phi/E'(pi)"
    sen_scalar: object = None  # -phi/a as an integer when phi is a scalar multiple of a
    phi_dump: list | None = None
    prec: int = 0

    def __bool__(self):
        return self.ok


def sen_operator(m: EnhancedHiggsModule, n_max: int = 3, lambda_bound: int | None = None) -> SenReport:
    """D_n = (act(tau^{p^n}) - 1)/p^n; val(D_n + pi (zeta-1) lambda phi) must
    strictly increase in n, and the lambda^1 coefficient of D_n equals
    -pi (zeta-1) phi at the achieved floor.

    A difference that vanishes at its floor is beyond measurement; it counts
    as an increase (the true valuation is at least the floor), and once the
    sequence reaches that state it may stay there.
    """
    ctx = GaloisContext(m, lambda_bound)
    L = ctx.lam_ring
    p = ctx.base.p
    target = ctx.phi.scale(ctx.pi * ctx.zm1 * ctx.lam)  # pi (zeta-1) lambda phi
    vals: list = []  # (lb Fraction | None, floor)
    lambda1_ok = True
    cy = ctx.cyclo
    want1 = m.phi.map_ring(cy, cy.embed_base).scale(
        RingElt(cy, cy.mul_vec(cy.embed_base(ctx.base.pi_vec), (cy.zeta_vec - cy.one_vec()) % cy.pN), m.prec())
    )
    D_last = None
    for n in range(n_max + 1):
        g = GroupElement.tau(p ** n)
        A = ctx.action_matrix(g)
        D_n = (A - Matrix.identity(L, m.rank, A.prec)).divide_by_p_power(n)
        diff = D_n + target
        if diff.is_zero():
            vals.append((None, diff.prec))
        else:
            vals.append((diff.val_lower_bound(), diff.prec))
        coeff1 = ctx.lambda_degree_coefficient(D_n, 1)
        if not coeff1.eq(-want1):
            lambda1_ok = False
        D_last = D_n
    increasing = True
    for k in range(len(vals) - 1):
        (a_lb, _), (b_lb, _) = vals[k], vals[k + 1]
        if b_lb is None:
            continue  # vanished at the floor: consistent with any increase
        if a_lb is None or not b_lb > a_lb:
            increasing = False
    sen_scalar = None
    if m.rank == 1:
        sen_scalar = _try_scalar_ratio(m)
    shown = [f"zero@floor {fl}" if lb is None else f"{lb} (floor {fl})" for lb, fl in vals]
    return SenReport(
        increasing and lambda1_ok,
        shown,
        increasing,
        lambda1_ok,
        sen_scalar=sen_scalar,
        phi_dump=m.phi.arr.tolist(),
        prec=D_last.prec if D_last is not None else m.prec(),
    )


def _try_scalar_ratio(m: EnhancedHiggsModule):
    """-phi/a as a signed integer for rank 1 when phi = s*a exactly."""
    ring = m.ring
    phi00 = m.phi.arr[0, 0]
    a = ring.a_vec
    va = ring.val_pi(a)
    if ring.val_pi(phi00) >= ring.e * m.phi.prec:
        return 0
    if ring.val_pi(phi00) < va:
        return None
    unit_a = ring.unit_part(a, va)
    s = ring.mul_vec(ring.unit_part(phi00, va), ring.invert_vec(unit_a))
    # the quotient is determined modulo pi^(eN - va) only
    fl = (ring.e * m.phi.prec - va) // ring.e
    pf = ring.p ** fl
    s = s % pf
    if np.any(s[1:]):
        return None
    neg = (-int(s[0])) % pf
    return neg if neg <= pf // 2 else neg - pf


# ---------------------------------------------------------------------------
# local Simpson round trip
# ---------------------------------------------------------------------------


@dataclass
class RoundTripReport(CheckReport):
    pass


def simpson_roundtrip_nilpotent(theta: list[Matrix]) -> CheckReport:
    """Direction A: gamma_i = exp(theta_i), then log recovers theta_i."""
    failures = []
    for i in range(len(theta)):
        for j in range(i + 1, len(theta)):
            if not theta[i].commutator(theta[j]).is_zero():
                return CheckReport(False, [("input operators do not commute", (i, j))])
    gammas = [exp_nilpotent(t) for t in theta]
    for i, g in enumerate(gammas):
        back = log_unipotent(g)
        if not back.eq(theta[i]):
            failures.append(("log(exp(theta)) != theta", i))
    for i in range(len(gammas)):
        for j in range(i + 1, len(gammas)):
            if not gammas[i].commutator(gammas[j]).is_zero():
                failures.append(("exp images do not commute", (i, j)))
    return CheckReport(not failures, failures)


def simpson_roundtrip_unipotent(gammas: list[Matrix]) -> CheckReport:
    """Direction B: theta_i = log(gamma_i); exp inverts; and the invariant
    operator sum_n prod_i (gamma_i^{-1}-1)^{n_i} binom(Y, n) is fixed by each
    gamma_i acting on coefficients combined with the translation
    Y_i -> Y_i + 1 (binomial basis is stable under integer translation)."""
    failures = []
    ring = gammas[0].ring
    rank = gammas[0].rows
    d = len(gammas)
    for i in range(d):
        for j in range(i + 1, d):
            if not gammas[i].commutator(gammas[j]).is_zero():
                return CheckReport(False, [("input operators do not commute", (i, j))])
    thetas = [log_unipotent(g) for g in gammas]
    for i in range(d):
        if not exp_nilpotent(thetas[i]).eq(gammas[i]):
            failures.append(("exp(log(gamma)) != gamma", i))
    # invariant element in the binomial basis
    import itertools

    ginv = [_matrix_inverse_unipotent(g) for g in gammas]
    deltas = [gi - Matrix.identity(ring, rank, gi.prec) for gi in ginv]
    coeffs = {}
    for n in itertools.product(*(range(rank + 1) for _ in range(d))):
        mat = Matrix.identity(ring, rank, gammas[0].prec)
        for i, ni in enumerate(n):
            for _ in range(ni):
                mat = mat @ deltas[i]
        if not mat.is_zero():
            coeffs[n] = mat
    for i in range(d):
        moved = {}
        for n, mat in coeffs.items():
            moved[n] = gammas[i] @ mat
        # translation Y_i -> Y_i + 1: binom(Y_i+1, n_i) = binom(Y_i, n_i) + binom(Y_i, n_i - 1)
        translated = {}
        for n, mat in moved.items():
            translated[n] = translated.get(n, Matrix.zeros(ring, rank, rank)) + mat
            up = tuple(x - (1 if k == i else 0) for k, x in enumerate(n))
            if up[i] >= 0:
                translated[up] = translated.get(up, Matrix.zeros(ring, rank, rank)) + mat
        keys = set(coeffs) | set(translated)
        for n in keys:
            lhs = translated.get(n, Matrix.zeros(ring, rank, rank))
            rhs = coeffs.get(n, Matrix.zeros(ring, rank, rank))
            if not lhs.eq(rhs):
                failures.append(("invariance under gamma_i x translation fails", i, n))
                break
    return CheckReport(not failures, failures)


def _matrix_inverse_unipotent(g: Matrix) -> Matrix:
    ident = Matrix.identity(g.ring, g.rows, g.prec)
    n = ident - g  # nilpotent
    acc = ident
    term = ident
    for _ in range(g.rows + 1):
        term = term @ n
        if term.is_zero():
            break
        acc = acc + term
    return acc
