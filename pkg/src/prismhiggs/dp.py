"""Truncated divided-power polynomial rings with cosimplicial structure.

Monomials are products X_1^[k_1]..X_n^[k_n] * prod Y_{s,i}^[m_{s,i}] of
total degree <= D, with the divided-power product rule
X^[i] X^[j] = binom(i+j, i) X^[i+j].  Coefficients are square blocks over
the base ring (1x1 blocks for plain scalars), so the same polynomial type
carries both ring elements and operator-valued expansions.

Face maps p_i and degeneracies sigma_i implement the cosimplicial ring of
the arithmetic (X and Y variables) and geometric (Y only) situations.  The
nontrivial face p_0 substitutes

    X_j      |-> (X_{j+1} - X_1) * (1 - a X_1)^(-1)
    Y_{s,j}  |-> (Y_{s,j+1} - Y_{s,1}) * (1 - a X_1)^(-1)

with the inverse expanded as the truncated geometric series; on divided
powers this becomes the integral rule
X_j^[k] |-> (X_{j+1} - X_1)^[k] (1 - a X_1)^(-k), where
(A - B)^[k] = sum_{i+j=k} (-1)^j A^[i] B^[j].  Every cosimplicial map is
degree-non-decreasing, so truncation at D is exact degreewise: retained
coefficients equal the untruncated ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .matrices import Matrix
from .rings import INT, BaseRing, RingElt

Label = tuple


@dataclass(frozen=True)
class DPShape:
    """Variable layout of one cosimplicial level."""

    kind: str  # 'arith' (X and Y variables) or 'geo' (Y only)
    n: int
    d: int
    D: int

    def __post_init__(self):
        if self.kind not in ("arith", "geo"):
            raise ValueError("kind must be 'arith' or 'geo'")

    @property
    def variables(self) -> tuple[Label, ...]:
        labels: list[Label] = []
        if self.kind == "arith":
            labels.extend(("X", i) for i in range(1, self.n + 1))
        labels.extend(("Y", s, i) for i in range(1, self.n + 1) for s in range(1, self.d + 1))
        return tuple(labels)

    @property
    def nvars(self) -> int:
        return self.n * self.d + (self.n if self.kind == "arith" else 0)

    def var_index(self, label: Label) -> int:
        return self.variables.index(label)

    def at_level(self, n: int) -> "DPShape":
        return DPShape(self.kind, n, self.d, self.D)


class DPPoly:
    """Sparse divided-power polynomial with square coefficient blocks."""

    __slots__ = ("shape", "ring", "rdim", "exps", "coefs", "prec", "truncated")

    def __init__(self, shape: DPShape, ring: BaseRing, rdim: int, exps, coefs, prec, truncated=False):
        self.shape = shape
        self.ring = ring
        self.rdim = rdim
        coefs = np.asarray(coefs, dtype=INT).reshape(-1, rdim, rdim, ring.vec_shape[0]) % ring.pN
        if shape.nvars:
            exps = np.asarray(exps, dtype=INT).reshape(-1, shape.nvars)
        else:
            exps = np.zeros((len(coefs), 0), dtype=INT)
        if len(coefs):
            keep = np.nonzero(coefs.reshape(len(coefs), -1).any(axis=1))[0]
            exps, coefs = exps[keep], coefs[keep]
        if len(exps):
            order = np.argsort(_kernels._encode(exps, shape.D), kind="stable")
            exps, coefs = exps[order], coefs[order]
        self.exps = exps
        self.coefs = coefs
        self.exps.setflags(write=False)
        self.coefs.setflags(write=False)
        self.prec = min(int(prec), ring.N)
        self.truncated = bool(truncated)

    # -- constructors -------------------------------------------------------
    @staticmethod
    def zero(shape: DPShape, ring: BaseRing, rdim: int = 1, prec: int | None = None) -> "DPPoly":
        return DPPoly(
            shape, ring, rdim, np.zeros((0, shape.nvars)), np.zeros((0, rdim, rdim, ring.vec_shape[0])),
            ring.N if prec is None else prec,
        )

    @staticmethod
    def constant(shape: DPShape, ring: BaseRing, block) -> "DPPoly":
        if isinstance(block, (int, np.integer)):
            block = ring.integer(int(block))
        if isinstance(block, RingElt):
            coefs = block.vec.reshape(1, 1, 1, ring.vec_shape[0])
            return DPPoly(shape, ring, 1, np.zeros((1, shape.nvars)), coefs, block.prec)
        return DPPoly(shape, ring, block.rows, np.zeros((1, shape.nvars)), block.arr[None], block.prec)

    @staticmethod
    def one(shape: DPShape, ring: BaseRing, rdim: int = 1) -> "DPPoly":
        if rdim == 1:
            return DPPoly.constant(shape, ring, 1)
        return DPPoly.constant(shape, ring, Matrix.identity(ring, rdim))

    @staticmethod
    def variable(shape: DPShape, ring: BaseRing, label: Label, power: int = 1) -> "DPPoly":
        if power > shape.D:
            raise ValueError("monomial beyond truncation degree")
        e = np.zeros((1, shape.nvars), dtype=INT)
        e[0, shape.var_index(label)] = power
        return DPPoly(shape, ring, 1, e, ring.one_vec().reshape(1, 1, 1, ring.vec_shape[0]), ring.N)

    @staticmethod
    def from_terms(shape: DPShape, ring: BaseRing, terms: dict, rdim: int = 1, prec: int | None = None) -> "DPPoly":
        """terms maps exponent tuples to Matrix / RingElt / int coefficients."""
        if not terms:
            return DPPoly.zero(shape, ring, rdim, prec)
        exps, coefs = [], []
        p = ring.N if prec is None else prec
        for mono, c in terms.items():
            exps.append(tuple(mono))
            if isinstance(c, (int, np.integer)):
                c = ring.integer(int(c))
            if isinstance(c, RingElt):
                coefs.append(c.vec.reshape(1, 1, ring.vec_shape[0]))
                p = min(p, c.prec)
            else:
                coefs.append(c.arr)
                p = min(p, c.prec)
        return DPPoly(shape, ring, rdim, np.array(exps), np.stack(coefs), p)

    # -- views ----------------------------------------------------------------
    def terms(self):
        for k in range(len(self.exps)):
            yield tuple(int(x) for x in self.exps[k]), Matrix(self.ring, self.coefs[k], self.prec)

    def coefficient(self, mono) -> Matrix:
        mono = np.asarray(mono, dtype=INT)
        for k in range(len(self.exps)):
            if np.array_equal(self.exps[k], mono):
                return Matrix(self.ring, self.coefs[k], self.prec)
        return Matrix.zeros(self.ring, self.rdim, self.rdim, self.prec)

    def max_degree(self) -> int:
        return int(self.exps.sum(axis=1).max()) if len(self.exps) else 0

    # -- arithmetic -------------------------------------------------------------
    def _promote(self, rdim: int) -> "DPPoly":
        if self.rdim == rdim:
            return self
        if self.rdim != 1:
            raise ValueError("block sizes do not match")
        eye = np.eye(rdim, dtype=INT)
        coefs = np.einsum("ab,mx->mabx", eye, self.coefs[:, 0, 0, :])
        return DPPoly(self.shape, self.ring, rdim, self.exps, coefs, self.prec, self.truncated)

    def __add__(self, other: "DPPoly") -> "DPPoly":
        a, b = _match_blocks(self, other)
        exps = np.concatenate([a.exps, b.exps])
        coefs = np.concatenate([a.coefs, b.coefs])
        if len(exps):
            codes = _kernels._encode(exps, a.shape.D)
            uniq, inv = np.unique(codes, return_inverse=True)
            out = np.zeros((len(uniq),) + coefs.shape[1:], dtype=INT)
            np.add.at(out, inv, coefs)
            exps = _kernels._decode(uniq.astype(INT), a.shape.nvars, a.shape.D)
            coefs = out % a.ring.pN
        return DPPoly(a.shape, a.ring, a.rdim, exps, coefs, min(a.prec, b.prec), a.truncated or b.truncated)

    def __neg__(self) -> "DPPoly":
        return DPPoly(self.shape, self.ring, self.rdim, self.exps, (-self.coefs) % self.ring.pN, self.prec, self.truncated)

    def __sub__(self, other: "DPPoly") -> "DPPoly":
        return self + (-other)

    def __mul__(self, other: "DPPoly") -> "DPPoly":
        a, b = _match_blocks(self, other)
        if not len(a.exps) or not len(b.exps):
            return DPPoly.zero(a.shape, a.ring, a.rdim, min(a.prec, b.prec))
        binom = _binom_table_cached(a.shape.D, a.ring.pN)
        exps, coefs, trunc = _kernels.dp_mul(
            a.exps, a.coefs, b.exps, b.coefs, a.shape.D, binom, a.ring.S, a.ring.pN
        )
        return DPPoly(a.shape, a.ring, a.rdim, exps, coefs, min(a.prec, b.prec), a.truncated or b.truncated or trunc)

    def scale(self, c) -> "DPPoly":
        return DPPoly.constant(self.shape, self.ring, c) * self

    def eq(self, other: "DPPoly") -> bool:
        return (self - other).is_zero()

    def is_zero(self) -> bool:
        pm = self.ring.p ** min(self.prec, self.ring.N)
        return not np.any(self.coefs % pm)

    def nonzero_degrees(self) -> list[int]:
        pm = self.ring.p ** min(self.prec, self.ring.N)
        if not len(self.exps):
            return []
        degs = self.exps.sum(axis=1)
        keep = (self.coefs % pm).reshape(len(self.coefs), -1).any(axis=1)
        return sorted({int(x) for x in degs[keep]})

    def dp_power(self, k: int) -> "DPPoly":
        """k-th divided power gamma_k(f) for f with zero constant term."""
        if k == 0:
            return DPPoly.one(self.shape, self.ring, self.rdim)
        if len(self.exps) and not np.all(self.exps.sum(axis=1) >= 1):
            raise ValueError("divided powers need a zero constant term")
        # gamma_k(t_1 + ... + t_s) = sum_{k_1+..+k_s=k} prod_i gamma_{k_i}(t_i)
        table = [DPPoly.one(self.shape, self.ring, self.rdim)] + [
            DPPoly.zero(self.shape, self.ring, self.rdim) for _ in range(k)
        ]
        for idx in range(len(self.exps)):
            mono = self.exps[idx]
            coef = Matrix(self.ring, self.coefs[idx], self.prec)
            gammas = [DPPoly.one(self.shape, self.ring, self.rdim)]
            for i in range(1, k + 1):
                g = _mono_divided_power(self.shape, self.ring, mono, i, coef)
                gammas.append(g if g is not None else DPPoly.zero(self.shape, self.ring, self.rdim))
            table = [
                _sum_polys([table[j - i] * gammas[i] for i in range(j + 1)], self.shape, self.ring, self.rdim)
                for j in range(k + 1)
            ]
        return table[k]

    # -- canonical text form ----------------------------------------------------
    def canonical_lines(self) -> list[str]:
        if not len(self.exps):
            return []
        keys = tuple(self.exps[:, v] for v in range(self.shape.nvars - 1, -1, -1)) + (self.exps.sum(axis=1),)
        order = np.lexsort(keys)
        names = [
            f"Y{l[1]}_{l[2]}" if l[0] == "Y" else f"X{l[1]}"
            for l in self.shape.variables
        ]
        lines = []
        for k in order:
            mono = self.exps[k]
            ms = " ".join(f"{names[v]}^[{int(mono[v])}]" for v in range(len(names)) if mono[v]) or "1"
            ent = " ; ".join(
                ",".join(str(int(c)) for c in self.coefs[k][i, j])
                for i in range(self.rdim)
                for j in range(self.rdim)
            )
            lines.append(f"{ms} :: {ent}")
        return lines


def _match_blocks(a: DPPoly, b: DPPoly) -> tuple[DPPoly, DPPoly]:
    if a.shape != b.shape:
        raise ValueError("polynomials live on different shapes")
    if a.rdim != b.rdim:
        r = max(a.rdim, b.rdim)
        a, b = a._promote(r), b._promote(r)
    return a, b


def _sum_polys(polys, shape, ring, rdim) -> DPPoly:
    acc = DPPoly.zero(shape, ring, rdim)
    for q in polys:
        acc = acc + q
    return acc


@lru_cache(maxsize=32)
def _binom_table_cached(D: int, pN: int):
    return _kernels.binom_table(D, pN)


def _mono_divided_power(shape: DPShape, ring: BaseRing, mono, k: int, coef: Matrix) -> DPPoly | None:
    """gamma_k(coef * mono) for a single dp-monomial term; None once beyond D."""
    mono = np.asarray(mono, dtype=INT)
    new = mono * k
    if new.sum() > shape.D:
        return None
    num = 1
    for j in mono:
        j = int(j)
        if j:
            num *= math.factorial(k * j) // (math.factorial(j) ** k)
    exact = num // math.factorial(k)
    ck = Matrix.identity(ring, coef.rows, coef.prec)
    for _ in range(k):
        ck = ck @ coef
    ck = ck.scale(exact % ring.pN)
    return DPPoly(shape, ring, coef.rows, new.reshape(1, -1), ck.arr[None], ck.prec)


# ---------------------------------------------------------------------------
# cosimplicial structure
# ---------------------------------------------------------------------------

_RING_REGISTRY: dict[int, BaseRing] = {}


def _ring_key(ring: BaseRing) -> int:
    key = id(ring)
    _RING_REGISTRY[key] = ring
    return key


@lru_cache(maxsize=512)
def _geom_inverse_power_cached(ring_key: int, g: int, kind: str, n: int, d: int, D: int) -> DPPoly:
    """(1 - a X_1)^(-g) as a truncated dp-polynomial (arith shapes)."""
    ring = _RING_REGISTRY[ring_key]
    shape = DPShape(kind, n, d, D)
    x1 = shape.var_index(("X", 1))
    terms = {}
    apow = ring.one()
    for m in range(D + 1):
        if m:
            apow = apow * ring.a
        c = math.comb(g + m - 1, m) * math.factorial(m) if g > 0 else (1 if m == 0 else 0)
        c %= ring.pN
        if c == 0:
            continue
        mono = [0] * shape.nvars
        mono[x1] = m
        terms[tuple(mono)] = apow * c
    return DPPoly.from_terms(shape, ring, terms)


def geom_inverse_power(ring: BaseRing, g: int, shape: DPShape) -> DPPoly:
    return _geom_inverse_power_cached(_ring_key(ring), g, shape.kind, shape.n, shape.d, shape.D)


def _difference_power(shape: DPShape, ring: BaseRing, lab_a: Label, lab_b: Label, k: int) -> DPPoly:
    """(A - B)^[k] = sum_{i+j=k} (-1)^j A^[i] B^[j]."""
    ia, ib = shape.var_index(lab_a), shape.var_index(lab_b)
    exps = np.zeros((k + 1, shape.nvars), dtype=INT)
    coefs = np.zeros((k + 1, 1, 1, ring.vec_shape[0]), dtype=INT)
    one = ring.one_vec()
    for j in range(k + 1):
        exps[j, ia] = k - j
        exps[j, ib] = j
        coefs[j, 0, 0] = one if j % 2 == 0 else (-one) % ring.pN
    return DPPoly(shape, ring, 1, exps, coefs, ring.N)


def _remap_poly(f: DPPoly, shape_out: DPShape, targets: list[int | None]) -> DPPoly:
    """Apply a variable relabeling; merging variables multiplies by the
    divided-power binomial (multinomial) factor."""
    ring = f.ring
    n_in = len(f.exps)
    if n_in == 0:
        return DPPoly.zero(shape_out, ring, f.rdim, f.prec)
    keep = np.ones(n_in, dtype=bool)
    out = np.zeros((n_in, shape_out.nvars), dtype=INT)
    factor = np.ones(n_in, dtype=object)
    for v, tgt in enumerate(targets):
        col = f.exps[:, v]
        if tgt is None:
            keep &= col == 0
        else:
            prev = out[:, tgt].copy()
            out[:, tgt] += col
            merged = (prev > 0) & (col > 0)
            if merged.any():
                for idx in np.nonzero(merged)[0]:
                    factor[idx] *= math.comb(int(prev[idx] + col[idx]), int(col[idx]))
    coefs = f.coefs.copy()
    for idx in range(n_in):
        if keep[idx] and factor[idx] != 1:
            coefs[idx] = (coefs[idx] * (int(factor[idx]) % ring.pN)) % ring.pN
    return DPPoly(shape_out, ring, f.rdim, out[keep], coefs[keep], f.prec, f.truncated)


def face(i: int, f: DPPoly, drop_geometric_factor: bool = False) -> DPPoly:
    """Cosimplicial face p_i from level n to level n+1."""
    shape = f.shape
    n = shape.n
    if not 0 <= i <= n + 1:
        raise ValueError(f"face index {i} out of range for level {n}")
    out_shape = shape.at_level(n + 1)
    if i >= 1:

        def mapping(lab):
            if lab[0] == "X":
                return ("X", lab[1] + 1) if i <= lab[1] else lab
            return ("Y", lab[1], lab[2] + 1) if i <= lab[2] else lab

        targets = [out_shape.var_index(mapping(lab)) for lab in shape.variables]
        return _remap_poly(f, out_shape, targets)

    ring = f.ring
    acc = DPPoly.zero(out_shape, ring, f.rdim, f.prec)
    arith = shape.kind == "arith"
    for idx in range(len(f.exps)):
        mono = f.exps[idx]
        coef = Matrix(ring, f.coefs[idx], f.prec)
        term = DPPoly.constant(out_shape, ring, coef)
        for v, lab in enumerate(shape.variables):
            k = int(mono[v])
            if k == 0:
                continue
            if lab[0] == "X":
                diff = _difference_power(out_shape, ring, ("X", lab[1] + 1), ("X", 1), k)
            else:
                diff = _difference_power(out_shape, ring, ("Y", lab[1], lab[2] + 1), ("Y", lab[1], 1), k)
            term = term * diff
        if arith and not drop_geometric_factor:
            g = int(mono.sum())
            if g:
                term = term * geom_inverse_power(ring, g, out_shape)
        acc = acc + term
    return acc


def degeneracy(i: int, f: DPPoly) -> DPPoly:
    """Cosimplicial degeneracy sigma_i from level n+1 to level n."""
    shape = f.shape
    n = shape.n - 1
    if shape.n < 1 or not 0 <= i <= n:
        raise ValueError(f"degeneracy index {i} out of range for level {shape.n}")
    out_shape = shape.at_level(n)

    def mapping(lab):
        if lab[0] == "X":
            j = lab[1]
            if i == 0 and j == 1:
                return None
            return ("X", j - 1) if i < j else lab
        j = lab[2]
        if i == 0 and j == 1:
            return None
        return ("Y", lab[1], j - 1) if i < j else lab

    targets = [None if mapping(lab) is None else out_shape.var_index(mapping(lab)) for lab in shape.variables]
    return _remap_poly(f, out_shape, targets)


def face_arith(i: int, f: DPPoly) -> DPPoly:
    if f.shape.kind != "arith":
        raise ValueError("face_arith needs an arith-shaped polynomial")
    return face(i, f)


def face_geo(i: int, f: DPPoly) -> DPPoly:
    if f.shape.kind != "geo":
        raise ValueError("face_geo needs a geo-shaped polynomial")
    return face(i, f)


degeneracy_arith = degeneracy
degeneracy_geo = degeneracy


# ---------------------------------------------------------------------------
# simplicial-identity verification
# ---------------------------------------------------------------------------


@dataclass
class IdentityReport:
    ok: bool
    failures: list

    def __bool__(self):
        return self.ok


def _probe_polys(shape: DPShape, ring: BaseRing, degree_limit: int) -> list[DPPoly]:
    labs = shape.variables
    polys = [DPPoly.variable(shape, ring, lab) for lab in labs]
    if degree_limit >= 2 and shape.D >= 2:
        polys.extend(DPPoly.variable(shape, ring, lab, 2) for lab in labs)
        for v1 in range(len(labs)):
            for v2 in range(v1 + 1, len(labs)):
                polys.append(DPPoly.variable(shape, ring, labs[v1]) * DPPoly.variable(shape, ring, labs[v2]))
    if degree_limit >= 3 and shape.D >= 3 and labs:
        polys.append(DPPoly.variable(shape, ring, labs[0], 3))
    return polys


def verify_simplicial_identities(
    kind: str,
    ring: BaseRing,
    d: int,
    n_max: int,
    D: int,
    degree_limit: int = 2,
    corrupt_p0: bool = False,
) -> IdentityReport:
    """Check the cosimplicial identities on monomial probes of degree <= degree_limit.

    ``corrupt_p0`` drops the geometric-series factor from p_0 on level-1
    input (arith shapes).  Dropping it everywhere would produce a different
    but still consistent cosimplicial ring; the level-local corruption is
    what a wrong p_0 convention looks like and must be caught.
    """
    failures = []

    def p(i, g):
        return face(i, g, drop_geometric_factor=corrupt_p0 and g.shape.n == 1)

    for n in range(1, n_max + 1):
        shape = DPShape(kind, n, d, D)
        if shape.nvars == 0:
            continue
        for f in _probe_polys(shape, ring, degree_limit):
            mono = tuple(int(x) for x in f.exps[0]) if len(f.exps) else ()
            # p_j p_i = p_i p_{j-1} for i < j   (levels n -> n+2)
            for i in range(0, n + 2):
                for j in range(i + 1, n + 3):
                    lhs = p(j, p(i, f))
                    rhs = p(i, p(j - 1, f))
                    if not lhs.eq(rhs):
                        failures.append(("p_j p_i = p_i p_{j-1}", i, j, n, mono))
            # sigma_j sigma_i = sigma_i sigma_{j+1} for i <= j   (levels n -> n-2)
            if n >= 2:
                for i in range(0, n):
                    for j in range(i, n - 1):
                        lhs = degeneracy(j, degeneracy(i, f))
                        rhs = degeneracy(i, degeneracy(j + 1, f))
                        if not lhs.eq(rhs):
                            failures.append(("s_j s_i = s_i s_{j+1}", i, j, n, mono))
            # mixed identities   (levels n -> n)
            for i in range(0, n + 2):
                for j in range(0, n + 1):
                    lhs = degeneracy(j, p(i, f))
                    if i < j:
                        rhs = p(i, degeneracy(j - 1, f))
                    elif i in (j, j + 1):
                        rhs = f
                    else:
                        rhs = p(i - 1, degeneracy(j, f))
                    if not lhs.eq(rhs):
                        failures.append(("s_j p_i mixed", i, j, n, mono))
    return IdentityReport(not failures, failures)
