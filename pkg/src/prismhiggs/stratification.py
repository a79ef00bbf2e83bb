"""Stratifications of Hodge-Tate type over the level-1 divided-power ring.

From an enhanced Higgs module (H, theta, phi) the stratification matrix is

    eps = sum_{k, n} phi_{k,n} X_1^[k] Y_1^[n],
    phi_{k,n} = prod_s theta_s^{n_s} . prod_{j<k} (phi + j a)
              = prod_{j<k} (phi + (j+|n|) a) . prod_s theta_s^{n_s},

and the two product orders must agree; the cocycle condition compares
p_2^*(eps) p_0^*(eps) with p_1^*(eps) over the level-2 ring together with
sigma_0^*(eps) = id.  Raw coefficient families (not derived from a module)
are supported so that broken inputs can be fed to the checker and so that
extraction phi = phi_{1,0}, theta_i = phi_{0,1_i} has something to act on.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dp import DPPoly, DPShape, degeneracy, face, geom_inverse_power
from .higgs import CheckReport, EnhancedHiggsModule, check_enhanced, topological_nilpotence_index
from .matrices import Matrix, binomial_product_coefficients
from .rings import BaseRing


@dataclass
class Stratification:
    ring: BaseRing
    rank: int
    d: int
    D: int
    coeffs: dict  # (k, n_tuple) -> Matrix; absent means zero
    source: EnhancedHiggsModule | None = None

    def eps(self) -> DPPoly:
        shape = DPShape("arith", 1, self.d, self.D)
        terms = {}
        for (k, n), mat in self.coeffs.items():
            if k + sum(n) > self.D:
                continue
            mono = [0] * shape.nvars
            mono[shape.var_index(("X", 1))] = k
            for s in range(self.d):
                if n[s]:
                    mono[shape.var_index(("Y", s + 1, 1))] = n[s]
            terms[tuple(mono)] = mat
        return DPPoly.from_terms(shape, self.ring, terms, rdim=self.rank)

    def coefficient(self, k: int, n) -> Matrix:
        return self.coeffs.get((k, tuple(n)), Matrix.zeros(self.ring, self.rank, self.rank))

    def prec(self) -> int:
        return min([m.prec for m in self.coeffs.values()], default=self.ring.N)


def _index_range(d: int, D: int):
    """All (k, n) with k + |n| <= D."""
    for k in range(D + 1):
        for n in itertools.product(*(range(D + 1 - k) for _ in range(d))):
            if k + sum(n) <= D:
                yield k, tuple(n)


def _theta_power(ring, rank, theta, n: tuple, prec) -> Matrix:
    out = Matrix.identity(ring, rank, prec)
    for s, ns in enumerate(n):
        for _ in range(ns):
            out = out @ theta[s]
    return out


def family_from_operators(
    ring: BaseRing, rank: int, d: int, theta: list[Matrix], phi: Matrix, kmax: int, nmax: int
) -> dict:
    """phi_{k,n} = theta^n . prod_{j<k}(phi + j a) for k <= kmax, n_s <= nmax.

    No relations between the operators are assumed; this is how raw (and in
    particular deliberately broken) families are produced.
    """
    prec = min([phi.prec] + [t.prec for t in theta])
    prods = binomial_product_coefficients(phi, ring.a, kmax)
    coeffs = {}
    for n in itertools.product(*(range(nmax + 1) for _ in range(d))):
        tp = _theta_power(ring, rank, theta, n, prec)
        if tp.is_zero():
            continue
        for k in range(len(prods)):
            mat = tp @ prods[k]
            if not mat.is_zero():
                coeffs[(k, n)] = mat
    return coeffs


def build_stratification(m: EnhancedHiggsModule, D: int) -> Stratification:
    """Coefficients via both orders of the closed formula; they must agree."""
    rep = check_enhanced(m)
    if not rep.ok:
        raise ValueError(f"module is not enhanced: {rep.failures[0][0]}")
    a = m.a
    kmax = topological_nilpotence_index(m) + 1
    coeffs = family_from_operators(m.ring, m.rank, m.d, m.theta, m.phi, max(kmax, D + 1), max(m.rank, D))
    # cross-check the second product order on the indices that survive
    for (k, n), first in coeffs.items():
        theta_pow = _theta_power(m.ring, m.rank, m.theta, n, m.prec())
        right = Matrix.identity(m.ring, m.rank, m.prec())
        for j in range(k):
            right = right @ m.phi.add_scalar_identity(a * (j + sum(n)))
        second = right @ theta_pow
        if not first.eq(second):
            raise ValueError(f"the two product orders disagree at (k,n)=({k},{n})")
    return Stratification(m.ring, m.rank, m.d, D, coeffs, source=m)


def raw_stratification(ring: BaseRing, rank: int, d: int, D: int, coeffs: dict) -> Stratification:
    out = {}
    for (k, n), mat in coeffs.items():
        out[(int(k), tuple(int(x) for x in n))] = mat
    ident = out.get((0, (0,) * d))
    if ident is None or not ident.eq(Matrix.identity(ring, rank)):
        raise ValueError("phi_{0,0} must be the identity")
    return Stratification(ring, rank, d, D, out)


@dataclass
class CocycleReport:
    ok: bool
    degree_status: dict = field(default_factory=dict)  # degree -> 'pass'|'fail'
    witness: tuple | None = None  # (monomial exponents, mismatch Matrix)
    sigma_ok: bool = True
    prec: int = 0
    difference: DPPoly | None = None

    def __bool__(self):
        return self.ok


def check_cocycle(s: Stratification, D: int | None = None, keep_difference: bool = False) -> CocycleReport:
    """p_2^*(eps) p_0^*(eps) = p_1^*(eps) coefficientwise up to total degree
    min(D, s.D), plus sigma_0^*(eps) = id.  Mismatch is a report, not an error."""
    D_eff = s.D if D is None else min(D, s.D)
    eps = s.eps()
    p0 = face(0, eps)
    p1 = face(1, eps)
    p2 = face(2, eps)
    comp = p2 * p0
    diff = comp - p1
    sigma = degeneracy(0, eps)
    ident = DPPoly.constant(DPShape("arith", 0, s.d, s.D), s.ring, Matrix.identity(s.ring, s.rank))
    sigma_ok = sigma.eq(ident)
    bad_degrees = set(diff.nonzero_degrees())
    degree_status = {deg: ("fail" if deg in bad_degrees else "pass") for deg in range(D_eff + 1)}
    witness = None
    if bad_degrees:
        first = min(bad_degrees)
        pm = s.ring.p ** min(diff.prec, s.ring.N)
        for mono, mat in diff.terms():
            if sum(mono) == first and np.any(mat.arr % pm):
                witness = (mono, mat)
                break
    ok = sigma_ok and not any(v == "fail" for deg, v in degree_status.items() if deg <= D_eff)
    return CocycleReport(ok, degree_status, witness, sigma_ok, diff.prec,
                         diff if keep_difference else None)


def extract(s: Stratification) -> tuple[list[Matrix], Matrix]:
    """(theta_i = phi_{0,1_i}, phi = phi_{1,0}); requires phi_{0,0} = id."""
    ident = s.coefficient(0, (0,) * s.d)
    if not ident.eq(Matrix.identity(s.ring, s.rank)):
        raise ValueError("phi_{0,0} is not the identity")
    theta = []
    for i in range(s.d):
        unit = tuple(1 if j == i else 0 for j in range(s.d))
        theta.append(s.coefficient(0, unit))
    phi = s.coefficient(1, (0,) * s.d)
    return theta, phi


def rebuild_from_extract(s: Stratification) -> Stratification:
    theta, phi = extract(s)
    m = EnhancedHiggsModule(s.ring, s.rank, s.d, theta, phi)
    return build_stratification(m, s.D)


# ---------------------------------------------------------------------------
# the coefficient identity (independence of X and Y)
# ---------------------------------------------------------------------------


def _binom_tuple(a: tuple, b: tuple) -> int:
    out = 1
    for x, y in zip(a, b):
        out *= math.comb(x + y, x)
    return out


def verify_technique_equivalence(s: Stratification, D: int | None = None) -> CheckReport:
    """Substitute the coefficient family into its own defining double sum.

    For every (k, n) with k + |n| <= D the polynomial

      sum_{i,j,l,m} phi_{i,l} phi_{j+k,m+n} (1-aX)^(-j-k-|m|-|n|) (-1)^(j+|m|)
                    binom(i+j, i) binom(l+m, l) X^[i+j] Y^[l+m]

    must equal the constant phi_{k,n}: all X- and Y-dependence has to cancel.
    The family is treated as complete (absent indices are zero), so for
    module-built stratifications the tail indices carry the vanished
    products and the identity is exact at precision.
    """
    D_eff = s.D if D is None else min(D, s.D)
    ring = s.ring
    shape = DPShape("arith", 1, s.d, D_eff)
    keys = list(s.coeffs.keys())
    kbound = max((k for k, _ in keys), default=0)
    nbound = [max((n[t] for _, n in keys), default=0) for t in range(s.d)]
    failures = []
    idx_x = shape.var_index(("X", 1))
    for k, n in _index_range(s.d, D_eff):
        acc = DPPoly.zero(shape, ring, s.rank)
        for i in range(D_eff + 1):
            for j in range(kbound - k + 1):
                if i + j > D_eff:
                    continue
                for l in itertools.product(*(range(D_eff + 1) for _ in range(s.d))):
                    if i + j + sum(l) > D_eff:
                        continue
                    for mm in itertools.product(
                        *(range(nbound[t] - n[t] + 1) for t in range(s.d))
                    ):
                        if i + j + sum(x + y for x, y in zip(l, mm)) > D_eff:
                            continue
                        A = s.coeffs.get((i, l))
                        B = s.coeffs.get((j + k, tuple(x + y for x, y in zip(mm, n))))
                        if A is None or B is None:
                            continue
                        coef = A @ B
                        sign = (-1) ** (j + sum(mm))
                        factor = (math.comb(i + j, i) * _binom_tuple(l, mm) * sign) % ring.pN
                        mono = [0] * shape.nvars
                        mono[idx_x] = i + j
                        for t in range(s.d):
                            if l[t] + mm[t]:
                                mono[shape.var_index(("Y", t + 1, 1))] = l[t] + mm[t]
                        term = DPPoly.from_terms(shape, ring, {tuple(mono): coef.scale(factor)}, rdim=s.rank)
                        g = j + k + sum(mm) + sum(n)
                        if g:
                            term = term * geom_inverse_power(ring, g, shape)
                        acc = acc + term
        expected = DPPoly.constant(shape, ring, s.coefficient(k, n))
        if not acc.eq(expected):
            failures.append(("coefficient identity fails", (k, n)))
    return CheckReport(not failures, failures)


def commutator_defect_oracle(m_like, i: int) -> Matrix:
    """-([phi, theta_i] + a theta_i): the predicted X_1 Y_{i,1} mismatch of the
    cocycle difference for a raw family built from the closed formula.

    Derived by expanding the composite to total degree 2 by hand:
    the X_1 Y_{i,1} coefficient of p_2^* p_0^* - p_1^* is
    2 phi_{1,1_i} - phi_{1,0} phi_{0,1_i} - phi_{0,1_i} phi_{1,0} - a phi_{0,1_i},
    which for phi_{1,1_i} = theta_i phi collapses to -([phi,theta_i] + a theta_i).
    """
    theta_i, phi, a = m_like.theta[i], m_like.phi, m_like.ring.a
    return -(phi.commutator(theta_i) + theta_i.scale(a))
