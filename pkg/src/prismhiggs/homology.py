"""Homological algebra over the finite chain ring O_K/p^N.

O_K/p^N is local with principal maximal ideal (pi) and pi^(eN) = 0, so
Smith normal form works by valuation pivoting: a minimal-valuation entry
factors as pi^v * unit, and the exact quotients b / pivot are well defined
up to the precision that multiplying back by the pivot restores.  Every
module invariant below is therefore exact mod p^N.

Cohomology profiles list elementary divisors as pi-valuations, with e*N
standing for a free summand at working precision.  The "rational" view
needed to model p-inverted statements keeps divisors of valuation >= guard
(they are indistinguishable from free summands at that precision) and
discards smaller torsion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matrices import Matrix
from .rings import INT, BaseRing, RingError


class NotChainRingError(RingError):
    pass


# ---------------------------------------------------------------------------
# chain complexes
# ---------------------------------------------------------------------------


class ChainComplex:
    """Finite complex of free modules in degrees 0..len(ranks)-1.

    ``diffs[q]`` maps degree q to degree q+1 and has shape
    (ranks[q+1], ranks[q]); consecutive composites must vanish at the floor.
    """

    def __init__(self, ring: BaseRing, ranks: list[int], diffs: list[Matrix], check: bool = True):
        self.ring = ring
        self.ranks = list(ranks)
        self.diffs = list(diffs)
        if len(self.diffs) != max(len(self.ranks) - 1, 0):
            raise ValueError("need one differential per adjacent pair of terms")
        for q, dq in enumerate(self.diffs):
            if dq.rows != self.ranks[q + 1] or dq.cols != self.ranks[q]:
                raise ValueError(f"differential {q} has shape {dq.rows}x{dq.cols}")
        if check:
            for q in range(len(self.diffs) - 1):
                comp = self.diffs[q + 1] @ self.diffs[q]
                if not comp.is_zero():
                    raise ValueError(f"d^2 != 0 between degrees {q} and {q + 2}")

    @property
    def length(self) -> int:
        return len(self.ranks) - 1

    def shift_report(self):
        return {"ranks": self.ranks}


# ---------------------------------------------------------------------------
# Smith normal form over the chain ring
# ---------------------------------------------------------------------------


@dataclass
class SNFResult:
    divisors: list[int]  # pi-valuations of the nonzero diagonal entries, ascending
    U: Matrix
    V: Matrix
    D: Matrix
    work_prec: int

    @property
    def rank_at_precision(self) -> int:
        return len(self.divisors)


def _row_scale(arr, i, svec, ring):
    arr[i] = ring.mul_vec(arr[i], svec)


def snf(A: Matrix) -> SNFResult:
    """U A V = D with unit-determinant transforms, divisors by valuation pivoting."""
    ring = A.ring
    if not isinstance(ring, BaseRing):
        raise NotChainRingError(
            "Smith normal form is implemented over the base chain ring; "
            "specialize or embed matrices first"
        )
    prec = min(A.prec, ring.N)
    cap = ring.e * prec
    pmod = ring.p ** prec
    rows, cols = A.rows, A.cols
    work = (A.arr % pmod).copy()
    U = Matrix.identity(ring, rows, prec).arr.copy()
    V = Matrix.identity(ring, cols, prec).arr.copy()

    def val(vec):
        return ring.val_pi(vec, prec)

    t = 0
    divisors = []
    while t < min(rows, cols):
        best = None
        best_v = cap
        for i in range(t, rows):
            for j in range(t, cols):
                v = val(work[i, j])
                if v < best_v:
                    best_v, best = v, (i, j)
                    if v == 0:
                        break
            if best_v == 0:
                break
        if best is None or best_v >= cap:
            break
        bi, bj = best
        if bi != t:
            work[[t, bi]] = work[[bi, t]]
            U[[t, bi]] = U[[bi, t]]
        if bj != t:
            work[:, [t, bj]] = work[:, [bj, t]]
            V[:, [t, bj]] = V[:, [bj, t]]
        v = best_v
        unit = ring.unit_part(work[t, t], v)
        uinv = ring.invert_vec(unit)
        # scale row t by the unit inverse so the pivot becomes exactly pi^v
        work[t] = ring.mul_vec(work[t], uinv) % pmod
        U[t] = ring.mul_vec(U[t], uinv)
        for i in range(t + 1, rows):
            if not np.any(work[i, t] % pmod):
                continue
            q = ring.unit_part(work[i, t], v)  # work[i,t] / pi^v, exact since v is minimal
            work[i] = (work[i] - ring.mul_vec(q[None, :], work[t])) % pmod
            U[i] = (U[i] - ring.mul_vec(q[None, :], U[t])) % ring.pN
        for j in range(t + 1, cols):
            if not np.any(work[t, j] % pmod):
                continue
            q = ring.unit_part(work[t, j], v)
            work[:, j] = (work[:, j] - ring.mul_vec(q[None, :], work[:, t])) % pmod
            V[:, j] = (V[:, j] - ring.mul_vec(q[None, :], V[:, t])) % ring.pN
        divisors.append(v)
        t += 1
    D = Matrix(ring, work % pmod, prec)
    return SNFResult(divisors, Matrix(ring, U, prec), Matrix(ring, V, prec), D, prec)


# ---------------------------------------------------------------------------
# cohomology profiles
# ---------------------------------------------------------------------------


@dataclass
class DegreeProfile:
    divisors: list[int]  # pi-valuations of H^q = (+) R/pi^v; v = e*prec marks free
    free_marker: int

    def rational_rank(self, guard_pi: int) -> int:
        return sum(1 for v in self.divisors if v >= guard_pi)

    def ambiguous(self, guard_pi: int) -> list[int]:
        return [v for v in self.divisors if guard_pi <= v < self.free_marker]


@dataclass
class CohomologyProfile:
    ring_label: str
    e: int
    prec: int
    guard_pi: int
    degrees: dict = field(default_factory=dict)

    def rational_ranks(self) -> list[int]:
        return [self.degrees[q].rational_rank(self.guard_pi) for q in sorted(self.degrees)]

    def divisor_lists(self) -> dict:
        return {q: list(self.degrees[q].divisors) for q in sorted(self.degrees)}


def _kernel_torsion_exponents(ring: BaseRing, res: SNFResult, ncols: int, cap: int):
    """Describe ker(A) in SNF coordinates: coordinate i is pi^(cap-a_i) R for
    i < len(divisors) (torsion of size a_i) and free beyond."""
    exps = []
    for a in res.divisors:
        exps.append(a)  # t-coordinate ranges over R/pi^a
    exps.extend(cap for _ in range(ncols - len(res.divisors)))  # free coordinates
    return exps


def cohomology(cx: ChainComplex, guard: float | None = None) -> CohomologyProfile:
    """Elementary-divisor profile of H^q = ker d^q / im d^(q-1) per degree.

    ``guard`` is in p-adic units (default N/2) and is scaled by e internally.
    """
    ring = cx.ring
    prec = min([d.prec for d in cx.diffs], default=ring.N)
    cap = ring.e * prec
    guard_pi = int(np.ceil(ring.e * (ring.N / 2 if guard is None else guard)))
    out = CohomologyProfile(ring.label, ring.e, prec, guard_pi)
    pmod = ring.p ** prec
    for q in range(len(cx.ranks)):
        nq = cx.ranks[q]
        if nq == 0:
            out.degrees[q] = DegreeProfile([], cap)
            continue
        A = cx.diffs[q] if q < len(cx.diffs) else Matrix.zeros(ring, 1, nq, prec)
        B = cx.diffs[q - 1] if q >= 1 else Matrix.zeros(ring, nq, 1, prec)
        resA = snf(A)
        s = len(resA.divisors)
        tor = resA.divisors  # kernel coordinate i < s is isomorphic to R/pi^(a_i)
        # im(B) in SNF coordinates of A: y = U_A-free; use x-coords via V_A^-1.
        # ker(A) = V_A . {y : y_i in ann(pi^(a_i))}; write y_i = pi^(cap-a_i) t_i.
        # Columns of V_A^{-1} B give y-coordinates of the image.
        # Rather than invert V_A we solve via the identity A = U^-1 D V^-1:
        # y = V^-1 x  <=>  x = V y, so express image columns x in terms of y by
        # Gaussian back-substitution... over a chain ring V is invertible, so
        # compute V^{-1} once by the same elimination machinery.
        Vinv = _invert_unimodular(resA.V)
        yB = Vinv @ B
        # y-rows i < s are constrained: the image must satisfy y_i divisible by
        # pi^(cap - a_i); divide to land in the torsion coordinate R/pi^(a_i).
        if yB.cols == 0:
            C = Matrix.zeros(ring, nq, 1, prec)
        else:
            t_rows = []
            for i in range(nq):
                row = yB.arr[i] % pmod
                if i < s:
                    shift = cap - tor[i]
                    row = np.stack([_exact_pi_div(ring, vec, shift, prec) for vec in row])
                t_rows.append(row)
            C = Matrix(ring, np.stack(t_rows), prec)
        # H^q = R^nq / (im columns + diag(pi^(a_i) on torsion coords))
        aug_cols = []
        for i in range(s):
            col = np.zeros((nq,) + ring.vec_shape, dtype=INT)
            col[i] = _pi_power_vec(ring, tor[i])
            aug_cols.append(col)
        if aug_cols:
            aug = np.stack(aug_cols, axis=1)
            M = Matrix(ring, np.concatenate([C.arr, aug], axis=1), prec)
        else:
            M = C
        resM = snf(M)
        divisors = [v for v in resM.divisors if v > 0]
        free = nq - len(resM.divisors)
        profile = [v for v in divisors] + [cap] * free
        out.degrees[q] = DegreeProfile(sorted(profile), cap)
    return out


def _pi_power_vec(ring: BaseRing, v: int):
    out = ring.one_vec()
    for _ in range(v):
        out = ring.mul_vec(out, ring.pi_vec)
    return out % ring.pN


def _exact_pi_div(ring: BaseRing, vec, shift: int, prec: int):
    x = np.asarray(vec, dtype=INT) % (ring.p ** prec)
    for _ in range(shift):
        x = ring.div_pi_vec(x)
    return x % (ring.p ** prec)


def _invert_unimodular(V: Matrix) -> Matrix:
    """Invert a matrix whose SNF has all divisors of valuation 0."""
    ring = V.ring
    prec = V.prec
    n = V.rows
    pmod = ring.p ** prec
    work = (V.arr % pmod).copy()
    inv = Matrix.identity(ring, n, prec).arr.copy()
    for t in range(n):
        piv = None
        for i in range(t, n):
            if ring.val_pi(work[i, t], prec) == 0:
                piv = i
                break
        if piv is None:
            raise NotChainRingError("matrix is not invertible at working precision")
        if piv != t:
            work[[t, piv]] = work[[piv, t]]
            inv[[t, piv]] = inv[[piv, t]]
        uinv = ring.invert_vec(work[t, t])
        work[t] = ring.mul_vec(work[t], uinv) % pmod
        inv[t] = ring.mul_vec(inv[t], uinv) % pmod
        for i in range(n):
            if i == t:
                continue
            q = work[i, t].copy()
            if not np.any(q % pmod):
                continue
            work[i] = (work[i] - ring.mul_vec(q[None, :], work[t])) % pmod
            inv[i] = (inv[i] - ring.mul_vec(q[None, :], inv[t])) % pmod
    return Matrix(ring, inv, prec)


# ---------------------------------------------------------------------------
# Koszul complexes
# ---------------------------------------------------------------------------


def koszul_complex(ops: list[Matrix], rank: int, ring: BaseRing, check: bool = True) -> ChainComplex:
    """Koszul complex of commuting operators on a free module of the given rank."""
    from itertools import combinations

    d = len(ops)
    subsets = [list(combinations(range(d), q)) for q in range(d + 1)]
    ranks = [rank * len(subsets[q]) for q in range(d + 1)]
    prec = min([op.prec for op in ops], default=ring.N)
    diffs = []
    for q in range(d):
        rows, cols = ranks[q + 1], ranks[q]
        arr = np.zeros((rows, cols) + ring.vec_shape, dtype=INT)
        tgt_index = {S: k for k, S in enumerate(subsets[q + 1])}
        for k, S in enumerate(subsets[q]):
            for i in range(d):
                if i in S:
                    continue
                T = tuple(sorted(S + (i,)))
                sign = (-1) ** T.index(i)
                blk = ops[i].arr if sign == 1 else (-ops[i].arr) % ring.pN
                r0 = tgt_index[T] * rank
                c0 = k * rank
                arr[r0 : r0 + rank, c0 : c0 + rank] = blk
        diffs.append(Matrix(ring, arr, prec))
    return ChainComplex(ring, ranks, diffs, check=check)


def koszul_group_cohomology(gammas: list[Matrix], rank: int, ring: BaseRing) -> ChainComplex:
    """Koszul complex on gamma_i - 1, computing Z_p^d-cohomology at this precision."""
    for i in range(len(gammas)):
        for j in range(i + 1, len(gammas)):
            if not gammas[i].commutator(gammas[j]).is_zero():
                raise ValueError("group generators must commute")
    ident = Matrix.identity(ring, rank)
    ops = [g - ident for g in gammas]
    return koszul_complex(ops, rank, ring)


# ---------------------------------------------------------------------------
# truncated Cech-Alexander complex
# ---------------------------------------------------------------------------


def _monomial_basis(shape) -> list[tuple]:
    import itertools

    out = []
    for mono in itertools.product(*(range(shape.D + 1) for _ in range(shape.nvars))):
        if sum(mono) <= shape.D:
            out.append(mono)
    out.sort(key=lambda m: (sum(m), m))
    return out


def cech_alexander(strat, n_max: int = 2, D: int | None = None) -> ChainComplex:
    """Cosimplicial module H (x) dp-ring, truncated at level n_max and degree D.

    The level-n term has basis (monomial of total degree <= D) x (module
    basis vector); the differential is the alternating face sum where p_i
    (i >= 1) acts through the ring face maps alone and p_0 additionally
    inserts the stratification matrix against the level-(n+1) variables
    X_1, Y_{s,1}.  The d^2 = 0 check in the ChainComplex constructor
    validates that p_0 convention together with the cocycle condition.
    """
    from .dp import DPPoly, DPShape, face

    ring = strat.ring
    rank = strat.rank
    D = strat.D if D is None else D
    shapes = [DPShape("arith", n, strat.d, D) for n in range(n_max + 2)]
    bases = [_monomial_basis(sh) for sh in shapes[: n_max + 1]]
    index = [{m: k for k, m in enumerate(b)} for b in bases]
    ranks = [rank * len(b) for b in bases]
    eps_at = {}

    def eps_poly(level: int) -> DPPoly:
        if level not in eps_at:
            sh = shapes[level]
            terms = {}
            for (k, n), mat in strat.coeffs.items():
                if k + sum(n) > D:
                    continue
                mono = [0] * sh.nvars
                mono[sh.var_index(("X", 1))] = k
                for s in range(strat.d):
                    if n[s]:
                        mono[sh.var_index(("Y", s + 1, 1))] = n[s]
                terms[tuple(mono)] = mat
            eps_at[level] = DPPoly.from_terms(sh, ring, terms, rdim=rank)
        return eps_at[level]

    prec = strat.prec()
    diffs = []
    for n in range(n_max):
        rows, cols = ranks[n + 1], ranks[n]
        arr = np.zeros((rows, cols) + ring.vec_shape, dtype=INT)
        src_shape = shapes[n]
        tgt_index = index[n + 1]
        for m_idx, mono in enumerate(bases[n]):
            mono_poly = DPPoly.from_terms(src_shape, ring, {mono: Matrix.identity(ring, 1)})
            for i in range(n + 2):
                img = face(i, mono_poly)
                sign = 1 if i % 2 == 0 else -1
                if i == 0:
                    full = eps_poly(n + 1) * img
                    for tmono, blk in full.terms():
                        if tmono not in tgt_index:
                            continue
                        r0 = tgt_index[tmono] * rank
                        c0 = m_idx * rank
                        add = blk.arr if sign == 1 else (-blk.arr) % ring.pN
                        arr[r0 : r0 + rank, c0 : c0 + rank] = (
                            arr[r0 : r0 + rank, c0 : c0 + rank] + add
                        ) % ring.pN
                else:
                    for tmono, blk in img.terms():
                        if tmono not in tgt_index:
                            continue
                        scal = blk.arr[0, 0]
                        r0 = tgt_index[tmono] * rank
                        c0 = m_idx * rank
                        for t in range(rank):
                            val = scal if sign == 1 else (-scal) % ring.pN
                            arr[r0 + t, c0 + t] = (arr[r0 + t, c0 + t] + val) % ring.pN
        diffs.append(Matrix(ring, arr, prec))
    return ChainComplex(ring, ranks, diffs)


# ---------------------------------------------------------------------------
# the comparison map from the fiber complex to the Cech-Alexander model
# ---------------------------------------------------------------------------


@dataclass
class RhoReport:
    ok: bool
    q: int
    degree_checked: int
    witness: int | None = None  # first failing divided-power degree
    prec: int = 0

    def __bool__(self):
        return self.ok


def rho_series(phi: Matrix, a, q: int, D: int, kmax: int) -> list[Matrix]:
    """F(X, phi + q a) as divided-power coefficients: the X^[k]-coefficient is
    prod_{i=1}^{k-1} (phi + q a + i a), integral with no divisions."""
    from .matrices import binomial_product_coefficients

    shifted = phi.add_scalar_identity(a * (q + 1))
    prods = binomial_product_coefficients(shifted, a, max(kmax, D))
    zero = Matrix.zeros(phi.ring, phi.rows, phi.rows, phi.prec)
    out = [zero]  # no X^[0]-term
    for k in range(1, D + 1):
        out.append(prods[k - 1] if k - 1 < len(prods) else zero)
    return out


def rho_map(m, q: int, D: int) -> RhoReport:
    """Check the commuting square (p_0 - p_1)(x) = F(X_1, phi+qa)((phi+qa) x).

    The left side is produced by the honest stratification-series route:
    the twist {-q} contributes the truncated geometric factor
    (1 - a X_1)^(-q) which multiplies the eps-series of phi through the
    dp kernel; the right side multiplies the shifted integral F-series by
    (phi + q a).  Equality degreewise <= D is exactly the coefficientwise
    statement 1 + X F(X, phi+qa) = (1 - a X_1)^(-(phi+qa)/a).
    """
    from .dp import DPPoly, DPShape, geom_inverse_power
    from .higgs import topological_nilpotence_index
    from .matrices import binomial_product_coefficients

    ring = m.ring
    a = m.a
    kmax = topological_nilpotence_index(m) + 1
    shape = DPShape("arith", 1, 0, D)
    prods = binomial_product_coefficients(m.phi, a, max(kmax, D))
    terms = {}
    for k in range(min(len(prods), D + 1)):
        terms[(k,)] = prods[k]
    eps_series = DPPoly.from_terms(shape, ring, terms, rdim=m.rank)
    lhs = eps_series
    if q:
        lhs = lhs * geom_inverse_power(ring, q, shape)
    lhs = lhs - DPPoly.constant(shape, ring, Matrix.identity(ring, m.rank, m.prec()))
    F = rho_series(m.phi, a, q, D, kmax)
    shifted = m.phi.add_scalar_identity(a * q)
    rhs_terms = {}
    for k in range(1, D + 1):
        rhs_terms[(k,)] = F[k] @ shifted
    rhs = DPPoly.from_terms(shape, ring, rhs_terms, rdim=m.rank)
    diff = lhs - rhs
    bad = diff.nonzero_degrees()
    return RhoReport(not bad, q, D, bad[0] if bad else None, diff.prec)
