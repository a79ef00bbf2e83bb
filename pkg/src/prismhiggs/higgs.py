"""Enhanced Higgs modules as explicit matrix data.

An enhanced Higgs module of rank r is (H, theta_1..theta_d, phi) with
commuting nilpotent theta_i, [phi, theta_i] = -a * theta_i for a = E'(pi),
and prod_{i<n} (phi + i*a) -> 0 p-adically.  The last condition is checked
at working precision: the partial products must vanish mod p^N within a
configurable number of factors (once zero they stay zero).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .homology import ChainComplex, koszul_complex
from .matrices import Matrix, binomial_product_coefficients
from .rings import INT, BaseRing, NonConvergenceError, Ring


@dataclass
class CheckReport:
    ok: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


@dataclass
class EnhancedHiggsModule:
    ring: Ring
    rank: int
    d: int
    theta: list[Matrix]
    phi: Matrix
    label: str = ""

    def __post_init__(self):
        if len(self.theta) != self.d:
            raise ValueError("need one theta per geometric direction")
        for th in self.theta + [self.phi]:
            if th.rows != self.rank or th.cols != self.rank:
                raise ValueError("operator size does not match the rank")

    @property
    def a(self):
        return self.ring.a

    def prec(self) -> int:
        return min([self.phi.prec] + [t.prec for t in self.theta])


def nilpotence_bound(m: EnhancedHiggsModule) -> int:
    # 4rN plus a prime-dependent margin: v_p(k!) reaches N only around
    # k = N p/(p-1), which for p = 5, N = 6, r = 1 already exceeds 4rN.
    return 4 * m.rank * m.ring.N + 2 * m.ring.p + 4


def check_enhanced(m: EnhancedHiggsModule, nilpotence_max: int | None = None) -> CheckReport:
    """The four defining identities, with the first violated one as witness."""
    failures = []
    a = m.a
    for i in range(m.d):
        for j in range(i + 1, m.d):
            c = m.theta[i].commutator(m.theta[j])
            if not c.is_zero():
                failures.append(("[theta_i,theta_j] != 0", (i, j), c))
    for i in range(m.d):
        defect = m.phi.commutator(m.theta[i]) + m.theta[i].scale(a)
        if not defect.is_zero():
            failures.append(("[phi,theta_i] != -a theta_i", i, defect))
    for i in range(m.d):
        power = Matrix.identity(m.ring, m.rank, m.theta[i].prec)
        for _ in range(m.rank):
            power = power @ m.theta[i]
        if not power.is_zero():
            failures.append(("theta_i not nilpotent of order <= rank", i, power))
    kmax = nilpotence_max if nilpotence_max is not None else nilpotence_bound(m)
    try:
        coeffs = binomial_product_coefficients(m.phi, a, kmax, require_zero_tail=True)
        _ = coeffs
    except NonConvergenceError as exc:
        failures.append(("prod (phi + i a) does not converge to 0", kmax, str(exc)))
    return CheckReport(not failures, failures)


def topological_nilpotence_index(m: EnhancedHiggsModule) -> int:
    coeffs = binomial_product_coefficients(m.phi, m.a, nilpotence_bound(m), require_zero_tail=True)
    return len(coeffs)


# ---------------------------------------------------------------------------
# complexes
# ---------------------------------------------------------------------------


def higgs_complex(m: EnhancedHiggsModule) -> ChainComplex:
    """Koszul complex of theta_1..theta_d on H."""
    if m.d == 0:
        return ChainComplex(m.ring, [m.rank], [])
    return koszul_complex(m.theta, m.rank, m.ring)


def enhanced_higgs_complex(m: EnhancedHiggsModule) -> ChainComplex:
    """Fiber of the Higgs complex along phi: total complex of the two-row
    diagram whose vertical map in column q is phi + q*a."""
    base = higgs_complex(m)
    ring = m.ring
    a = m.a
    d = m.d
    ranks = [base.ranks[0]] + [
        (base.ranks[q] if q <= d else 0) + base.ranks[q - 1] for q in range(1, d + 2)
    ]
    prec = m.prec()
    diffs = []
    for q in range(d + 1):
        rows = ranks[q + 1]
        cols = ranks[q]
        arr = np.zeros((rows, cols) + ring.vec_shape, dtype=INT)
        top_rows = base.ranks[q + 1] if q + 1 <= d else 0
        top_cols = base.ranks[q]
        if q < d:
            arr[:top_rows, :top_cols] = base.diffs[q].arr
        vert = _vertical_map(m, q)
        arr[top_rows : top_rows + base.ranks[q], :top_cols] = vert.arr
        if q >= 1:
            arr[top_rows:, top_cols:] = (-base.diffs[q - 1].arr) % ring.pN
        diffs.append(Matrix(ring, arr, prec))
    return ChainComplex(ring, ranks, diffs)


def _vertical_map(m: EnhancedHiggsModule, q: int) -> Matrix:
    """(phi + q a) acting diagonally on H tensor Lambda^q."""
    from itertools import combinations

    blocks = len(list(combinations(range(m.d), q)))
    op = m.phi.add_scalar_identity(m.a * q)
    ring = m.ring
    arr = np.zeros((m.rank * blocks, m.rank * blocks) + ring.vec_shape, dtype=INT)
    for b in range(blocks):
        arr[b * m.rank : (b + 1) * m.rank, b * m.rank : (b + 1) * m.rank] = op.arr
    return Matrix(ring, arr, op.prec)


# ---------------------------------------------------------------------------
# twists, tensor, dual
# ---------------------------------------------------------------------------


def bk_twist_module(n: int, ring: Ring) -> EnhancedHiggsModule:
    """Rank-1 twist: (R, 0, -n*a)."""
    phi = Matrix.identity(ring, 1).scale(ring.a * (-n))
    return EnhancedHiggsModule(ring, 1, 0, [], phi, label=f"twist({n})")


def twist(m: EnhancedHiggsModule, n: int) -> EnhancedHiggsModule:
    """Shift phi by -n*a, leaving the Higgs field untouched."""
    return EnhancedHiggsModule(
        m.ring, m.rank, m.d, list(m.theta),
        m.phi.add_scalar_identity(m.a * (-n)),
        label=f"{m.label}{{+{n}}}",
    )


def _pad_dim(m: EnhancedHiggsModule, d: int) -> EnhancedHiggsModule:
    if m.d == d:
        return m
    if m.d != 0:
        raise ValueError("tensor factors must share the geometric dimension")
    zero = Matrix.zeros(m.ring, m.rank, m.rank, m.prec())
    return EnhancedHiggsModule(m.ring, m.rank, d, [zero] * d, m.phi, label=m.label)


def tensor(m1: EnhancedHiggsModule, m2: EnhancedHiggsModule) -> EnhancedHiggsModule:
    if m1.ring is not m2.ring:
        raise ValueError("tensor factors must share the ring")
    d = max(m1.d, m2.d)
    m1, m2 = _pad_dim(m1, d), _pad_dim(m2, d)
    ring = m1.ring
    i1 = Matrix.identity(ring, m1.rank, m1.prec())
    i2 = Matrix.identity(ring, m2.rank, m2.prec())
    theta = [m1.theta[i].kron(i2) + i1.kron(m2.theta[i]) for i in range(m1.d)]
    phi = m1.phi.kron(i2) + i1.kron(m2.phi)
    return EnhancedHiggsModule(ring, m1.rank * m2.rank, m1.d, theta, phi,
                               label=f"({m1.label})x({m2.label})")


def specialize_T1(m: EnhancedHiggsModule) -> EnhancedHiggsModule:
    """Specialize T-Laurent entries at T_s = 1 (a ring map to the base ring).

    Cohomology after specialization is a necessary-condition check only;
    the chain-ring homology machinery needs base-ring entries.
    """
    from .rings import LaurentCoeffRing

    ring = m.ring
    if not isinstance(ring, LaurentCoeffRing):
        return m
    base = ring.base
    theta = [t.map_ring(base, ring.specialize_T1_vec) for t in m.theta]
    phi = m.phi.map_ring(base, ring.specialize_T1_vec)
    return EnhancedHiggsModule(base, m.rank, m.d, theta, phi, label=m.label + "|T=1")


def dual(m: EnhancedHiggsModule) -> EnhancedHiggsModule:
    theta = [(-t.transpose().arr) % m.ring.pN for t in m.theta]
    theta = [Matrix(m.ring, t, m.prec()) for t in theta]
    phi = Matrix(m.ring, (-m.phi.transpose().arr) % m.ring.pN, m.phi.prec)
    return EnhancedHiggsModule(m.ring, m.rank, m.d, theta, phi, label=f"({m.label})^*")
