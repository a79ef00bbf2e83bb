"""Seeded random instances: enhanced Higgs modules, single-relation
mutations, and commuting nilpotent/unipotent tuples.

Enhanced modules are built in a weight-graded normal form and then
conjugated by a random unimodular matrix: pick integer weights g_1<=..<=g_r,
let the theta_i live in the weight-(+1) hom space (entries (i,j) with
g_j - g_i = 1, resampled until they pairwise commute), and take

    phi = a (diag(g) + m) + sum_j c_j theta_j  (+ theta-polynomial junk).

Then [phi, theta_i] = -a theta_i holds by the grading, the theta_i are
strictly triangular, and prod (phi + j a) -> 0 because the diagonal of
phi/a consists of integers (products over consecutive integers gain
unbounded p-valuation).
"""

from __future__ import annotations

import numpy as np

from .higgs import EnhancedHiggsModule, check_enhanced
from .homology import _invert_unimodular
from .matrices import Matrix
from .rings import INT, BaseRing

_WEIGHTS = {
    1: [(0,)],
    2: [(0, 1)],
    3: [(0, 1, 2), (0, 1, 1), (0, 0, 1)],
    4: [(0, 1, 1, 2), (0, 0, 1, 1), (0, 1, 2, 3)],
}


def _weight_one_positions(g: tuple) -> list[tuple[int, int]]:
    return [(i, j) for i in range(len(g)) for j in range(len(g)) if g[j] - g[i] == 1]


def _random_weight_one(rng, ring: BaseRing, g: tuple, scale: int = 1) -> Matrix:
    r = len(g)
    arr = np.zeros((r, r) + ring.vec_shape, dtype=INT)
    for (i, j) in _weight_one_positions(g):
        arr[i, j] = ring.from_int(int(rng.integers(-3, 4)) * scale)
    return Matrix(ring, arr)


def random_unimodular(rng, ring: BaseRing, r: int, shears: int | None = None) -> Matrix:
    arr = Matrix.identity(ring, r).arr.copy()
    for _ in range(shears if shears is not None else 2 * r):
        i, j = rng.integers(0, r, size=2)
        if i == j:
            continue
        c = int(rng.integers(-2, 3))
        arr[i] = (arr[i] + c * arr[j]) % ring.pN
    return Matrix(ring, arr)


def random_enhanced(
    rng, ring: BaseRing, r: int, d: int, p_divisible: bool = False, conjugate: bool = True
) -> EnhancedHiggsModule:
    weights = _WEIGHTS[r][int(rng.integers(0, len(_WEIGHTS[r])))]
    scale = ring.p if p_divisible else 1
    for _ in range(60):
        theta = [_random_weight_one(rng, ring, weights, scale) for _ in range(d)]
        ok = all(
            theta[i].commutator(theta[j]).is_zero()
            for i in range(d)
            for j in range(i + 1, d)
        )
        if ok:
            break
    else:
        theta = [Matrix.zeros(ring, r, r) for _ in range(d)]
    m_shift = int(rng.integers(-2, 3))
    diag = np.zeros((r, r) + ring.vec_shape, dtype=INT)
    for i in range(r):
        diag[i, i] = ring.from_int(weights[i] + m_shift)
    phi = Matrix(ring, diag).scale(ring.a)
    for t in theta:
        phi = phi + t.scale(int(rng.integers(-2, 3)))
    if r >= 2 and d >= 1:
        phi = phi + (theta[0] @ theta[0]).scale(int(rng.integers(-1, 2)))
    if conjugate:
        U = random_unimodular(rng, ring, r)
        Uinv = _invert_unimodular(U)
        theta = [U @ t @ Uinv for t in theta]
        phi = U @ phi @ Uinv
    mod = EnhancedHiggsModule(ring, r, d, theta, phi, label="random")
    return mod


def random_enhanced_checked(
    rng, ring: BaseRing, r: int, d: int, need_theta: bool = False, **kw
) -> EnhancedHiggsModule:
    for _ in range(60):
        m = random_enhanced(rng, ring, r, d, **kw)
        if need_theta and (d == 0 or all(t.is_zero() for t in m.theta)):
            continue
        if check_enhanced(m).ok:
            return m
    raise RuntimeError("could not sample an enhanced module (generator bug)")


# ---------------------------------------------------------------------------
# single-relation mutations
# ---------------------------------------------------------------------------


def mutate_phi(rng, m: EnhancedHiggsModule):
    """Perturb phi so that [phi', theta_i] + a theta_i != 0 for some i,
    keeping the theta commutators intact.  Returns (theta, phi', i)."""
    ring = m.ring
    for _ in range(80):
        arr = np.zeros((m.rank, m.rank) + ring.vec_shape, dtype=INT)
        i0, j0 = rng.integers(0, m.rank, size=2)
        arr[i0, j0] = ring.from_int(int(rng.integers(1, 4)))
        P = Matrix(ring, arr)
        phi2 = m.phi + P
        for i in range(m.d):
            defect = phi2.commutator(m.theta[i]) + m.theta[i].scale(ring.a)
            if not defect.is_zero():
                return list(m.theta), phi2, i
    raise RuntimeError("could not find a phi mutation with nonzero defect")


def mutate_theta(rng, ring: BaseRing, r: int = 3):
    """A d=2 tuple with [theta_1, theta_2] != 0 while both still satisfy
    [phi, theta_i] = -a theta_i (weight-graded, weights (0,1,2))."""
    g = (0, 1, 2)
    E12 = np.zeros((r, r) + ring.vec_shape, dtype=INT)
    E12[0, 1] = ring.from_int(int(rng.integers(1, 4)))
    E23 = np.zeros((r, r) + ring.vec_shape, dtype=INT)
    E23[1, 2] = ring.from_int(int(rng.integers(1, 4)))
    theta1 = Matrix(ring, E12)
    theta2 = Matrix(ring, E23)  # [theta1, theta2] = c * E13 != 0
    diag = np.zeros((r, r) + ring.vec_shape, dtype=INT)
    for i in range(r):
        diag[i, i] = ring.from_int(g[i] + int(rng.integers(-1, 2)))
    phi = Matrix(ring, diag).scale(ring.a)
    assert not theta1.commutator(theta2).is_zero()
    return [theta1, theta2], phi


# ---------------------------------------------------------------------------
# commuting tuples for the Simpson round trip
# ---------------------------------------------------------------------------


def random_commuting_nilpotents(rng, ring: BaseRing, r: int, d: int, p_divisible: bool = True):
    """Polynomials in one strictly upper-triangular seed, scaled by p so the
    exp/log factorial divisions are exact."""
    scale = ring.p if p_divisible else 1
    seed = np.zeros((r, r) + ring.vec_shape, dtype=INT)
    for i in range(r - 1):
        seed[i, i + 1] = ring.from_int(int(rng.integers(-3, 4)) * scale)
    S = Matrix(ring, seed)
    out = []
    for _ in range(d):
        c1, c2 = int(rng.integers(-2, 3)), int(rng.integers(-1, 2))
        out.append(S.scale(c1) + (S @ S).scale(c2 * scale))
    return out


def random_commuting_unipotents(rng, ring: BaseRing, r: int, d: int):
    from .matrices import exp_nilpotent

    return [exp_nilpotent(t) for t in random_commuting_nilpotents(rng, ring, r, d)]
