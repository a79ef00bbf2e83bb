import numpy as np
import pytest

from prismhiggs.generators import random_enhanced_checked
from prismhiggs.higgs import (
    EnhancedHiggsModule,
    bk_twist_module,
    check_enhanced,
    dual,
    enhanced_higgs_complex,
    higgs_complex,
    tensor,
    twist,
)
from prismhiggs.homology import cohomology
from prismhiggs.matrices import Matrix


def two_by_two(R):
    th = Matrix.from_int_entries(R, [[0, 1], [0, 0]])
    ph = Matrix.from_scalar_entries(R, [[R.zero(), R.zero()], [R.zero(), R.a]])
    return EnhancedHiggsModule(R, 2, 1, [th], ph)


def test_check_enhanced_examples(any_ring):
    R = any_ring
    for n in (-2, 0, 3):
        assert check_enhanced(bk_twist_module(n, R)).ok
    m = two_by_two(R)
    assert check_enhanced(m).ok
    bad = EnhancedHiggsModule(R, 2, 1, [m.theta[0]], Matrix.zeros(R, 2, 2))
    rep = check_enhanced(bad)
    assert not rep.ok
    assert rep.failures[0][0] == "[phi,theta_i] != -a theta_i"


def test_nilpotency_failure_detected(R2):
    th = Matrix.from_int_entries(R2, [[1, 0], [0, 1]])  # not nilpotent
    m = EnhancedHiggsModule(R2, 2, 1, [th], Matrix.zeros(R2, 2, 2))
    rep = check_enhanced(m)
    assert not rep.ok


def test_higgs_complex_shapes(R3):
    m0 = bk_twist_module(2, R3)
    assert higgs_complex(m0).ranks == [1]
    m1 = two_by_two(R3)
    assert higgs_complex(m1).ranks == [2, 2]
    # d = 2: [H -> H^2 -> H], differentials contract against (theta_1, theta_2)
    z = Matrix.zeros(R3, 2, 2)
    th = Matrix.from_int_entries(R3, [[0, 1], [0, 0]])
    m2 = EnhancedHiggsModule(R3, 2, 2, [th, th.scale(2)], two_by_two(R3).phi)
    assert check_enhanced(m2).ok
    cx = higgs_complex(m2)
    assert cx.ranks == [2, 4, 2]  # d^2 = 0 verified by the constructor


def test_enhanced_complex_d0_matches_kernel_cokernel(any_ring, rng):
    R = any_ring
    for _ in range(4):
        m = random_enhanced_checked(rng, R, 2, 0)
        cx = enhanced_higgs_complex(m)
        assert cx.ranks == [2, 2]
        prof = cohomology(cx)
        # independent oracle: kernel/cokernel of phi via SNF directly
        from prismhiggs.homology import snf

        res = snf(m.phi)
        cap = R.e * min(m.phi.prec, R.N)
        # ker(phi) = (+) ann(pi^a) = (+) R/pi^a plus free summands; over a
        # finite chain ring coker(phi) has the same elementary divisors
        profile = sorted([a for a in res.divisors if a > 0] + [cap] * (2 - len(res.divisors)))
        assert prof.divisor_lists()[0] == profile
        assert prof.divisor_lists()[1] == profile


def test_bk_fiber_complex_unit_twist(R2):
    # [O_K ->^{-n} O_K] for n a unit: both cohomologies vanish integrally
    prof = cohomology(enhanced_higgs_complex(bk_twist_module(3, R2)))
    assert prof.divisor_lists() == {0: [], 1: []}


def test_trivial_module_fiber(R2):
    # vertical maps are phi + q a = q a: with a a unit only column 0 survives
    triv = EnhancedHiggsModule(R2, 2, 1, [Matrix.zeros(R2, 2, 2)], Matrix.zeros(R2, 2, 2))
    prof = cohomology(enhanced_higgs_complex(triv))
    assert prof.rational_ranks() == [2, 2, 0]


def test_twist_additivity_and_table(any_ring):
    R = any_ring
    m = two_by_two(R)
    assert twist(twist(m, 1), 2).phi.eq(twist(m, 3).phi)
    assert twist(m, 0).phi.eq(m.phi)
    t1 = bk_twist_module(1, R)
    assert t1.phi.eq(Matrix.identity(R, 1).scale(-R.a))


def test_tensor_and_dual_closure(any_ring, rng):
    R = any_ring
    for _ in range(3):
        m1 = random_enhanced_checked(rng, R, 2, 1)
        m2 = random_enhanced_checked(rng, R, 2, 1)
        t = tensor(m1, m2)
        assert t.rank == 4
        assert check_enhanced(t).ok
        assert check_enhanced(dual(m1)).ok
    # twist(n) (x) twist(m) = twist(n+m)
    assert tensor(bk_twist_module(2, R), bk_twist_module(-3, R)).phi.eq(bk_twist_module(-1, R).phi)
    # dual is an involution entrywise
    m = two_by_two(R)
    dd = dual(dual(m))
    assert dd.phi.eq(m.phi) and dd.theta[0].eq(m.theta[0])
    # tensor with the trivial rank-1 module is the identity up to reindexing
    unit = bk_twist_module(0, R)
    tm = tensor(m, unit)
    assert tm.phi.eq(m.phi) and tm.theta[0].eq(m.theta[0])


def test_laurent_entry_module(R3):
    # theta with a T-dependent entry: enhancement holds over the Laurent ring,
    # and T = 1 specialization is the necessary-condition route to homology
    from prismhiggs.higgs import specialize_T1
    from prismhiggs.homology import cohomology
    from prismhiggs.rings import LaurentCoeffRing
    import numpy as np

    T = LaurentCoeffRing(R3, d=1, T_degree_bound=2)
    arr = np.zeros((2, 2) + T.vec_shape, dtype=np.int64)
    arr[0, 1] = T.monomial_vec((1,))  # theta entry T_1
    th = Matrix(T, arr)
    phi_arr = np.zeros((2, 2) + T.vec_shape, dtype=np.int64)
    phi_arr[1, 1] = T.a.vec
    ph = Matrix(T, phi_arr)
    m = EnhancedHiggsModule(T, 2, 1, [th], ph)
    assert check_enhanced(m).ok
    m1 = specialize_T1(m)
    assert m1.ring is R3 and check_enhanced(m1).ok
    prof = cohomology(higgs_complex(m1))
    assert len(prof.rational_ranks()) == 2
