import numpy as np
import pytest

from prismhiggs.generators import random_commuting_nilpotents, random_enhanced_checked
from prismhiggs.higgs import EnhancedHiggsModule, bk_twist_module, enhanced_higgs_complex, higgs_complex
from prismhiggs.homology import (
    ChainComplex,
    NotChainRingError,
    cech_alexander,
    cohomology,
    koszul_complex,
    koszul_group_cohomology,
    rho_map,
    snf,
)
from prismhiggs.matrices import Matrix, exp_nilpotent
from prismhiggs.rings import adjoin_zeta
from prismhiggs.stratification import build_stratification


def test_snf_examples(R3r):
    assert snf(Matrix.from_int_entries(R3r, [[-5]])).divisors == [0]
    # p = unit * pi^e with e = 2
    assert snf(Matrix.from_int_entries(R3r, [[3]])).divisors == [2]
    A = Matrix.from_scalar_entries(R3r, [[R3r.pi, R3r.zero()], [R3r.zero(), R3r.pi * R3r.pi]])
    assert snf(A).divisors == [1, 2]


def test_snf_reconstruction_random(any_ring, rng):
    R = any_ring
    for _ in range(10):
        rows, cols = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        A = Matrix(R, rng.integers(0, R.pN, size=(rows, cols) + R.vec_shape))
        res = snf(A)
        assert (res.U @ A @ res.V).eq(res.D)
        assert res.divisors == sorted(res.divisors)


def test_snf_rejects_non_chain(R3):
    C = adjoin_zeta(R3)
    A = Matrix.identity(C, 2)
    with pytest.raises(NotChainRingError):
        snf(A)


def test_cohomology_zero_map(R2):
    cx = ChainComplex(R2, [2, 2], [Matrix.zeros(R2, 2, 2)])
    prof = cohomology(cx)
    cap = R2.e * R2.N
    assert prof.divisor_lists() == {0: [cap, cap], 1: [cap, cap]}


def test_cohomology_ramified_torsion(R3r):
    cx = ChainComplex(R3r, [1, 1], [Matrix.from_scalar_entries(R3r, [[-R3r.a]])])
    prof = cohomology(cx)
    assert prof.rational_ranks() == [0, 0]
    assert 1 in prof.divisor_lists()[1]


def test_cohomology_shift_invariance(R3, rng):
    # padding a zero degree in front shifts the profile by one degree
    phi = Matrix(R3, rng.integers(0, R3.pN, size=(2, 2) + R3.vec_shape))
    cx = ChainComplex(R3, [2, 2], [phi])
    sh = ChainComplex(R3, [0, 2, 2], [Matrix.zeros(R3, 2, 0), phi])
    a = cohomology(cx).divisor_lists()
    b = cohomology(sh).divisor_lists()
    assert b[0] == [] and b[1] == a[0] and b[2] == a[1]


def test_koszul_oracle_d1(R2, rng):
    # H^0/H^1 of the gamma-Koszul complex equal direct kernel/cokernel profiles
    for _ in range(4):
        t = Matrix(R2, (rng.integers(0, 3, size=(3, 3) + R2.vec_shape)) * 2)
        t_arr = np.triu(np.ones((3, 3), dtype=np.int64), 1)[..., None] * t.arr
        t = Matrix(R2, t_arr)
        g = exp_nilpotent(t)
        kc = koszul_group_cohomology([g], 3, R2)
        prof = cohomology(kc)
        ident = Matrix.identity(R2, 3)
        direct = ChainComplex(R2, [3, 3], [g - ident])
        dprof = cohomology(direct)
        assert prof.divisor_lists() == dprof.divisor_lists()


def test_koszul_identity_ranks(R2):
    ident = Matrix.identity(R2, 1)
    cx = koszul_group_cohomology([ident, ident], 1, R2)
    assert cohomology(cx).rational_ranks() == [1, 2, 1]
    g = Matrix.from_int_entries(R2, [[1, 1], [0, 1]])
    prof = cohomology(koszul_group_cohomology([g], 2, R2))
    assert prof.rational_ranks() == [1, 1]


def test_koszul_noncommuting_rejected(R2):
    a = Matrix.from_int_entries(R2, [[1, 1], [0, 1]])
    b = Matrix.from_int_entries(R2, [[1, 0], [1, 1]])
    with pytest.raises(ValueError):
        koszul_group_cohomology([a, b], 2, R2)


def test_cech_trivial_module(R2):
    # rank-1 trivial crystal: H^0 is the base ring (one free generator)
    m = bk_twist_module(0, R2)
    s = build_stratification(m, 4)
    cx = cech_alexander(s, 2, 4)
    prof = cohomology(cx)
    cap = R2.e * R2.N
    assert prof.divisor_lists()[0] == [cap]


def test_cech_bk_kernel_vanishes(R2):
    # degree-0 -> 1 differential is x -> (1-aX)^n x - x; kernel 0 for unit n
    m = bk_twist_module(3, R2)
    s = build_stratification(m, 8)
    cx = cech_alexander(s, 2, 8)
    prof = cohomology(cx)
    assert prof.rational_ranks()[0] == 0


def test_cech_comparison_random_d0(any_ring, rng):
    R = any_ring
    for _ in range(3):
        m = random_enhanced_checked(rng, R, int(rng.integers(1, 4)), 0)
        s = build_stratification(m, max(4, 2 * m.rank))
        ca = cohomology(cech_alexander(s, 2, s.D)).rational_ranks()[:2]
        hg = cohomology(enhanced_higgs_complex(m)).rational_ranks()[:2]
        assert ca == hg


def test_cech_d1_reported(R2, rng):
    # d >= 1 comparison is empirical: build it and record, no assertion on equality
    m = random_enhanced_checked(rng, R2, 2, 1)
    s = build_stratification(m, 4)
    cx = cech_alexander(s, 2, 4)  # d^2 = 0 is still asserted by construction
    prof = cohomology(cx)
    assert len(prof.rational_ranks()) == 3


def test_rho_examples(R2):
    # phi = -a: F collapses to its X^[1] term and both sides equal -aX
    phm = Matrix.from_scalar_entries(R2, [[-R2.a]])
    m = EnhancedHiggsModule(R2, 1, 0, [], phm)
    assert rho_map(m, 0, 6).ok
    # phi = 0, q = 0: both sides vanish
    z = EnhancedHiggsModule(R2, 1, 0, [], Matrix.zeros(R2, 1, 1))
    assert rho_map(z, 0, 6).ok


def test_rho_identity_random(any_ring, rng):
    R = any_ring
    for _ in range(3):
        m = random_enhanced_checked(rng, R, 2, 0)
        for q in (0, 1, 2):
            assert rho_map(m, q, 6).ok


def test_higgs_koszul_vs_group_koszul(any_ring, rng):
    # gamma_i = exp(theta_i) with p-divisible theta: rational profiles agree
    R = any_ring
    for _ in range(3):
        theta = random_commuting_nilpotents(rng, R, 3, 2)
        gammas = [exp_nilpotent(t) for t in theta]
        kh = koszul_complex(theta, 3, R)
        kg = koszul_group_cohomology(gammas, 3, R)
        assert cohomology(kh).rational_ranks() == cohomology(kg).rational_ranks()


def test_cech_rejects_broken_cocycle(R3):
    # d^2 != 0 signals a wrong p_0 convention or a broken cocycle
    from prismhiggs.generators import mutate_theta
    from prismhiggs.stratification import family_from_operators, raw_stratification

    theta, phi = mutate_theta(np.random.default_rng(5), R3)
    fam = family_from_operators(R3, 3, 2, theta, phi, 20, 4)
    s = raw_stratification(R3, 3, 2, 3, fam)
    with pytest.raises(ValueError):
        cech_alexander(s, 2, 3)
