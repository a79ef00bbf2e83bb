import numpy as np
import pytest

from prismhiggs.generators import (
    random_commuting_nilpotents,
    random_commuting_unipotents,
    random_enhanced_checked,
)
from prismhiggs.galois import (
    GaloisContext,
    GroupElement,
    sen_operator,
    simpson_roundtrip_nilpotent,
    simpson_roundtrip_unipotent,
    verify_F_cocycle,
    verify_lambda_law,
)
from prismhiggs.higgs import EnhancedHiggsModule, bk_twist_module
from prismhiggs.matrices import Matrix, exp_nilpotent
from prismhiggs.rings import PrimeConfig, make_base_ring


def two_by_two(R):
    th = Matrix.from_int_entries(R, [[0, 1], [0, 0]])
    ph = Matrix.from_scalar_entries(R, [[R.zero(), R.zero()], [R.zero(), R.a]])
    return EnhancedHiggsModule(R, 2, 1, [th], ph)


def test_group_law():
    g1, g2 = GroupElement(5, 7), GroupElement(3, 2)
    g = g1.compose(g2, 3 ** 6)
    assert (g.chi, g.c) == (15, (5 * 2 + 7))
    assert GroupElement.identity().compose(g1, 3 ** 6) == g1


def test_identity_acts_trivially(R3):
    ctx = GaloisContext(two_by_two(R3))
    A = ctx.action_matrix(GroupElement.identity())
    assert A.eq(Matrix.identity(ctx.lam_ring, 2))
    assert ctx.act_on_lambda(GroupElement.identity()).eq(ctx.lam)


def test_bk_twist_tau_scaling(R3):
    # twist n: tau acts by (1 + pi a (zeta-1) lambda)^n
    for n in (1, 2):
        ctx = GaloisContext(bk_twist_module(n, R3))
        At = ctx.action_matrix(GroupElement.tau())
        base = ctx.lam_ring.one() + ctx.pi * ctx.a * ctx.zm1 * ctx.lam
        want = Matrix.identity(ctx.lam_ring, 1).scale(base ** n)
        assert At.eq(want)


def test_geo_action_nilpotent_exp(R3):
    # gamma_1(x) = x - (zeta-1) lambda E12 x when theta^2 = 0
    ctx = GaloisContext(two_by_two(R3))
    G = ctx.action_matrix(GroupElement.identity(), (1,))
    want = Matrix.identity(ctx.lam_ring, 2) - ctx.theta[0].scale(ctx.zm1 * ctx.lam)
    assert G.eq(want)


def test_act_on_lambda_tau(R3):
    ctx = GaloisContext(bk_twist_module(0, R3))
    l_tau = ctx.act_on_lambda(GroupElement.tau())
    body = ctx.lam_ring.one() + ctx.pi * ctx.a * ctx.zm1 * ctx.lam
    assert (l_tau * body).eq(ctx.lam)


def test_lambda_law_composition(any_ring, rng):
    m = random_enhanced_checked(rng, any_ring, 1, 0)
    assert verify_lambda_law(m, trials=6, seed=3).ok


def test_F_cocycle_random(any_ring, rng):
    m = random_enhanced_checked(rng, any_ring, 2, 1)
    rep = verify_F_cocycle(m, trials=8, seed=5)
    assert rep.ok, rep.failures


def test_F_cocycle_twist_family(R3):
    for n in range(-3, 4):
        assert verify_F_cocycle(bk_twist_module(n, R3), trials=5, seed=n + 10).ok


def test_broken_commutator_rejected(R3):
    th = Matrix.from_int_entries(R3, [[0, 1], [0, 0]])
    bad = EnhancedHiggsModule(R3, 2, 1, [th], Matrix.zeros(R3, 2, 2))
    with pytest.raises(ValueError):
        verify_F_cocycle(bad, trials=2)


def test_theta_equivariance_needs_commutator(R3):
    # feed the equivariance identity a phi with the wrong commutator directly
    m = two_by_two(R3)
    ctx = GaloisContext(m)
    wrong_phi = m.phi + m.theta[0] @ m.theta[0].transpose()  # no longer satisfies the shift
    B0 = ctx.kummer_part(GroupElement.tau(), wrong_phi)
    B1 = ctx.kummer_part(GroupElement.tau(), wrong_phi.add_scalar_identity(R3.a))
    assert not (B1 @ ctx.theta[0]).eq(ctx.theta[0] @ B0)


def test_sen_phi_zero(R3):
    rep = sen_operator(EnhancedHiggsModule(R3, 1, 0, [], Matrix.zeros(R3, 1, 1)), 3)
    assert rep.ok and rep.sen_scalar == 0


def test_sen_bk_table(any_ring):
    for n in (-3, -1, 1, 2):
        rep = sen_operator(bk_twist_module(n, any_ring), 3)
        assert rep.ok, (n, rep.valuations)
        assert rep.sen_scalar == n
        assert rep.operator == "-phi/E'(pi)"


def test_sen_spec_instance_N8():
    R = make_base_ring(PrimeConfig(3, 8, (-3, 1)))
    rep = sen_operator(bk_twist_module(1, R), 2)
    assert rep.ok and rep.sen_scalar == 1


def test_sen_generic_module(any_ring, rng):
    m = random_enhanced_checked(rng, any_ring, 2, 1)
    rep = sen_operator(m, 3)
    assert rep.ok, rep.valuations


def test_sen_lambda1_coefficient(R3):
    # the lambda-degree-1 coefficient of D_n is -pi (zeta-1) phi
    rep = sen_operator(two_by_two(R3), 2)
    assert rep.lambda1_matches


def test_roundtrip_single_superdiagonal(any_ring):
    R = any_ring
    t = Matrix.from_int_entries(R, [[0, 1], [0, 0]])
    rep = simpson_roundtrip_nilpotent([t])
    assert rep.ok
    g = exp_nilpotent(t)
    assert g.eq(Matrix.from_int_entries(R, [[1, 1], [0, 1]]))


def test_roundtrip_identity_gamma(any_ring):
    R = any_ring
    rep = simpson_roundtrip_unipotent([Matrix.identity(R, 2)])
    assert rep.ok


def test_roundtrip_random_tuples(any_ring, rng):
    R = any_ring
    for r in (3, 4):
        theta = random_commuting_nilpotents(rng, R, r, 2)
        rep = simpson_roundtrip_nilpotent(theta)
        assert rep.ok, rep.failures
        gammas = random_commuting_unipotents(rng, R, r, 2)
        rep = simpson_roundtrip_unipotent(gammas)
        assert rep.ok, rep.failures


def test_roundtrip_rejects_noncommuting(R2):
    a = Matrix.from_int_entries(R2, [[0, 2, 0], [0, 0, 0], [0, 0, 0]])
    b = Matrix.from_int_entries(R2, [[0, 0, 0], [0, 0, 2], [0, 0, 0]])
    rep = simpson_roundtrip_nilpotent([a, b])
    assert not rep.ok
