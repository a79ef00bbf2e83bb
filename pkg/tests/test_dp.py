import math

import numpy as np
import pytest

from prismhiggs.dp import DPPoly, DPShape, degeneracy, face, verify_simplicial_identities
from prismhiggs.rings import PrimeConfig, make_base_ring


def V(shape, ring, label, k=1):
    return DPPoly.variable(shape, ring, label, k)


def test_face_table_frozen_examples(R2):
    sh1 = DPShape("arith", 1, 1, 3)
    sh2 = sh1.at_level(2)
    X1 = V(sh1, R2, ("X", 1))
    # p_1(X_1) = X_2
    assert face(1, X1).eq(V(sh2, R2, ("X", 2)))
    # p_2(Y_{s,1}) = Y_{s,1}
    assert face(2, V(sh1, R2, ("Y", 1, 1))).eq(V(sh2, R2, ("Y", 1, 1)))
    # sigma_0(X_1) = 0, sigma_1(Y_{s,2}) = Y_{s,1}
    assert degeneracy(0, X1).is_zero()
    assert degeneracy(1, V(sh2, R2, ("Y", 1, 2))).eq(V(sh1, R2, ("Y", 1, 1)))


def test_p0_expansion_oracle(R2):
    # a = 1, D = 3: p_0(X_1) = X_2 - X_1 + X_2 X_1 - 2 X_1^[2] + 2 X_2 X_1^[2] - 6 X_1^[3]
    sh1 = DPShape("arith", 1, 1, 3)
    sh2 = sh1.at_level(2)
    got = face(0, V(sh1, R2, ("X", 1)))
    X1, X2 = V(sh2, R2, ("X", 1)), V(sh2, R2, ("X", 2))
    want = (
        X2 - X1 + (X2 * X1) - V(sh2, R2, ("X", 1), 2).scale(2)
        + (X2 * V(sh2, R2, ("X", 1), 2)).scale(2) - V(sh2, R2, ("X", 1), 3).scale(6)
    )
    assert got.eq(want)


def test_p0_geo_difference(R3):
    sh1 = DPShape("geo", 1, 1, 3)
    sh2 = sh1.at_level(2)
    got = face(0, V(sh1, R3, ("Y", 1, 1)))
    assert got.eq(V(sh2, R3, ("Y", 1, 2)) - V(sh2, R3, ("Y", 1, 1)))


def test_dp_product_rule(any_ring):
    R = any_ring
    sh = DPShape("arith", 1, 0, 6)
    for i in range(1, 4):
        for j in range(1, 4):
            if i + j > 6:
                continue
            lhs = V(sh, R, ("X", 1), i) * V(sh, R, ("X", 1), j)
            rhs = V(sh, R, ("X", 1), i + j).scale(math.comb(i + j, i))
            assert lhs.eq(rhs)


def test_dp_power_matches_plain_power(R3):
    sh = DPShape("arith", 1, 1, 6)
    f = V(sh, R3, ("X", 1)) + V(sh, R3, ("Y", 1, 1)).scale(2)
    g3 = f.dp_power(3)
    cube = f * f * f
    assert cube.eq(g3.scale(math.factorial(3)))


def test_mul_commutative_associative(any_ring, rng):
    R = any_ring
    sh = DPShape("arith", 1, 1, 4)

    def rand_poly():
        terms = {}
        for _ in range(4):
            mono = tuple(int(x) for x in rng.integers(0, 3, size=sh.nvars))
            if sum(mono) <= sh.D:
                terms[mono] = R.elt(rng.integers(0, R.pN, size=R.vec_shape))
        return DPPoly.from_terms(sh, R, terms)

    for _ in range(5):
        f, g, h = rand_poly(), rand_poly(), rand_poly()
        assert (f * g).eq(g * f)
        assert ((f * g) * h).eq(f * (g * h))


def test_section_property(R3):
    # sigma_0 p_0 = sigma_0 p_1 = id on monomials of degree <= D - 1
    sh = DPShape("arith", 1, 1, 4)
    for lab in sh.variables:
        for k in (1, 2, 3):
            m = V(sh, R3, lab, k)
            assert degeneracy(0, face(0, m)).eq(m)
            assert degeneracy(0, face(1, m)).eq(m)


@pytest.mark.parametrize("kind", ["arith", "geo"])
def test_simplicial_identities(any_ring, kind):
    rep = verify_simplicial_identities(kind, any_ring, 1, 2, 4)
    assert rep.ok, rep.failures[:3]


def test_simplicial_identities_d2(R3r):
    rep = verify_simplicial_identities("arith", R3r, 2, 2, 4)
    assert rep.ok, rep.failures[:3]


def test_corrupted_p0_detected(R2):
    rep = verify_simplicial_identities("arith", R2, 1, 2, 4, corrupt_p0=True)
    assert not rep.ok
    name, i, j, n, mono = rep.failures[0]
    assert mono == (1, 0)  # the X_1 probe witnesses the failure


def test_truncation_is_flagged(R2):
    sh = DPShape("arith", 1, 0, 3)
    f = V(sh, R2, ("X", 1), 2)
    g = V(sh, R2, ("X", 1), 2)
    prod = f * g
    assert prod.is_zero()
    assert prod.truncated


def test_canonical_lines_deterministic(R3):
    sh = DPShape("arith", 1, 1, 3)
    f = V(sh, R3, ("Y", 1, 1)) + V(sh, R3, ("X", 1)).scale(2) + V(sh, R3, ("X", 1), 2)
    lines = f.canonical_lines()
    assert lines == f.canonical_lines()
    # degree-major, then ascending lexicographic exponent: (0,1) before (1,0)
    assert lines[0].startswith("Y1_1^[1]")
    assert lines[1].startswith("X1^[1]")
    assert lines[2].startswith("X1^[2]")
