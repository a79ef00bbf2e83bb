import numpy as np
import pytest

from prismhiggs.matrices import (
    Matrix,
    binomial_product_coefficients,
    binomial_series_term_count,
    exp_nilpotent,
    log_unipotent,
    op_binomial_series_scalar,
    op_binomial_series_symbolic,
)
from prismhiggs.rings import PrimeConfig, make_base_ring


def test_binomial_series_phi_zero_is_identity(any_ring):
    R = any_ring
    phi = Matrix.zeros(R, 2, 2)
    series = op_binomial_series_symbolic(phi, R.a, 4)
    assert series[0].eq(Matrix.identity(R, 2))
    for k in range(1, 5):
        assert series[k].is_zero()


def test_binomial_series_bk_linear_coefficient(any_ring):
    # phi = -n a: the X^[1] coefficient is -n a
    R = any_ring
    for n in (1, 2, 3):
        phi = Matrix.identity(R, 1).scale(R.a * (-n))
        series = op_binomial_series_symbolic(phi, R.a, 3)
        assert series[1].eq(Matrix.identity(R, 1).scale(R.a * (-n)))


def test_binomial_series_diagonal_example():
    # p=2, E=u-2, a=1, phi = diag(0, 1): k=2 coefficient is diag(0,1)@diag(1,2) = diag(0,2)
    R = make_base_ring(PrimeConfig(2, 8, (-2, 1)))
    phi = Matrix.from_int_entries(R, [[0, 0], [0, 1]])
    series = op_binomial_series_symbolic(phi, R.a, 4)
    assert series[2].eq(Matrix.from_int_entries(R, [[0, 0], [0, 2]]))


def test_binomial_series_scalar_termination_bound(any_ring):
    # val(z) = 1 + 1/e > 1/(p-1): the configured bound must cover termination
    R = any_ring
    from fractions import Fraction
    import math

    z = R.integer(R.p) * R.pi
    valz = Fraction(1) + Fraction(1, R.e)
    bound = math.ceil(R.N * (R.p - 1) / ((R.p - 1) * valz - 1)) + 4
    phi = Matrix.from_int_entries(R, [[0, 1], [0, 5]]).scale(R.a)
    k = binomial_series_term_count(phi, R.a, z, 4 * R.N * (R.p - 1))
    assert k <= bound


def test_exp_log_roundtrip(any_ring, rng):
    R = any_ring
    # p-divisible strictly upper triangular: factorial divisions stay exact
    for _ in range(6):
        arr = np.zeros((3, 3) + R.vec_shape, dtype=np.int64)
        for i in range(2):
            arr[i, i + 1] = R.from_int(int(rng.integers(-3, 4)) * R.p)
        arr[0, 2] = R.from_int(int(rng.integers(-3, 4)) * R.p)
        t = Matrix(R, arr)
        g = exp_nilpotent(t)
        back = log_unipotent(g)
        assert back.eq(t)


def test_exp_log_single_superdiagonal_exact(any_ring):
    # nilpotency order 2: no divisions at all, exact at full precision
    R = any_ring
    t = Matrix.from_int_entries(R, [[0, 1], [0, 0]])
    g = exp_nilpotent(t)
    assert g.eq(Matrix.from_int_entries(R, [[1, 1], [0, 1]]))
    assert log_unipotent(g).eq(t)
    assert log_unipotent(g).prec == R.N


def test_matmul_and_kron(any_ring, rng):
    R = any_ring
    A = Matrix(R, rng.integers(0, R.pN, size=(2, 2) + R.vec_shape))
    B = Matrix(R, rng.integers(0, R.pN, size=(2, 2) + R.vec_shape))
    C = Matrix(R, rng.integers(0, R.pN, size=(2, 2) + R.vec_shape))
    assert ((A @ B) @ C).eq(A @ (B @ C))
    assert (A.kron(B) @ C.kron(C)).eq((A @ C).kron(B @ C))


def test_binomial_product_coefficients_stop_on_zero(R2):
    phi = Matrix.identity(R2, 1).scale(R2.a * (-2))  # (phi)(phi+a)(phi+2a): third factor kills
    coeffs = binomial_product_coefficients(phi, R2.a, 50)
    assert len(coeffs) == 3


def test_binomial_series_nonconvergence_detected(R2):
    from prismhiggs.rings import NonConvergenceError

    phi = Matrix.identity(R2, 1)  # prod (1 + j a) never vanishes for unit a
    z = R2.one()  # val(z) = 0: terms do not die either
    with pytest.raises(NonConvergenceError):
        op_binomial_series_scalar(phi, R2.a, z, 30)
