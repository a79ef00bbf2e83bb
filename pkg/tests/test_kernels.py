import os

import numpy as np
import pytest

from prismhiggs import _kernels
from prismhiggs.rings import PrimeConfig, make_base_ring


def _random_workload(rng, ring, nvars, D, rdim, terms):
    exps = rng.integers(0, max(2, D // 2 + 1), size=(terms, nvars)).astype(np.int64)
    exps = exps[exps.sum(axis=1) <= D]
    coefs = rng.integers(0, ring.pN, size=(len(exps), rdim, rdim, ring.e)).astype(np.int64)
    return exps, coefs


@pytest.mark.parametrize("rdim", [1, 3])
@pytest.mark.parametrize("nvars,D", [(1, 6), (3, 4), (6, 4)])
def test_numpy_numba_agree(rng, nvars, D, rdim):
    ring = make_base_ring(PrimeConfig(3, 6, (-3, 0, 1)))
    ea, ca = _random_workload(rng, ring, nvars, D, rdim, 25)
    eb, cb = _random_workload(rng, ring, nvars, D, rdim, 25)
    binom = _kernels.binom_table(D, ring.pN)
    r1 = _kernels.dp_mul_numpy(ea, ca, eb, cb, D, binom, ring.S, ring.pN)
    r2 = _kernels.dp_mul_numba(ea, ca, eb, cb, D, binom, ring.S, ring.pN)
    assert np.array_equal(r1[0], r2[0])
    assert np.array_equal(r1[1], r2[1])
    assert r1[2] == r2[2]


def test_env_flag_selection(monkeypatch):
    monkeypatch.setenv("PRISMHIGGS_KERNEL", "numpy")
    assert _kernels.kernel_mode() == "numpy"
    monkeypatch.setenv("PRISMHIGGS_KERNEL", "auto")
    assert _kernels.kernel_mode() in ("numpy", "numba")
    monkeypatch.setenv("PRISMHIGGS_KERNEL", "bogus")
    with pytest.raises(ValueError):
        _kernels.kernel_mode()


def test_chunked_merge_matches_single_chunk(rng):
    ring = make_base_ring(PrimeConfig(2, 8, (-2, 1)))
    ea, ca = _random_workload(rng, ring, 4, 5, 2, 60)
    eb, cb = _random_workload(rng, ring, 4, 5, 2, 60)
    binom = _kernels.binom_table(5, ring.pN)
    big = _kernels.dp_mul_numpy(ea, ca, eb, cb, 5, binom, ring.S, ring.pN, pair_budget=1 << 22)
    small = _kernels.dp_mul_numpy(ea, ca, eb, cb, 5, binom, ring.S, ring.pN, pair_budget=64)
    assert np.array_equal(big[0], small[0])
    assert np.array_equal(big[1], small[1])
