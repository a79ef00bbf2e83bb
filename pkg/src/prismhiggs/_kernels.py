"""Hot kernels for divided-power polynomial multiplication.

A polynomial is a pair of arrays: exponent rows ``exps`` of shape
``(M, nvars)`` and coefficient blocks ``coefs`` of shape ``(M, r1, r2, m)``
over a ring with dense structure tensor ``S`` of shape ``(m, m, m)``.
The product accumulates, for every term pair inside the degree window,

    binom(k+l, k) * (A_k  matmul_ring  B_l)   at exponent k + l,

where the binomial factor is the divided-power product rule applied per
variable.  Terms are merged sparsely through mixed-radix exponent codes
(the count of *valid* monomials is small even when the code space is not).

Two implementations are provided: a vectorized numpy path and a numba
``@njit`` path; the ``PRISMHIGGS_KERNEL`` environment variable picks one
(``numpy`` / ``numba``, default ``auto`` = numba when importable).
"""

from __future__ import annotations

import math
import os

import numpy as np

INT = np.int64

_ENV = "PRISMHIGGS_KERNEL"

try:  # pragma: no cover - exercised via the env flag
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        return deco(args[0]) if args and callable(args[0]) else deco


def kernel_mode() -> str:
    mode = os.environ.get(_ENV, "auto").lower()
    if mode not in ("auto", "numba", "numpy"):
        raise ValueError(f"{_ENV} must be auto|numba|numpy, got {mode!r}")
    if mode == "auto":
        return "numba" if _HAVE_NUMBA else "numpy"
    if mode == "numba" and not _HAVE_NUMBA:
        raise RuntimeError("numba requested but not importable")
    return mode


def binom_table(D: int, pN: int) -> np.ndarray:
    t = np.zeros((2 * D + 1, 2 * D + 1), dtype=INT)
    for n in range(2 * D + 1):
        for k in range(n + 1):
            t[n, k] = math.comb(n, k) % pN
    return t


def _encode(exps: np.ndarray, D: int) -> np.ndarray:
    radix = D + 1
    code = np.zeros(len(exps), dtype=INT)
    for v in range(exps.shape[1]):
        code = code * radix + exps[:, v]
    return code


def _decode(codes: np.ndarray, nvars: int, D: int) -> np.ndarray:
    radix = D + 1
    out = np.zeros((len(codes), nvars), dtype=INT)
    c = codes.astype(INT).copy()
    for v in range(nvars - 1, -1, -1):
        out[:, v] = c % radix
        c //= radix
    return out


def _merge_codes(codes: np.ndarray, prods: np.ndarray, pN: int):
    uniq, inv = np.unique(codes, return_inverse=True)
    out = np.zeros((len(uniq),) + prods.shape[1:], dtype=INT)
    np.add.at(out, inv, prods)
    return uniq, out % pN


def dp_mul_numpy(expsA, coefsA, expsB, coefsB, D, binom, S, pN, pair_budget=1 << 18):
    """Pure-numpy pairwise product; returns ``(exps, coefs, truncated)``."""
    M1, nvars = expsA.shape
    M2 = expsB.shape[0]
    degA = expsA.sum(axis=1)
    degB = expsB.sum(axis=1)
    codeA = _encode(expsA, D)
    codeB = _encode(expsB, D)
    TA = np.einsum("aikx,xyz->aikyz", coefsA % pN, S) % pN
    rows_per_chunk = max(1, pair_budget // max(M2, 1))
    acc_codes = None
    acc_prods = None
    truncated = False
    for lo in range(0, M1, rows_per_chunk):
        hi = min(M1, lo + rows_per_chunk)
        degsum = degA[lo:hi, None] + degB[None, :]
        mask = degsum <= D
        if not mask.all():
            truncated = True
        ai, bi = np.nonzero(mask)
        if len(ai) == 0:
            continue
        fac = np.ones(len(ai), dtype=INT)
        ea = expsA[lo:hi][ai]
        eb = expsB[bi]
        for v in range(nvars):
            fac = (fac * binom[ea[:, v] + eb[:, v], ea[:, v]]) % pN
        prod = np.einsum("pikyz,pkjy->pijz", TA[lo:hi][ai], coefsB[bi] % pN) % pN
        prod = (prod * fac[:, None, None, None]) % pN
        codes = codeA[lo:hi][ai] + codeB[bi]
        codes, prod = _merge_codes(codes, prod, pN)
        if acc_codes is None:
            acc_codes, acc_prods = codes, prod
        else:
            acc_codes, acc_prods = _merge_codes(
                np.concatenate([acc_codes, codes]), np.concatenate([acc_prods, prod]), pN
            )
    if acc_codes is None:
        r1, r2, m = coefsA.shape[1], coefsB.shape[2], S.shape[0]
        return np.zeros((0, nvars), dtype=INT), np.zeros((0, r1, r2, m), dtype=INT), truncated
    return _decode(acc_codes, nvars, D), acc_prods, truncated


@njit(cache=True)
def _dp_pairs_numba(expsA, coefsA, expsB, coefsB, D, binom, S, pN, codes_out, prods_out):  # pragma: no cover
    M1, nvars = expsA.shape
    M2 = expsB.shape[0]
    r1 = coefsA.shape[1]
    rK = coefsA.shape[2]
    r2 = coefsB.shape[2]
    m = S.shape[0]
    radix = D + 1
    cnt = 0
    truncated = False
    for a in range(M1):
        degA = 0
        codeA = 0
        for v in range(nvars):
            degA += expsA[a, v]
            codeA = codeA * radix + expsA[a, v]
        for b in range(M2):
            degB = 0
            codeB = 0
            for v in range(nvars):
                degB += expsB[b, v]
                codeB = codeB * radix + expsB[b, v]
            if degA + degB > D:
                truncated = True
                continue
            fac = 1
            for v in range(nvars):
                fac = (fac * binom[expsA[a, v] + expsB[b, v], expsA[a, v]]) % pN
            codes_out[cnt] = codeA + codeB
            for i in range(r1):
                for j in range(r2):
                    for z in range(m):
                        acc = 0
                        for k in range(rK):
                            for x in range(m):
                                ax = coefsA[a, i, k, x]
                                if ax == 0:
                                    continue
                                for y in range(m):
                                    s = S[x, y, z]
                                    if s == 0:
                                        continue
                                    acc = (acc + ax * ((coefsB[b, k, j, y] * s) % pN)) % pN
                        prods_out[cnt, i, j, z] = (acc * fac) % pN
            cnt += 1
    return cnt, truncated


def dp_mul_numba(expsA, coefsA, expsB, coefsB, D, binom, S, pN, pair_budget=1 << 18):
    M1, nvars = expsA.shape
    M2 = expsB.shape[0]
    r1, r2, m = coefsA.shape[1], coefsB.shape[2], S.shape[0]
    rows_per_chunk = max(1, pair_budget // max(M2, 1))
    acc_codes = None
    acc_prods = None
    truncated = False
    for lo in range(0, M1, rows_per_chunk):
        hi = min(M1, lo + rows_per_chunk)
        cap = (hi - lo) * M2
        codes_out = np.zeros(cap, dtype=INT)
        prods_out = np.zeros((cap, r1, r2, m), dtype=INT)
        cnt, trunc = _dp_pairs_numba(
            np.ascontiguousarray(expsA[lo:hi], dtype=INT),
            np.ascontiguousarray(coefsA[lo:hi], dtype=INT),
            np.ascontiguousarray(expsB, dtype=INT),
            np.ascontiguousarray(coefsB, dtype=INT),
            np.int64(D),
            binom,
            np.ascontiguousarray(S, dtype=INT),
            np.int64(pN),
            codes_out,
            prods_out,
        )
        truncated = truncated or bool(trunc)
        if cnt == 0:
            continue
        codes, prods = _merge_codes(codes_out[:cnt], prods_out[:cnt], pN)
        if acc_codes is None:
            acc_codes, acc_prods = codes, prods
        else:
            acc_codes, acc_prods = _merge_codes(
                np.concatenate([acc_codes, codes]), np.concatenate([acc_prods, prods]), pN
            )
    if acc_codes is None:
        return np.zeros((0, nvars), dtype=INT), np.zeros((0, r1, r2, m), dtype=INT), truncated
    return _decode(acc_codes, nvars, D), acc_prods, truncated


def dp_mul(expsA, coefsA, expsB, coefsB, D, binom, S, pN):
    if kernel_mode() == "numba":
        return dp_mul_numba(expsA, coefsA, expsB, coefsB, D, binom, S, pN)
    return dp_mul_numpy(expsA, coefsA, expsB, coefsB, D, binom, S, pN)
