"""Matrices over the finite rings of :mod:`prismhiggs.rings`.

A matrix stores one int64 array of shape ``(rows, cols) + ring.vec_shape``
plus a single precision floor for the whole block.  Products route through
the ring's structure tensor, so the same class serves the base ring, the
cyclotomic extension, the formal-lambda ring and the truncated T-Laurent
ring alike.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .rings import (
    INT,
    NonConvergenceError,
    PrecisionError,
    Ring,
    RingElt,
    divide_vec_by_int,
    divide_vec_by_p_power,
    vp_factorial,
)


class Matrix:
    __slots__ = ("ring", "arr", "prec")

    def __init__(self, ring: Ring, arr, prec: int | None = None):
        self.ring = ring
        self.arr = np.asarray(arr, dtype=INT) % ring.pN
        vs = ring.vec_shape
        if self.arr.shape[2:] != vs or self.arr.ndim != 2 + len(vs):
            raise ValueError(f"bad matrix shape {self.arr.shape} over {ring.label}")
        self.arr.setflags(write=False)
        self.prec = min(ring.N if prec is None else int(prec), ring.N)

    # -- constructors -------------------------------------------------------
    @staticmethod
    def zeros(ring: Ring, rows: int, cols: int, prec: int | None = None) -> "Matrix":
        return Matrix(ring, np.zeros((rows, cols) + ring.vec_shape, dtype=INT), prec)

    @staticmethod
    def identity(ring: Ring, n: int, prec: int | None = None) -> "Matrix":
        arr = np.zeros((n, n) + ring.vec_shape, dtype=INT)
        one = ring.one_vec()
        for i in range(n):
            arr[i, i] = one
        return Matrix(ring, arr, prec)

    @staticmethod
    def from_int_entries(ring: Ring, entries) -> "Matrix":
        ent = np.asarray(entries, dtype=object)
        rows, cols = ent.shape
        arr = np.zeros((rows, cols) + ring.vec_shape, dtype=INT)
        for i in range(rows):
            for j in range(cols):
                arr[i, j] = ring.from_int(int(ent[i, j]))
        return Matrix(ring, arr)

    @staticmethod
    def from_scalar_entries(ring: Ring, entries) -> "Matrix":
        rows = len(entries)
        cols = len(entries[0])
        arr = np.zeros((rows, cols) + ring.vec_shape, dtype=INT)
        prec = ring.N
        for i in range(rows):
            for j in range(cols):
                s = entries[i][j]
                arr[i, j] = s.vec
                prec = min(prec, s.prec)
        return Matrix(ring, arr, prec)

    # -- shape --------------------------------------------------------------
    @property
    def rows(self) -> int:
        return self.arr.shape[0]

    @property
    def cols(self) -> int:
        return self.arr.shape[1]

    def entry(self, i: int, j: int) -> RingElt:
        return RingElt(self.ring, self.arr[i, j], self.prec)

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other: "Matrix") -> "Matrix":
        return Matrix(self.ring, (self.arr + other.arr) % self.ring.pN, min(self.prec, other.prec))

    def __sub__(self, other: "Matrix") -> "Matrix":
        return Matrix(self.ring, (self.arr - other.arr) % self.ring.pN, min(self.prec, other.prec))

    def __neg__(self) -> "Matrix":
        return Matrix(self.ring, (-self.arr) % self.ring.pN, self.prec)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if other.ring is not self.ring:
            raise ValueError("mixed rings in matrix product")
        prec = min(self.prec, other.prec)
        if self.rows == 0 or self.cols == 0 or other.cols == 0:
            return Matrix.zeros(self.ring, self.rows, other.cols, prec)
        A = self.arr.reshape(self.rows, self.cols, -1)
        B = other.arr.reshape(other.rows, other.cols, -1)
        ring = self.ring
        from .rings import LambdaRing, LaurentCoeffRing

        if isinstance(ring, (LambdaRing, LaurentCoeffRing)):
            out = np.zeros((self.rows, other.cols) + ring.vec_shape, dtype=INT)
            for i in range(self.rows):
                for j in range(other.cols):
                    acc = ring.zero_vec()
                    for k in range(self.cols):
                        acc = (acc + ring.mul_vec(self.arr[i, k], other.arr[k, j], prec)) % ring.pN
                    out[i, j] = acc
            return Matrix(ring, out, prec)
        S = ring.S
        T = np.einsum("ikx,xyz->ikyz", A % ring.pN, S) % ring.pN
        C = np.einsum("ikyz,kjy->ijz", T, B % ring.pN) % ring.pN
        return Matrix(ring, C.reshape((self.rows, other.cols) + ring.vec_shape), prec)

    def scale(self, s) -> "Matrix":
        """Multiply by a ring scalar or Python int."""
        ring = self.ring
        if isinstance(s, (int, np.integer)):
            return Matrix(ring, (self.arr * (int(s) % ring.pN)) % ring.pN, self.prec)
        if s.ring is not ring:
            raise ValueError("scalar from a different ring")
        from .rings import LambdaRing, LaurentCoeffRing

        prec = min(self.prec, s.prec)
        if isinstance(ring, (LambdaRing, LaurentCoeffRing)):
            out = np.zeros_like(self.arr)
            for i in range(self.rows):
                for j in range(self.cols):
                    out[i, j] = ring.mul_vec(self.arr[i, j], s.vec, prec)
            return Matrix(ring, out, prec)
        T = np.einsum("...x,xyz->...yz", self.arr, ring.S) % ring.pN
        return Matrix(ring, np.einsum("...yz,y->...z", T, s.vec) % ring.pN, prec)

    def transpose(self) -> "Matrix":
        return Matrix(self.ring, np.swapaxes(self.arr, 0, 1), self.prec)

    def kron(self, other: "Matrix") -> "Matrix":
        """Tensor product of operators: (A⊗B)[(i,k),(j,l)] = A[i,j]·B[k,l]."""
        ring = self.ring
        r1, c1, r2, c2 = self.rows, self.cols, other.rows, other.cols
        prec = min(self.prec, other.prec)
        out = np.zeros((r1 * r2, c1 * c2) + ring.vec_shape, dtype=INT)
        for i in range(r1):
            for j in range(c1):
                for k in range(r2):
                    for l in range(c2):
                        out[i * r2 + k, j * c2 + l] = ring.mul_vec(self.arr[i, j], other.arr[k, l])
        return Matrix(ring, out, prec)

    def divide_by_p_power(self, m: int) -> "Matrix":
        vec, prec = divide_vec_by_p_power(self.ring, self.arr, m, self.prec)
        return Matrix(self.ring, vec, prec)

    def divide_by_int(self, k: int) -> "Matrix":
        vec, prec = divide_vec_by_int(self.ring, self.arr, k, self.prec)
        return Matrix(self.ring, vec, prec)

    # -- predicates ----------------------------------------------------------
    def eq(self, other: "Matrix") -> bool:
        prec = min(self.prec, other.prec, self.ring.N)
        pm = self.ring.p ** prec
        return self.arr.shape == other.arr.shape and not np.any((self.arr - other.arr) % pm)

    def is_zero(self) -> bool:
        pm = self.ring.p ** min(self.prec, self.ring.N)
        return not np.any(self.arr % pm)

    def commutator(self, other: "Matrix") -> "Matrix":
        return self @ other - other @ self

    def add_scalar_identity(self, s) -> "Matrix":
        """self + s*Id for a ring scalar or int."""
        ring = self.ring
        if isinstance(s, (int, np.integer)):
            svec = ring.from_int(int(s))
            sprec = self.prec
        else:
            svec, sprec = s.vec, s.prec
        arr = self.arr.copy()
        for i in range(self.rows):
            arr[i, i] = (arr[i, i] + svec) % ring.pN
        return Matrix(ring, arr, min(self.prec, sprec))

    def map_ring(self, ring: Ring, fn) -> "Matrix":
        """Apply an entrywise coefficient-vector map into ``ring``."""
        out = np.zeros((self.rows, self.cols) + ring.vec_shape, dtype=INT)
        for i in range(self.rows):
            for j in range(self.cols):
                out[i, j] = fn(self.arr[i, j])
        return Matrix(ring, out, self.prec)

    def val_lower_bound(self) -> Fraction:
        best = Fraction(min(self.prec, self.ring.N))
        for i in range(self.rows):
            for j in range(self.cols):
                best = min(best, self.ring.val_lower_bound(self.arr[i, j], self.prec))
        return best

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols} over {self.ring.label}, prec={self.prec})"


class NilpotencyError(Exception):
    pass


def nilpotency_index(M: Matrix, bound: int | None = None) -> int:
    """Smallest k with M^k = 0 at the floor; raises if none up to the bound."""
    bound = bound if bound is not None else M.rows + 1
    P = Matrix.identity(M.ring, M.rows, M.prec)
    for k in range(bound + 1):
        if P.is_zero():
            return k
        P = P @ M
    raise NilpotencyError(f"matrix is not nilpotent within exponent {bound}")


def exp_nilpotent(M: Matrix, bound: int | None = None) -> Matrix:
    """exp(M) = sum M^k / k! for nilpotent M; k! divisions must be exact."""
    n = nilpotency_index(M, bound if bound is not None else 4 * M.rows)
    acc = Matrix.identity(M.ring, M.rows, M.prec)
    term = Matrix.identity(M.ring, M.rows, M.prec)
    for k in range(1, n):
        term = (term @ M).divide_by_int(k)
        acc = acc + term
    return acc


def log_unipotent(M: Matrix, bound: int | None = None) -> Matrix:
    """log(M) = sum (-1)^(k+1) (M-1)^k / k for unipotent M."""
    D = M - Matrix.identity(M.ring, M.rows, M.prec)
    n = nilpotency_index(D, bound if bound is not None else 4 * M.rows)
    acc = Matrix.zeros(M.ring, M.rows, M.rows, M.prec)
    P = Matrix.identity(M.ring, M.rows, M.prec)
    for k in range(1, n):
        P = P @ D
        t = P.divide_by_int(k)
        acc = acc + t if k % 2 == 1 else acc - t
    return acc


def binomial_product_coefficients(
    phi: Matrix, a: RingElt, kmax: int, require_zero_tail: bool = False
) -> list[Matrix]:
    """Return [prod_{j<k} (phi + j*a) for k = 0..], stopping once the product
    vanishes at the floor (it then stays zero).  With ``require_zero_tail``
    a nonvanishing product at ``kmax`` raises :class:`NonConvergenceError`.
    """
    coeffs = [Matrix.identity(phi.ring, phi.rows, phi.prec)]
    cur = coeffs[0]
    for k in range(kmax):
        cur = cur @ phi.add_scalar_identity(a * k)
        if cur.is_zero():
            break
        coeffs.append(cur)
    else:
        if require_zero_tail:
            raise NonConvergenceError(
                f"prod (phi + j a) did not vanish at precision within {kmax} factors"
            )
    return coeffs


def op_binomial_series_scalar(phi: Matrix, a: RingElt, z: RingElt, max_terms: int) -> Matrix:
    """(1 - a*z)^(-phi/a) evaluated at the scalar z: sum prod_{j<k}(phi+ja) z^[k].

    ``z`` must lie in the same ring as ``phi``; divided powers z^[k] = z^k/k!
    are produced by stepwise exact division, so either the enhancement
    condition on phi or val(z) > 1/(p-1) must make the terms vanish.
    """
    ring = phi.ring
    acc = Matrix.identity(ring, phi.rows, phi.prec)
    # whole-term recursion u_k = u_{k-1} (phi + (k-1)a) z / k, so that the
    # factorial is divided out of the complete term (the operator product can
    # carry the compensating p-powers even when z^[k] alone is not integral)
    term = Matrix.identity(ring, phi.rows, phi.prec)
    for k in range(1, max_terms + 1):
        try:
            term = (term @ phi.add_scalar_identity(a * (k - 1))).scale(z).divide_by_int(k)
        except PrecisionError as exc:
            # term valuations stopped increasing and drained the floor instead
            raise NonConvergenceError(f"series terms do not vanish: {exc}") from exc
        if term.is_zero():
            return Matrix(ring, acc.arr, min(acc.prec, term.prec))
        acc = acc + term
    raise NonConvergenceError("binomial series truncated before its terms vanished")


def op_binomial_series_symbolic(phi: Matrix, a: RingElt, degree: int) -> list[Matrix]:
    """Divided-power coefficients of (1 - a*X)^(-phi/a) up to X^[degree]."""
    coeffs = binomial_product_coefficients(phi, a, degree, require_zero_tail=False)
    zero = Matrix.zeros(phi.ring, phi.rows, phi.rows, phi.prec)
    return [coeffs[k] if k < len(coeffs) else zero for k in range(degree + 1)]


def binomial_series_term_count(phi: Matrix, a: RingElt, z: RingElt, max_terms: int) -> int:
    """Index at which the scalar binomial series terminates (for bound checks)."""
    term = Matrix.identity(phi.ring, phi.rows, phi.prec)
    for k in range(1, max_terms + 1):
        term = (term @ phi.add_scalar_identity(a * (k - 1))).scale(z).divide_by_int(k)
        if term.is_zero():
            return k
    raise NonConvergenceError("series did not terminate")


def factorial_floor_cost(kmax: int, p: int) -> int:
    return vp_factorial(kmax, p)
