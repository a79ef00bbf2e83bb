"""Exact arithmetic in towers of finite rings over Z/p^N.

The base ring is O_K/p^N = (Z/p^N)[u]/E(u) for an Eisenstein polynomial E,
with uniformizer pi = (class of u) and the derived constant a = E'(pi).
On top of it sit the cyclotomic extension adjoining a primitive p-th root of
unity, a Laurent ring in one formal invertible variable lambda, and a
truncated Laurent-polynomial ring in geometric variables T_1..T_d.

Elements are numpy int64 coefficient vectors reduced mod p^N, wrapped in
:class:`RingElt` together with a guaranteed absolute precision floor.
Equality is always tested at the minimum floor of the operands; dividing by
p^m lowers the floor by m and requires divisibility of the stored residues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

INT = np.int64


class RingError(Exception):
    pass


class NotInvertibleError(RingError):
    pass


class DivisionError(RingError):
    """Division by p^m of an element that is not divisible at the floor."""


class PrecisionError(RingError):
    """An operation exhausted the tracked precision."""


class TruncationError(RingError):
    """A product escaped a configured degree window with a nonzero coefficient."""


class NonConvergenceError(RingError):
    """A p-adic series failed to terminate within the configured bound."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in range(2, int(math.isqrt(n)) + 1):
        if n % q == 0:
            return False
    return True


@dataclass(frozen=True)
class PrimeConfig:
    """Prime p, absolute precision exponent N and Eisenstein polynomial E.

    ``E_coeffs`` lists the integer coefficients of E(u) from the constant
    term up to the (monic) leading term, so ``len(E_coeffs) == e + 1``.
    """

    p: int
    N: int
    E_coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "E_coeffs", tuple(int(c) for c in self.E_coeffs))
        if not _is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.N < 2:
            raise ValueError("precision exponent N must be >= 2")
        E = self.E_coeffs
        if len(E) < 2:
            raise ValueError("E must have degree >= 1")
        if E[-1] != 1:
            raise ValueError("E must be monic")
        if any(c % self.p for c in E[:-1]):
            raise ValueError("E is not Eisenstein: p must divide all lower coefficients")
        if E[0] % (self.p ** 2) == 0:
            raise ValueError("E is not Eisenstein: p^2 divides the constant term")

    @property
    def e(self) -> int:
        return len(self.E_coeffs) - 1


class Ring:
    """Common interface: elements are int64 arrays of shape ``vec_shape``.

    Subclasses fill in ``vec_shape`` plus the multiplication rule.  All raw
    helpers operate on arrays with arbitrary leading (broadcast) axes.
    """

    p: int
    N: int
    pN: int
    vec_shape: tuple[int, ...]
    label: str

    # -- raw array helpers -------------------------------------------------
    def zero_vec(self):
        return np.zeros(self.vec_shape, dtype=INT)

    def one_vec(self):
        raise NotImplementedError

    def from_int(self, n: int):
        return self.one_vec() * (int(n) % self.pN) % self.pN

    def mul_vec(self, A, B):
        raise NotImplementedError

    def residue_image(self, vec) -> int:
        """Image in the residue field F_p of the local mod-p quotient."""
        raise NotImplementedError

    def invert_vec(self, vec):
        """Newton inversion mod p^N seeded from the residue field."""
        r = self.residue_image(vec) % self.p
        if r == 0:
            raise NotInvertibleError(f"element has residue 0 in F_{self.p}")
        x = self.one_vec() * pow(int(r), -1, self.p)
        two = self.from_int(2)
        for _ in range(40):
            err = (two - self.mul_vec(vec, x)) % self.pN
            x_next = self.mul_vec(x, err)
            if np.array_equal(x_next, x):
                break
            x = x_next
        if not np.array_equal(self.mul_vec(vec, x), self.one_vec()):
            raise NotInvertibleError("Newton inversion did not converge")
        return x

    def val_lower_bound(self, vec, prec: int) -> Fraction:
        """Sound lower bound for the p-adic valuation (exact on chain rings)."""
        raise NotImplementedError

    # -- wrapped elements --------------------------------------------------
    def elt(self, vec, prec: int | None = None) -> "RingElt":
        vec = np.asarray(vec, dtype=INT) % self.pN
        if vec.shape != self.vec_shape:
            raise ValueError(f"bad element shape {vec.shape} for {self.label}")
        return RingElt(self, vec, self.N if prec is None else prec)

    def zero(self) -> "RingElt":
        return self.elt(self.zero_vec())

    def one(self) -> "RingElt":
        return self.elt(self.one_vec())

    def integer(self, n: int) -> "RingElt":
        return self.elt(self.from_int(n))

    def __repr__(self):
        return f"<{self.label}>"


def divide_vec_by_p_power(ring: Ring, vec, m: int, prec: int):
    """Divide the residue vector by p^m, checking divisibility at the floor."""
    if m == 0:
        return vec % ring.pN, prec
    if m < 0:
        return (vec * ring.p ** (-m)) % ring.pN, prec
    if prec - m <= 0:
        raise PrecisionError(f"division by p^{m} exhausts precision floor {prec}")
    pm = ring.p ** m
    known = vec % (ring.p ** min(prec, ring.N))
    if np.any(known % pm):
        raise DivisionError(f"element not divisible by p^{m} at precision {prec}")
    return (vec // pm) % ring.pN, prec - m


def divide_vec_by_int(ring: Ring, vec, k: int, prec: int):
    """Exact division by a nonzero integer: invert the unit part, strip the p-part."""
    if k == 0:
        raise ZeroDivisionError
    sign = -1 if k < 0 else 1
    k = abs(k)
    m = 0
    while k % ring.p == 0:
        k //= ring.p
        m += 1
    out = (vec * (sign * pow(k, -1, ring.pN))) % ring.pN
    return divide_vec_by_p_power(ring, out, m, prec)


class RingElt:
    """Immutable scalar with a tracked absolute precision floor."""

    __slots__ = ("ring", "vec", "prec")

    def __init__(self, ring: Ring, vec, prec: int):
        self.ring = ring
        self.vec = np.asarray(vec, dtype=INT) % ring.pN
        self.vec.setflags(write=False)
        self.prec = min(int(prec), ring.N)

    # -- basics -----------------------------------------------------------
    def _coerce(self, other) -> "RingElt":
        if isinstance(other, RingElt):
            if other.ring is not self.ring:
                raise ValueError("mixed rings; embed explicitly")
            return other
        if isinstance(other, (int, np.integer)):
            return self.ring.integer(int(other))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RingElt(self.ring, (self.vec + o.vec) % self.ring.pN, min(self.prec, o.prec))

    __radd__ = __add__

    def __neg__(self):
        return RingElt(self.ring, (-self.vec) % self.ring.pN, self.prec)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RingElt(self.ring, (self.vec - o.vec) % self.ring.pN, min(self.prec, o.prec))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RingElt(self.ring, self.ring.mul_vec(self.vec, o.vec), min(self.prec, o.prec))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.ring.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def inverse(self) -> "RingElt":
        return RingElt(self.ring, self.ring.invert_vec(self.vec), self.prec)

    def divide_by_p_power(self, m: int) -> "RingElt":
        vec, prec = divide_vec_by_p_power(self.ring, self.vec, m, self.prec)
        return RingElt(self.ring, vec, prec)

    def divide_by_int(self, k: int) -> "RingElt":
        vec, prec = divide_vec_by_int(self.ring, self.vec, k, self.prec)
        return RingElt(self.ring, vec, prec)

    def eq(self, other) -> bool:
        o = self._coerce(other)
        prec = min(self.prec, o.prec, self.ring.N)
        pm = self.ring.p ** prec
        return not np.any((self.vec - o.vec) % pm)

    def is_zero(self) -> bool:
        pm = self.ring.p ** min(self.prec, self.ring.N)
        return not np.any(self.vec % pm)

    def val_lower_bound(self) -> Fraction:
        return self.ring.val_lower_bound(self.vec, self.prec)

    def __repr__(self):
        return f"RingElt({self.ring.label}, {self.vec.tolist()}, prec={self.prec})"


# ---------------------------------------------------------------------------
# base ring O_K / p^N
# ---------------------------------------------------------------------------


class BaseRing(Ring):
    """(Z/p^N)[u]/E(u) with E Eisenstein; a chain ring with maximal ideal (pi)."""

    def __init__(self, cfg: PrimeConfig):
        self.cfg = cfg
        self.p = cfg.p
        self.N = cfg.N
        self.pN = cfg.p ** cfg.N
        self.e = cfg.e
        self.vec_shape = (self.e,)
        self.label = f"O_K/{cfg.p}^{cfg.N} (e={self.e})"

        e, pN = self.e, self.pN
        # u^k in the monomial basis, for k up to 2e-2
        upows = np.zeros((max(2 * e - 1, e), e), dtype=INT)
        for k in range(e):
            upows[k, k] = 1
        for k in range(e, 2 * e - 1):
            prev = upows[k - 1]
            shifted = np.zeros(e, dtype=INT)
            shifted[1:] = prev[:-1]
            # reduce the overflow of u^e using E(u): u^e = -(a_0 + ... + a_{e-1}u^{e-1})
            top = prev[e - 1]
            red = np.array([(-c * top) % pN for c in cfg.E_coeffs[:e]], dtype=INT)
            upows[k] = (shifted + red) % pN
        self._upows = upows
        self.S = np.zeros((e, e, e), dtype=INT)
        for i in range(e):
            for j in range(e):
                self.S[i, j] = upows[i + j]

        self.pi_vec = upows[1] % pN if e > 1 else np.array([(-cfg.E_coeffs[0]) % pN], dtype=INT)
        # a = E'(pi)
        acc = self.zero_vec()
        pivec = self.pi_vec
        pipow = self.one_vec()
        for i in range(1, e + 1):
            if i > 1:
                pipow = self.mul_vec(pipow, pivec)
            acc = (acc + i * cfg.E_coeffs[i] * pipow) % pN
        self.a_vec = acc
        # pi^e / p is a unit w; p/pi = pi^(e-1) * w^(-1) drives division by pi
        pie = np.array([(-c) % pN for c in cfg.E_coeffs[:e]], dtype=INT)
        w = (pie // self.p) % pN  # Eisenstein: every coefficient of pi^e is divisible by p
        self._w_inv = self.invert_vec(w)
        piem1 = self.one_vec()
        for _ in range(e - 1):
            piem1 = self.mul_vec(piem1, pivec)
        self._p_over_pi = self.mul_vec(piem1, self._w_inv)

    def one_vec(self):
        v = self.zero_vec()
        v[0] = 1
        return v

    def mul_vec(self, A, B):
        A = np.asarray(A, dtype=INT) % self.pN
        B = np.asarray(B, dtype=INT) % self.pN
        T = np.einsum("...x,xyz->...yz", A, self.S) % self.pN
        return np.einsum("...yz,...y->...z", T, B) % self.pN

    def residue_image(self, vec) -> int:
        return int(vec[0] % self.p)

    def div_pi_vec(self, vec):
        """Divide by pi; valid modulo one fewer power of pi than the input."""
        c0 = int(vec[0])
        if c0 % self.p:
            raise DivisionError("element is a unit: not divisible by pi")
        rest = np.zeros(self.e, dtype=INT)
        rest[: self.e - 1] = vec[1:]
        return (rest + (c0 // self.p) * self._p_over_pi) % self.pN

    def val_pi(self, vec, prec: int | None = None) -> int:
        """pi-adic valuation in 0..e*prec, where e*prec encodes `zero at floor`."""
        prec = self.N if prec is None else min(prec, self.N)
        cap = self.e * prec
        x = np.asarray(vec, dtype=INT) % (self.p ** prec)
        for v in range(cap):
            if x[0] % self.p:
                return v
            x = self.div_pi_vec(x)
        return cap

    def unit_part(self, vec, val: int):
        x = np.asarray(vec, dtype=INT) % self.pN
        for _ in range(val):
            x = self.div_pi_vec(x)
        return x

    def val_lower_bound(self, vec, prec: int) -> Fraction:
        v = self.val_pi(vec, prec)
        if v >= self.e * min(prec, self.N):
            return Fraction(min(prec, self.N))
        return Fraction(v, self.e)

    @property
    def pi(self) -> RingElt:
        return self.elt(self.pi_vec)

    @property
    def a(self) -> RingElt:
        return self.elt(self.a_vec)


def make_base_ring(cfg: PrimeConfig) -> BaseRing:
    """Build O_K/p^N from a prime configuration, rejecting non-Eisenstein input."""
    return BaseRing(cfg)


# ---------------------------------------------------------------------------
# cyclotomic extension O_K[z]/Phi_p(z)
# ---------------------------------------------------------------------------


class CycloRing(Ring):
    """base[z]/Phi_p(z); basis u^i z^j flattened as j*e + i.

    For ramified E this quotient can fail to be a domain; every consumer only
    relies on ring identities, so nothing here assumes integrality.
    """

    def __init__(self, base: BaseRing):
        self.base = base
        self.p = base.p
        self.N = base.N
        self.pN = base.pN
        self.e = base.e
        self.deg_z = self.p - 1
        self.dim = self.e * self.deg_z
        self.vec_shape = (self.dim,)
        self.label = base.label + f"[z]/Phi_{self.p}"

        dz, pN = self.deg_z, self.pN
        zpows = np.zeros((max(2 * dz - 1, dz), dz), dtype=INT)
        for k in range(dz):
            zpows[k, k] = 1
        for k in range(dz, 2 * dz - 1):
            prev = zpows[k - 1]
            shifted = np.zeros(dz, dtype=INT)
            shifted[1:] = prev[:-1]
            red = (-prev[dz - 1]) * np.ones(dz, dtype=INT)  # z^(p-1) = -(1+z+...+z^(p-2))
            zpows[k] = (shifted + red) % pN
        self._zpows_small = zpows

        m = self.dim
        S = np.zeros((m, m, m), dtype=INT)
        for j1 in range(dz):
            for j2 in range(dz):
                zred = zpows[j1 + j2]  # (dz,)
                for i1 in range(self.e):
                    for i2 in range(self.e):
                        ured = base.S[i1, i2]  # (e,)
                        blk = np.einsum("a,b->ab", zred % pN, ured % pN) % pN
                        # basis index is j*e + i, so flatten z-major
                        S[j1 * self.e + i1, j2 * self.e + i2] = blk.flatten()
        self.S = S % pN

        zv = self.zero_vec()
        if dz > 1:
            zv[self.e] = 1  # z^1 u^0
        else:
            zv[0] = (-1) % pN  # p = 2: z = -1
        self.zeta_vec = zv

        # substitution z -> z^k as an m x m matrix, for k = 1..p-1
        self._zsub = {}
        zbig = self._zpow_table((self.p - 1) * (dz - 1) + 1 if dz > 1 else 2)
        for k in range(1, self.p):
            M = np.zeros((m, m), dtype=INT)
            for j in range(dz):
                red = zbig[j * k]
                for i in range(self.e):
                    for j2 in range(dz):
                        M[j2 * self.e + i, j * self.e + i] = red[j2]
            self._zsub[k] = M % pN

    def _zpow_table(self, upto: int):
        dz, pN = self.deg_z, self.pN
        tbl = np.zeros((upto + 1, dz), dtype=INT)
        tbl[0, 0] = 1
        for k in range(1, upto + 1):
            prev = tbl[k - 1]
            shifted = np.zeros(dz, dtype=INT)
            if dz > 1:
                shifted[1:] = prev[:-1]
                red = (-prev[dz - 1]) * np.ones(dz, dtype=INT)
                tbl[k] = (shifted + red) % pN
            else:
                tbl[k] = (-prev) % pN  # z = -1
        return tbl

    def one_vec(self):
        v = self.zero_vec()
        v[0] = 1
        return v

    def mul_vec(self, A, B):
        A = np.asarray(A, dtype=INT) % self.pN
        B = np.asarray(B, dtype=INT) % self.pN
        T = np.einsum("...x,xyz->...yz", A, self.S) % self.pN
        return np.einsum("...yz,...y->...z", T, B) % self.pN

    def residue_image(self, vec) -> int:
        # u -> 0, z -> 1: local artinian quotient with residue field F_p
        return int(np.asarray(vec)[0 :: self.e].sum() % self.p)

    def embed_base(self, vec):
        out = self.zero_vec()
        out[: self.e] = vec
        return out

    def zsub_vec(self, vec, k: int):
        k = int(k) % self.p
        if k == 0:
            raise ValueError("z -> z^k needs k prime to p")
        return (self._zsub[k] @ (np.asarray(vec, dtype=INT) % self.pN)) % self.pN

    def val_lower_bound(self, vec, prec: int) -> Fraction:
        prec = min(prec, self.N)
        pm = self.p ** prec
        x = np.asarray(vec) % pm
        if not np.any(x):
            return Fraction(prec)
        # rewrite in the basis u^i (z-1)^j to read off valuation offsets
        best = None
        y = x.reshape(self.deg_z, self.e).astype(object)
        # binomial transform: coefficients w.r.t. (z-1)^j are sums of binom weights
        for j in range(self.deg_z):
            # coefficient of (z-1)^j equals sum_{t>=j} binom(t, j) c_t
            coef = np.zeros(self.e, dtype=object)
            for t in range(j, self.deg_z):
                coef = coef + math.comb(t, j) * y[t]
            coef = coef % pm
            for i in range(self.e):
                c = int(coef[i])
                if c % pm == 0:
                    continue
                vp = 0
                while c % self.p == 0:
                    c //= self.p
                    vp += 1
                cand = Fraction(vp) + Fraction(i, self.e) + Fraction(j, self.p - 1)
                if best is None or cand < best:
                    best = cand
        return Fraction(prec) if best is None else min(best, Fraction(prec))

    @property
    def zeta(self) -> RingElt:
        return self.elt(self.zeta_vec)

    @property
    def pi(self) -> RingElt:
        return self.elt(self.embed_base(self.base.pi_vec))

    @property
    def a(self) -> RingElt:
        return self.elt(self.embed_base(self.base.a_vec))


def adjoin_zeta(base: BaseRing) -> CycloRing:
    return CycloRing(base)


# ---------------------------------------------------------------------------
# formal-lambda Laurent ring over the cyclotomic ring
# ---------------------------------------------------------------------------


class LambdaRing(Ring):
    """Laurent polynomials in one formal invertible variable over CycloRing.

    Exponents live in [-bound, bound]; a product coefficient escaping the
    window raises :class:`TruncationError` unless it vanishes at the floor.
    lambda itself carries no numeric value, only the Galois transformation
    law implemented in :mod:`prismhiggs.galois`.
    """

    def __init__(self, cyclo: CycloRing, bound: int | None = None):
        self.cyclo = cyclo
        self.p = cyclo.p
        self.N = cyclo.N
        self.pN = cyclo.pN
        self.mc = cyclo.dim
        self.bound = int(bound) if bound is not None else 2 * self.N + 8
        self.L = 2 * self.bound + 1
        self.vec_shape = (self.L, self.mc)
        self.label = cyclo.label + f"((lambda)) bound={self.bound}"

    def one_vec(self):
        v = self.zero_vec()
        v[self.bound, 0] = 1
        return v

    def lambda_power_vec(self, k: int):
        if abs(k) > self.bound:
            raise TruncationError(f"lambda^{k} outside bound {self.bound}")
        v = self.zero_vec()
        v[self.bound + k, 0] = 1
        return v

    def embed_cyclo(self, vec):
        out = self.zero_vec()
        out[self.bound] = vec
        return out

    def cyclo_scale(self, vec, cvec):
        """Multiply every lambda-coefficient by one cyclotomic scalar."""
        T = np.einsum("...ax,xyz->...ayz", np.asarray(vec, dtype=INT) % self.pN, self.cyclo.S) % self.pN
        return np.einsum("...ayz,y->...az", T, np.asarray(cvec, dtype=INT) % self.pN) % self.pN

    def mul_vec(self, A, B, prec: int | None = None):
        prec = self.N if prec is None else min(prec, self.N)
        A = np.asarray(A, dtype=INT) % self.pN
        B = np.asarray(B, dtype=INT) % self.pN
        T = np.einsum("...ax,xyz->...ayz", A, self.cyclo.S) % self.pN
        P = np.einsum("...ayz,...by->...abz", T, B) % self.pN  # (..., L, L, mc)
        L, mc = self.L, self.mc
        lead = P.shape[:-3]
        full = np.zeros(lead + (2 * L - 1, mc), dtype=INT)
        for a in range(L):
            full[..., a : a + L, :] = (full[..., a : a + L, :] + P[..., a, :, :]) % self.pN
        lo, hi = self.bound, self.bound + L
        out = full[..., lo:hi, :]
        spill = np.concatenate([full[..., :lo, :], full[..., hi:, :]], axis=-2)
        pm = self.p ** prec
        if np.any(spill % pm):
            raise TruncationError("lambda-degree overflow with a nonzero coefficient")
        return out % self.pN

    def residue_image(self, vec) -> int:
        return self.cyclo.residue_image(vec[self.bound])

    def invert_vec(self, vec, prec: int | None = None):
        """Invert lambda^s * (unit + topologically nilpotent tail)."""
        prec = self.N if prec is None else min(prec, self.N)
        pm = self.p ** prec
        x = np.asarray(vec, dtype=INT) % self.pN
        support = [k for k in range(self.L) if np.any(x[k] % pm)]
        if not support:
            raise NotInvertibleError("zero element")
        last_err = None
        for s in support:
            try:
                c_inv = self.cyclo.invert_vec(x[s])
            except NotInvertibleError as exc:
                last_err = exc
                continue
            shift = self.bound - s  # multiply by lambda^shift moves slot s to the center
            try:
                w = self._shift(x, shift, pm)
            except TruncationError as exc:
                last_err = exc
                continue
            w = self.cyclo_scale(w, c_inv)
            n = w.copy()
            n[self.bound] = (n[self.bound] - self.cyclo.one_vec()) % self.pN
            acc = self.one_vec()
            term = self.one_vec()
            ok = False
            for _ in range(4 * self.N * (self.p - 1) + 8):
                term = self.mul_vec(term, (-n) % self.pN, prec)
                if not np.any(term % pm):
                    ok = True
                    break
                acc = (acc + term) % self.pN
            if not ok:
                last_err = NonConvergenceError("Neumann series for lambda-inverse did not terminate")
                continue
            inv_w = self.cyclo_scale(acc, c_inv)
            try:
                return self._shift(inv_w, shift, pm)
            except TruncationError as exc:
                last_err = exc
                continue
        raise last_err if last_err is not None else NotInvertibleError("no invertible lambda coefficient")

    def _shift(self, vec, k: int, pm: int):
        out = np.zeros_like(vec)
        if k >= 0:
            out[k:] = vec[: self.L - k]
            spill = vec[self.L - k :]
        else:
            out[: self.L + k] = vec[-k:]
            spill = vec[: -k]
        if np.any(spill % pm):
            raise TruncationError("lambda-degree overflow during shift")
        return out

    def subst_lambda_vec(self, vec, mu_vec, prec: int):
        """Evaluate a Laurent polynomial at lambda = mu (mu invertible)."""
        pm = self.p ** min(prec, self.N)
        out = self.zero_vec()
        pos = [k for k in range(self.L) if np.any(vec[k] % pm)]
        if not pos:
            return out
        mu_inv = None
        powers: dict[int, np.ndarray] = {0: self.one_vec()}

        def mu_pow(n: int):
            nonlocal mu_inv
            if n in powers:
                return powers[n]
            if n > 0:
                powers[n] = self.mul_vec(mu_pow(n - 1), mu_vec, prec)
            else:
                if mu_inv is None:
                    mu_inv = self.invert_vec(mu_vec, prec)
                powers[n] = self.mul_vec(mu_pow(n + 1), mu_inv, prec)
            return powers[n]

        for k in pos:
            coef = self.embed_cyclo(vec[k])
            out = (out + self.mul_vec(coef, mu_pow(k - self.bound), prec)) % self.pN
        return out

    def zsub_vec(self, vec, k: int):
        return np.stack([self.cyclo.zsub_vec(row, k) for row in vec]) % self.pN

    def val_lower_bound(self, vec, prec: int) -> Fraction:
        prec = min(prec, self.N)
        pm = self.p ** prec
        best = Fraction(prec)
        any_nz = False
        for k in range(self.L):
            if np.any(vec[k] % pm):
                any_nz = True
                best = min(best, self.cyclo.val_lower_bound(vec[k], prec))
        return best if any_nz else Fraction(prec)

    @property
    def lam(self) -> RingElt:
        return self.elt(self.lambda_power_vec(1))

    @property
    def zeta(self) -> RingElt:
        return self.elt(self.embed_cyclo(self.cyclo.zeta_vec))

    @property
    def pi(self) -> RingElt:
        return self.elt(self.embed_cyclo(self.cyclo.embed_base(self.cyclo.base.pi_vec)))

    @property
    def a(self) -> RingElt:
        return self.elt(self.embed_cyclo(self.cyclo.embed_base(self.cyclo.base.a_vec)))


def adjoin_formal_lambda(cyclo: CycloRing, bound: int | None = None) -> LambdaRing:
    return LambdaRing(cyclo, bound)


# ---------------------------------------------------------------------------
# truncated Laurent coefficient ring O_K<T_1^{+-1},...,T_d^{+-1}>
# ---------------------------------------------------------------------------


class LaurentCoeffRing(Ring):
    """Base-ring coefficients with d geometric Laurent variables T_s.

    Exponents are kept in [-T_degree_bound, T_degree_bound] per variable;
    products escaping the window raise rather than silently dropping terms.
    """

    def __init__(self, base: BaseRing, d: int, T_degree_bound: int):
        self.base = base
        self.p = base.p
        self.N = base.N
        self.pN = base.pN
        self.d = int(d)
        self.Tbound = int(T_degree_bound)
        self.W = 2 * self.Tbound + 1
        self.vec_shape = (self.W,) * self.d + (base.e,)
        self.label = base.label + f"<T^±1 x{d}> bound={self.Tbound}"

    def one_vec(self):
        v = self.zero_vec()
        v[(self.Tbound,) * self.d + (0,)] = 1
        return v

    def monomial_vec(self, exps, coeff_vec=None):
        if len(exps) != self.d:
            raise ValueError("need one exponent per T variable")
        if any(abs(int(t)) > self.Tbound for t in exps):
            raise TruncationError("T-degree outside the configured bound")
        v = self.zero_vec()
        idx = tuple(self.Tbound + int(t) for t in exps)
        v[idx] = self.base.one_vec() if coeff_vec is None else np.asarray(coeff_vec) % self.pN
        return v

    def mul_vec(self, A, B, prec: int | None = None):
        prec = self.N if prec is None else min(prec, self.N)
        pm = self.p ** prec
        A = np.asarray(A, dtype=INT) % self.pN
        B = np.asarray(B, dtype=INT) % self.pN
        lead = A.shape[: -(self.d + 1)]
        T = np.einsum("...x,xyz->...yz", A, self.base.S) % self.pN
        Wfull = 2 * self.W - 1
        out_full = np.zeros(lead + (Wfull,) * self.d + (self.base.e,), dtype=INT)
        it = np.ndindex(*((self.W,) * self.d))
        for ia in it:
            blkT = T[(Ellipsis,) + ia + (slice(None), slice(None))]
            if not np.any(blkT):
                continue
            for ib in np.ndindex(*((self.W,) * self.d)):
                blkB = B[(Ellipsis,) + ib + (slice(None),)]
                if not np.any(blkB):
                    continue
                tgt = tuple(x + y for x, y in zip(ia, ib))
                contrib = np.einsum("...yz,...y->...z", blkT, blkB) % self.pN
                sl = (Ellipsis,) + tgt + (slice(None),)
                out_full[sl] = (out_full[sl] + contrib) % self.pN
        lo, hi = self.Tbound, self.Tbound + self.W
        window = (Ellipsis,) + tuple(slice(lo, hi) for _ in range(self.d)) + (slice(None),)
        out = out_full[window]
        mask = np.ones(out_full.shape, dtype=bool)
        mask[window] = False
        if np.any((out_full % pm)[mask]):
            raise TruncationError("T-degree overflow with a nonzero coefficient")
        return out % self.pN

    def residue_image(self, vec) -> int:
        # specialization T_s = 1 followed by the base residue map
        flat = np.asarray(vec).reshape(-1, self.base.e).sum(axis=0) % self.pN
        return self.base.residue_image(flat)

    def embed_base(self, vec):
        out = self.zero_vec()
        out[(self.Tbound,) * self.d] = np.asarray(vec) % self.pN
        return out

    def specialize_T1_vec(self, vec):
        return np.asarray(vec).reshape(-1, self.base.e).sum(axis=0) % self.pN

    def val_lower_bound(self, vec, prec: int) -> Fraction:
        prec = min(prec, self.N)
        pm = self.p ** prec
        flat = np.asarray(vec).reshape(-1, self.base.e)
        best = Fraction(prec)
        nz = False
        for row in flat:
            if np.any(row % pm):
                nz = True
                best = min(best, self.base.val_lower_bound(row, prec))
        return best if nz else Fraction(prec)

    @property
    def pi(self) -> RingElt:
        return self.elt(self.embed_base(self.base.pi_vec))

    @property
    def a(self) -> RingElt:
        return self.elt(self.embed_base(self.base.a_vec))


# ---------------------------------------------------------------------------
# helpers shared by the series code
# ---------------------------------------------------------------------------


def vp_int(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("vp(0)")
    v = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_factorial(n: int, p: int) -> int:
    v, q = 0, p
    while q <= n:
        v += n // q
        q *= p
    return v
