"""Truncated power series over F = Q_p(w) with certified error bounds.

A series f = sum a_n u^n is stored in the rescaled variable t = u/w, so that
f = sum b_n t^n with b_n = a_n w^n.  In this variable the valuation

    v_R2(f) = inf_n (n + 2 v_p(a_n))

is simply the w-adic Gauss valuation: the "weight" of b_n is 2 v_p(b_n).  All
weights below are integers (valuations measured in units of v(w) = 1/2).

Coefficients are held as ``(X_n + Y_n w) / p^K`` with Python integers, which
keeps the arithmetic exact and lets products go through Kronecker
substitution.  Every coefficient carries its own precision weight ``e[n]``
(b_n is known modulo w^e[n]), and ``tail`` is a certified lower bound for the
weight of everything beyond degree N that was discarded.  Together they give
certified lower bounds on v_R2 and three-valued membership tests for

    H_v = {v_R2 >= v}   and   H_v^o = {v_R2 > v}.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .padic import INF, Cert, FieldElem, PrecisionError, _reduce_rational, vp_int

# integer polynomial helpers ------------------------------------------------

def _pack(coeffs: Sequence[int], nbytes: int) -> int:
    pos = b"".join((c if c > 0 else 0).to_bytes(nbytes, "little") for c in coeffs)
    neg = b"".join((-c if c < 0 else 0).to_bytes(nbytes, "little") for c in coeffs)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _unpack(value: int, nbytes: int, length: int, count: int) -> list[int]:
    half = 1 << (8 * nbytes - 1)
    offset = int.from_bytes((b"\x00" * (nbytes - 1) + b"\x80") * length, "little")
    raw = (value + offset).to_bytes(nbytes * length, "little")
    return [
        int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") - half
        for i in range(count)
    ]


def poly_mul(a: Sequence[int], b: Sequence[int], n_keep: int) -> list[int]:
    """Product of two integer polynomials, truncated to n_keep coefficients.

    Uses Kronecker substitution for anything beyond tiny sizes.
    """
    a = list(a[:n_keep])
    b = list(b[:n_keep])
    while a and a[-1] == 0:
        a.pop()
    while b and b[-1] == 0:
        b.pop()
    out = [0] * n_keep
    if not a or not b:
        return out
    la, lb = len(a), len(b)
    if min(la, lb) <= 6:
        if la < lb:
            a, b, la, lb = b, a, lb, la
        for j, bj in enumerate(b):
            if bj:
                for i in range(min(la, n_keep - j)):
                    out[i + j] += a[i] * bj
        return out
    ma = max(abs(c) for c in a)
    mb = max(abs(c) for c in b)
    bits = ma.bit_length() + mb.bit_length() + min(la, lb).bit_length() + 2
    nbytes = (bits + 7) // 8
    prod = _pack(a, nbytes) * _pack(b, nbytes)
    length = la + lb - 1
    count = min(length, n_keep)
    out[:count] = _unpack(prod, nbytes, length, count)
    return out


def _zw_mul(X1, Y1, X2, Y2, p: int, n_keep: int):
    """(X1 + Y1 w)(X2 + Y2 w) for integer polynomials, truncated."""
    P1 = poly_mul(X1, X2, n_keep)
    P2 = poly_mul(Y1, Y2, n_keep)
    S1 = [x + y for x, y in zip(X1, Y1)]
    S2 = [x + y for x, y in zip(X2, Y2)]
    P3 = poly_mul(S1, S2, n_keep)
    X = [a + p * b for a, b in zip(P1, P2)]
    Y = [c - a - b for a, b, c in zip(P1, P2, P3)]
    return X, Y


def _minplus(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """out[k] = min_{i+j=k} a[i] + b[j] for k < n."""
    out = np.full(n, np.inf)
    if not np.isfinite(b[:n]).any():
        return out
    lb = min(len(b), n)
    for i in np.nonzero(np.isfinite(a[:n]))[0]:
        k = min(lb, n - i)
        seg = out[i:i + k]
        np.minimum(seg, a[i] + b[:k], out=seg)
    return out


def _suffix_min(a: np.ndarray) -> np.ndarray:
    return np.minimum.accumulate(a[::-1])[::-1]


def _fmin(*vals):
    m = INF
    for v in vals:
        v = float(v)
        if v < m:
            m = v
    return m


def _as_weight(v) -> float:
    return INF if v == INF else float(v)


def _smod(x: int, m: int) -> int:
    r = x % m
    return r - m if r > m // 2 else r


def _split_rational(x: Fraction, p: int) -> tuple[int, int]:
    """Write x = X / p^k with X integral; raises if x has non-p denominator."""
    d = x.denominator
    k = 0
    while d % p == 0:
        d //= p
        k += 1
    if d != 1:
        raise PrecisionError("coefficient is not representable exactly; supply a finite precision cap")
    return x.numerator, k


class TruncSeries:
    """A certified approximation of an element of R_2 (or of S_F inside it).

    Use the constructors :meth:`from_u_coeffs`, :meth:`constant`,
    :meth:`monomial`, :meth:`E_power` rather than calling ``__init__``.
    """

    __slots__ = ("p", "N", "K", "X", "Y", "e", "tail", "cap", "w")

    def __init__(self, p, N, K, X, Y, e, tail, cap):
        self.p = p
        self.N = N
        cap = _as_weight(cap)
        e = np.minimum(np.asarray(e, dtype=float), cap)
        X = list(X)
        Y = list(Y)
        pw = _PowCache(p)
        for n in range(N + 1):
            en = e[n]
            if en == INF:
                continue
            en = int(en)
            mx = K + (en + 1) // 2
            my = K + en // 2
            X[n] = _smod(X[n], pw[mx]) if mx > 0 else 0
            Y[n] = _smod(Y[n], pw[my]) if my > 0 else 0
        vx = [vp_int(c, p) for c in X]
        vy = [vp_int(c, p) for c in Y]
        shift = min(min(vx), min(vy), K)
        if shift == INF:
            K = 0
        elif shift > 0:
            q = p ** shift
            X = [c // q for c in X]
            Y = [c // q for c in Y]
            vx = [v - shift for v in vx]
            vy = [v - shift for v in vy]
            K -= shift
        self.K = K
        self.X = X
        self.Y = Y
        self.w = np.array([min(2 * a, 2 * b + 1) - 2 * K for a, b in zip(vx, vy)], dtype=float)
        self.e = e
        self.tail = min(_as_weight(tail), cap)
        self.cap = cap

    # constructors -----------------------------------------------------------

    @classmethod
    def _from_t_elems(cls, p, N, elems, e, tail, cap):
        """elems: list of (x, y) Fractions meaning b_n = x + y w."""
        cap = _as_weight(cap)
        e = np.minimum(np.asarray(e, dtype=float), cap)
        parts = []
        K = 0
        for n, (x, y) in enumerate(elems):
            en = e[n]
            if en != INF:
                x = _reduce_rational(Fraction(x), p, math.ceil(en / 2))
                y = _reduce_rational(Fraction(y), p, int(en) // 2)
            xi, kx = _split_rational(Fraction(x), p)
            yi, ky = _split_rational(Fraction(y), p)
            parts.append((xi, kx, yi, ky))
            K = max(K, kx, ky)
        X = [xi * p ** (K - kx) for xi, kx, _, _ in parts]
        Y = [yi * p ** (K - ky) for _, _, yi, ky in parts]
        return cls(p, N, K, X, Y, e, tail, cap)

    @classmethod
    def from_u_coeffs(cls, coeffs, p: int, N: int, cap=INF, tail=INF) -> "TruncSeries":
        """Series sum a_n u^n from u-coefficients (FieldElem or rationals).

        Terms beyond degree N are folded into the tail bound.
        """
        elems = []
        e = np.full(N + 1, np.inf)
        tail = _as_weight(tail)
        for n, a in enumerate(coeffs):
            if not isinstance(a, FieldElem):
                a = FieldElem(a, 0, p)
            elif a.p != p:
                raise ValueError(f"prime mismatch: {a.p} vs {p}")
            b = a * FieldElem.w_power(n, p)
            if n > N:
                tail = min(tail, _as_weight(2 * b.valuation()))
                continue
            if b.prec != INF:
                e[n] = float(2 * b.prec)
            elems.append((b.x, b.y))
        while len(elems) < N + 1:
            elems.append((Fraction(0), Fraction(0)))
        return cls._from_t_elems(p, N, elems, e, tail, cap)

    @classmethod
    def zero(cls, p, N, cap=INF):
        return cls(p, N, 0, [0] * (N + 1), [0] * (N + 1), np.full(N + 1, np.inf), INF, cap)

    @classmethod
    def constant(cls, c, p, N, cap=INF):
        return cls.from_u_coeffs([c], p, N, cap)

    @classmethod
    def one(cls, p, N, cap=INF):
        return cls.constant(1, p, N, cap)

    @classmethod
    def monomial(cls, c, n, p, N, cap=INF):
        return cls.from_u_coeffs([0] * n + [c], p, N, cap)

    @classmethod
    def E(cls, p, N, cap=INF):
        """E = u + p."""
        return cls.from_u_coeffs([p, 1], p, N, cap)

    @classmethod
    def E_power(cls, h, p, N, cap=INF):
        coeffs = [math.comb(h, i) * p ** (h - i) for i in range(h + 1)]
        return cls.from_u_coeffs(coeffs, p, N, cap)

    @classmethod
    def frak_c(cls, p, N, cap=INF):
        """phi(E)/p = 1 + u^p/p."""
        return cls.from_u_coeffs([1] + [0] * (p - 1) + [Fraction(1, p)], p, N, cap)

    def like(self, other) -> "TruncSeries":
        """Coerce a scalar into a constant series compatible with self."""
        if isinstance(other, TruncSeries):
            if other.p != self.p or other.N != self.N:
                raise ValueError("series mismatch (prime or truncation degree)")
            return other
        if isinstance(other, (int, Fraction, FieldElem)):
            return TruncSeries.constant(other, self.p, self.N, self.cap)
        return NotImplemented

    # inspection -------------------------------------------------------------

    def b(self, n: int) -> FieldElem:
        """Coefficient of t^n as a FieldElem (with its precision)."""
        p = self.p
        prec = INF if self.e[n] == INF else Fraction(int(self.e[n]), 2)
        scale = Fraction(1, p ** self.K)
        return FieldElem(self.X[n] * scale, self.Y[n] * scale, p, prec)

    def coeff(self, n: int) -> FieldElem:
        """Coefficient of u^n as a FieldElem with certified precision."""
        if n > self.N:
            prec = INF if self.tail == INF else Fraction(int(self.tail) - n, 2)
            return FieldElem(0, 0, self.p, prec)
        return self.b(n) * FieldElem.w_power(-n, self.p)

    def u_coeffs(self, upto: int | None = None) -> list[FieldElem]:
        upto = self.N if upto is None else upto
        return [self.coeff(n) for n in range(upto + 1)]

    def hat(self) -> np.ndarray:
        """Per-degree lower bound on the weight of the true coefficient."""
        return np.minimum(self.w, self.e)

    def vlow(self) -> float:
        """Certified lower bound for v_R2."""
        return min(float(self.hat().min()), self.tail)

    def err_floor(self) -> float:
        """Lowest weight at which the representation is uncertain."""
        return min(float(self.e.min()), self.tail)

    def v_R2(self) -> tuple[float, bool]:
        """Return (lower bound, exact flag) for v_R2."""
        lo = self.vlow()
        certain = (self.w < self.e) & (self.w == lo)
        return lo, bool(certain.any())

    def in_H(self, v) -> Cert:
        """Certificate for v_R2(self) >= v."""
        v = float(v)
        if self.vlow() >= v:
            return Cert.TRUE
        if ((self.w < self.e) & (self.w < v)).any():
            return Cert.FALSE
        return Cert.UNKNOWN

    def in_H_open(self, v) -> Cert:
        """Certificate for v_R2(self) > v."""
        v = float(v)
        if self.vlow() > v:
            return Cert.TRUE
        if ((self.w < self.e) & (self.w <= v)).any():
            return Cert.FALSE
        return Cert.UNKNOWN

    def close_to(self, other, v) -> Cert:
        """Certificate for self - other in H_v."""
        return (self - other).in_H(v)

    def rep_degree(self) -> int:
        """Degree of the representative (-1 for the zero representative)."""
        for n in range(self.N, -1, -1):
            if self.X[n] or self.Y[n]:
                return n
        return -1

    def is_rep_one(self) -> bool:
        return self.rep_degree() <= 0 and self.X[0] == self.p ** self.K and self.Y[0] == 0

    def __repr__(self):
        terms = []
        for n in range(min(self.N, 6) + 1):
            c = self.coeff(n)
            if c.x or c.y:
                terms.append(f"({c.x}+{c.y}w)u^{n}")
        more = " + ..." if self.rep_degree() > 6 else ""
        return f"TruncSeries[p={self.p}, N={self.N}, tail>={self.tail}]({' + '.join(terms) or '0'}{more})"

    def to_json(self, upto: int | None = None) -> dict:
        upto = self.N if upto is None else min(upto, self.N)
        coeffs = {}
        for n in range(upto + 1):
            c = self.coeff(n)
            if c.x or c.y or c.prec != INF:
                coeffs[str(n)] = c.to_json()
        return {"coeffs": coeffs, "trunc_deg": self.N, "tail_val": None if self.tail == INF else int(self.tail)}

    # ring operations ----------------------------------------------------------

    def _aligned(self, other):
        K = max(self.K, other.K)
        p = self.p
        sa = p ** (K - self.K)
        sb = p ** (K - other.K)
        return (K, [c * sa for c in self.X], [c * sa for c in self.Y],
                [c * sb for c in other.X], [c * sb for c in other.Y])

    def __add__(self, other):
        other = self.like(other)
        if other is NotImplemented:
            return other
        K, X1, Y1, X2, Y2 = self._aligned(other)
        return TruncSeries(self.p, self.N, K,
                           [a + b for a, b in zip(X1, X2)], [a + b for a, b in zip(Y1, Y2)],
                           np.minimum(self.e, other.e), min(self.tail, other.tail),
                           min(self.cap, other.cap))

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries(self.p, self.N, self.K, [-c for c in self.X], [-c for c in self.Y],
                           self.e, self.tail, self.cap)

    def __sub__(self, other):
        other = self.like(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self.like(other)
        if other is NotImplemented:
            return other
        p, N = self.p, self.N
        n = N + 1
        X, Y = _zw_mul(self.X, self.Y, other.X, other.Y, p, n)
        hf, hg = self.hat(), other.hat()
        e = np.minimum(_minplus(self.e, hg, n), _minplus(hf, other.e, n))
        # discarded products of degree > N
        sg = _suffix_min(hg)
        dropped = INF
        if N >= 1:
            idx = np.arange(1, n)
            dropped = float(np.min(hf[1:] + sg[n - idx]))
        tail = _fmin(self.tail + other.vlow(), other.tail + self.vlow(), self.tail + other.tail, dropped)
        return TruncSeries(p, N, self.K + other.K, X, Y, e, tail, min(self.cap, other.cap))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.invert_unit() ** (-k)
        out = TruncSeries.one(self.p, self.N, self.cap)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def frobenius(self) -> "TruncSeries":
        """phi(u) = u^p, identity on coefficients."""
        p, N = self.p, self.N
        X = [0] * (N + 1)
        Y = [0] * (N + 1)
        e = np.full(N + 1, np.inf)
        top = N // p
        for n in range(top + 1):
            s = p ** ((p - 1) * n // 2)
            X[p * n] = self.X[n] * s
            Y[p * n] = self.Y[n] * s
            e[p * n] = self.e[n] + (p - 1) * n
        hat = self.hat()
        dropped = INF
        if top < N:
            idx = np.arange(top + 1, N + 1)
            dropped = float(np.min(hat[top + 1:] + (p - 1) * idx))
        tail = _fmin(self.tail + (p - 1) * (N + 1), dropped)
        return TruncSeries(p, N, self.K, X, Y, e, tail, self.cap)

    def phi_iter(self, k: int) -> "TruncSeries":
        out = self
        for _ in range(k):
            out = out.frobenius()
        return out

    def n_operator(self) -> "TruncSeries":
        """N = -u d/du."""
        p = self.p
        X = [-n * c for n, c in enumerate(self.X)]
        Y = [-n * c for n, c in enumerate(self.Y)]
        e = self.e.copy()
        e[0] = INF
        for n in range(1, self.N + 1):
            v = vp_int(n, p)
            if v:
                e[n] += 2 * v
        return TruncSeries(p, self.N, self.K, X, Y, e, self.tail, self.cap)

    def truncate_le(self, d: int) -> "TruncSeries":
        """T_{<=d}: keep degrees <= d; the result is a polynomial (tail = +inf)."""
        if d > self.N:
            raise ValueError("truncation degree beyond the retained window")
        keep = d + 1
        X = self.X[:keep] + [0] * (self.N - d)
        Y = self.Y[:keep] + [0] * (self.N - d)
        e = self.e.copy()
        e[keep:] = INF
        return TruncSeries(self.p, self.N, self.K, X, Y, e, INF, self.cap)

    def truncate_gt(self, d: int) -> "TruncSeries":
        """T_{>d} = f - T_{<=d}."""
        keep = d + 1
        X = [0] * keep + self.X[keep:]
        Y = [0] * keep + self.Y[keep:]
        e = self.e.copy()
        e[:keep] = INF
        return TruncSeries(self.p, self.N, self.K, X, Y, e, self.tail, self.cap)

    def shift_down(self, h: int) -> "TruncSeries":
        """T_{>=h}(f) / u^h."""
        p, N = self.p, self.N
        X = self.X[h:] + [0] * h
        Y = self.Y[h:] + [0] * h
        e = np.concatenate([self.e[h:], np.full(h, self.tail)])
        out = TruncSeries(p, N, self.K, X, Y, e, self.tail, self.cap)
        return out._mul_w_power(-h)

    def mul_u_power(self, k: int) -> "TruncSeries":
        """Multiply by u^k, folding the overflow into the tail."""
        p, N = self.p, self.N
        if k == 0:
            return self
        X = [0] * k + self.X[:N + 1 - k]
        Y = [0] * k + self.Y[:N + 1 - k]
        e = np.concatenate([np.full(k, np.inf), self.e[:N + 1 - k]])
        hat = self.hat()
        dropped = INF
        if N + 1 - k <= N:
            dropped = float(np.min(hat[N + 1 - k:]))
        tail = _fmin(self.tail, dropped)
        out = TruncSeries(p, N, self.K, X, Y, e, tail, self.cap)
        return out._mul_w_power(k)

    def _mul_w_power(self, k: int) -> "TruncSeries":
        """Multiply every coefficient by w^k (weights shift by k)."""
        p = self.p
        X, Y, K = self.X, self.Y, self.K
        if k % 2:
            # (X + Y w) w = p Y + X w
            X, Y = [p * c for c in Y], list(X)
        q = (k - (k % 2)) // 2
        if q >= 0:
            s = p ** q
            X = [c * s for c in X]
            Y = [c * s for c in Y]
        else:
            K -= q
        return TruncSeries(p, self.N, K, X, Y, self.e + k, self.tail + k, self.cap)

    def mul_w_power(self, k: int) -> "TruncSeries":
        return self._mul_w_power(k)

    def __truediv__(self, other):
        if isinstance(other, TruncSeries):
            return self * other.invert_unit()
        if isinstance(other, (int, Fraction)):
            other = FieldElem(other, 0, self.p)
        return self * other.inverse("series division")

    def const_term(self) -> FieldElem:
        return self.coeff(0)

    # inversion --------------------------------------------------------------

    def invert_unit(self) -> "TruncSeries":
        """Inverse of a unit f = c (1 + delta) with v_R2(delta) > 0.

        Raises:
            PrecisionError: if the unit precondition cannot be certified.
        """
        p, N = self.p, self.N
        c = self.b(0)
        if not c.is_certain():
            raise PrecisionError("invert_unit: constant term indistinguishable from 0")
        c_rep = FieldElem(c.x, c.y, p)
        cinv = c_rep.inverse()
        cinv_s = TruncSeries.constant(cinv, p, N, self.cap)
        delta = self * cinv_s - 1
        if delta.in_H(1) is not Cert.TRUE:
            raise PrecisionError(
                f"invert_unit: not a certified unit (v_R2(f/f(0) - 1) >= {delta.vlow()} not > 0)"
            )
        if delta.K != 0:
            raise PrecisionError("invert_unit: internal scale mismatch")
        hat = delta.hat()
        e_g = np.minimum.accumulate(delta.e)
        tail_g = min(delta.tail, _knapsack_tail(hat, N))
        fin = e_g[np.isfinite(e_g)]
        modulus_w = int(fin.max()) if fin.size else None
        X, Y = _newton_inverse(delta.X, delta.Y, p, N, modulus_w)
        g = TruncSeries(p, N, 0, X, Y, e_g, tail_g, self.cap)
        if cinv_s.is_rep_one():
            return g
        return g * cinv_s


class _PowCache(dict):
    def __init__(self, p):
        super().__init__()
        self.p = p

    def __missing__(self, k):
        v = self.p ** k
        self[k] = v
        return v


def _knapsack_tail(hat: np.ndarray, N: int) -> float:
    """Min weight of a product of monomials of (1 + delta) with degree > N.

    ``hat[i]`` bounds the weight of the degree-i coefficient of delta
    (hat[0] is ignored: delta has no constant term).
    """
    items = [(i, float(hat[i])) for i in range(1, N + 1) if hat[i] != INF]
    if not items:
        return INF
    best = np.full(N + 1, np.inf)
    best[0] = 0.0
    for d in range(1, N + 1):
        m = INF
        for i, wt in items:
            if i > d:
                break
            cand = best[d - i] + wt
            if cand < m:
                m = cand
        best[d] = m
    out = INF
    for i, wt in items:
        # best[d] + wt with d + i > N, d <= N
        lo = N - i + 1
        if lo <= N:
            cand = float(best[lo:].min()) + wt
            if cand < out:
                out = cand
    return out


def _newton_inverse(DX, DY, p, N, modulus_w):
    """Inverse of 1 + delta over Z[w], truncated to degree N, mod w^modulus_w."""
    n = N + 1
    if modulus_w is not None:
        mx = p ** ((modulus_w + 1) // 2)
        my = p ** (modulus_w // 2)

        def red(X, Y):
            return [_smod(c, mx) for c in X], [_smod(c, my) for c in Y]
    else:
        def red(X, Y):
            return X, Y
    FX = list(DX)
    FX[0] += 1
    FY = list(DY)
    GX, GY = [1], [0]
    m = 1
    while m < n:
        m = min(2 * m, n)
        RX, RY = _zw_mul(FX[:m], FY[:m], GX, GY, p, m)
        # 2 - f g
        RX = [-c for c in RX]
        RY = [-c for c in RY]
        RX[0] += 2
        GX, GY = _zw_mul(GX, GY, RX, RY, p, m)
        GX, GY = red(GX, GY)
    GX = GX + [0] * (n - len(GX))
    GY = GY + [0] * (n - len(GY))
    return GX, GY


# products over Frobenius orbits -------------------------------------------------

def phi_orbit_product(f: TruncSeries, start: int = 0, step: int = 2, max_factors: int = 64) -> TruncSeries:
    """prod_{n>=0} phi^{start + step*n}(f) for f with f(0) = 1 and f - 1 in H_0^o.

    Factors are multiplied until they are 1 to the working degree; the last
    factor carries the certified bound for everything omitted.
    """
    if (f - 1).in_H_open(0) is not Cert.TRUE:
        raise PrecisionError("phi_orbit_product: factor not in 1 + H_0^o")
    term = f.phi_iter(start)
    prod = term
    for _ in range(max_factors):
        term = term.phi_iter(step)
        prod = prod * term
        if term.is_rep_one():
            return prod
    raise PrecisionError("phi_orbit_product: product did not stabilise")


def lambda_products(p: int, N: int, cap=INF) -> tuple[TruncSeries, TruncSeries]:
    """(lambda_-, lambda_++) with lambda_- = prod_{n>=0} phi^{2n+1}(E)/p."""
    lam_minus = phi_orbit_product(TruncSeries.frak_c(p, N, cap), start=0, step=2)
    return lam_minus, lam_minus.frobenius()


def lambda_minus_direct(p: int, N: int, cap=INF) -> TruncSeries:
    """lambda_- as the explicit finite product of 1 + u^(p^m)/p, m odd, p^m <= N."""
    out = TruncSeries.one(p, N, cap)
    m = 1
    while p ** m <= N:
        out = out * TruncSeries.from_u_coeffs([1] + [0] * (p ** m - 1) + [Fraction(1, p)], p, N, cap)
        m += 2
    # the first omitted factor 1 + u^(p^m)/p has weight p^m - 2
    return TruncSeries(p, N, out.K, out.X, out.Y, out.e, min(out.tail, p ** m - 2), cap)


# division by powers of E -------------------------------------------------------

def weierstrass_divide(f: TruncSeries, h: int, target=None, max_iter: int = 10000):
    """Divide by E^h: return (q, r, rest) with f = q E^h + r + rest.

    r has degree < h and ``rest`` collects what is left above degree h-1,
    with v_R2(rest) >= target once the iteration has converged.
    """
    p, N = f.p, f.N
    lower = TruncSeries.E_power(h, p, N, f.cap) - TruncSeries.monomial(1, h, p, N, f.cap)
    target = f.err_floor() if target is None else float(target)
    q = TruncSeries.zero(p, N, f.cap)
    rem = f
    last = -INF
    for _ in range(max_iter):
        high = rem.truncate_gt(h - 1)
        lo = high.vlow()
        if lo >= target or lo == INF or lo <= last:
            break
        last = lo
        top = high.shift_down(h)
        q = q + top
        rem = rem.truncate_le(h - 1) - top * lower
    high = rem.truncate_gt(h - 1)
    return q, rem.truncate_le(h - 1), high
