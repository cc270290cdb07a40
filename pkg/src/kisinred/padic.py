"""Arithmetic in F = Q_p(w) with w^2 = p.

Elements are pairs of rationals (x, y) standing for x + y*w, together with an
absolute precision ``prec`` measured in the valuation normalised by v(p) = 1.
Because F is ramified over Q_p, valuations and precisions live in (1/2)Z.
An element with finite precision M is only known modulo {v >= M}.

Comparisons against valuation thresholds are answered with a three-valued
:class:`Cert` so that bound checks are certificates rather than guesses.
"""

from __future__ import annotations

import enum
import math
import re
from fractions import Fraction
from typing import Iterable, Union

INF = math.inf

Rational = Union[int, Fraction]
Val = Union[Fraction, float]  # a Fraction in (1/2)Z, or INF


class PrecisionError(ArithmeticError):
    """Raised when an operation needs information lost to finite precision."""


class Cert(enum.Enum):
    """Three-valued verdict for a certified inequality."""

    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    def __bool__(self):
        raise TypeError("Cert has no truth value; compare with Cert.TRUE")

    @staticmethod
    def all(certs: Iterable["Cert"]) -> "Cert":
        out = Cert.TRUE
        for c in certs:
            if c is Cert.FALSE:
                return Cert.FALSE
            if c is Cert.UNKNOWN:
                out = Cert.UNKNOWN
        return out

    @staticmethod
    def of(flag: bool) -> "Cert":
        return Cert.TRUE if flag else Cert.FALSE


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def vp_int(n: int, p: int) -> Val:
    """p-adic valuation of an integer (INF for 0)."""
    if n == 0:
        return INF
    n = abs(n)
    v = 0
    # strip large powers first so huge valuations stay cheap
    step, pk = 32, p ** 32
    while n % pk == 0:
        n //= pk
        v += step
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_rational(q: Rational, p: int) -> Val:
    q = Fraction(q)
    if q == 0:
        return INF
    return vp_int(q.numerator, p) - vp_int(q.denominator, p)


def vp_factorial(n: int, p: int) -> int:
    """Legendre's formula: the exponent of p in n!."""
    if n < 0:
        raise ValueError("n must be non-negative")
    total, q = 0, p
    while q <= n:
        total += n // q
        q *= p
    return total


def _reduce_rational(q: Fraction, p: int, m) -> Fraction:
    """Return a representative of q modulo p^m Z_p (m an integer or INF)."""
    if q == 0 or m == INF:
        return q
    v = vp_rational(q, p)
    if v >= m:
        return Fraction(0)
    num = q.numerator
    den = q.denominator
    if v >= 0:
        num //= p ** v
    else:
        den //= p ** (-v)
    mod = p ** (m - v)
    c = (num * pow(den, -1, mod)) % mod
    if c > mod // 2:
        c -= mod
    return Fraction(c) * Fraction(p) ** v


def _half(v) -> Val:
    """Normalise a valuation-like number into a Fraction in (1/2)Z or INF."""
    if v == INF:
        return INF
    f = Fraction(v)
    if (2 * f).denominator != 1:
        raise ValueError(f"precision {v} is not in (1/2)Z")
    return f


def _ceil(v) -> Val:
    return INF if v == INF else math.ceil(v)


class FieldElem:
    """An element x + y*w of Q_p(w), known modulo {v >= prec}.

    Args:
        x: rational part.
        y: coefficient of w.
        p: the odd prime.
        prec: absolute precision in (1/2)Z, or INF for an exact value.
    """

    __slots__ = ("x", "y", "p", "prec")

    def __init__(self, x: Rational = 0, y: Rational = 0, p: int = 3, prec: Val = INF):
        prec = _half(prec)
        x, y = Fraction(x), Fraction(y)
        if prec != INF:
            x = _reduce_rational(x, p, _ceil(prec))
            y = _reduce_rational(y, p, _ceil(prec - Fraction(1, 2)))
        self.x = x
        self.y = y
        self.p = p
        self.prec = prec

    # construction helpers -------------------------------------------------

    @classmethod
    def w_power(cls, e: int, p: int, coeff: Rational = 1) -> "FieldElem":
        """Return coeff * w^e exactly."""
        q, r = divmod(e, 2)
        c = Fraction(coeff) * Fraction(p) ** q
        return cls(0, c, p) if r else cls(c, 0, p)

    def coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.p != self.p:
                raise ValueError(f"prime mismatch: {self.p} vs {other.p}")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElem(other, 0, self.p)
        return NotImplemented

    # valuation --------------------------------------------------------------

    def rep_valuation(self) -> Val:
        """Valuation of the stored representative."""
        return min(vp_rational(self.x, self.p), vp_rational(self.y, self.p) + Fraction(1, 2))

    def valuation(self) -> Val:
        """Certified lower bound for the valuation (exact when is_certain)."""
        return min(self.rep_valuation(), self.prec)

    def is_certain(self) -> bool:
        """True when the valuation is determined at this precision."""
        return self.rep_valuation() < self.prec

    def is_zero_at_prec(self) -> bool:
        return not self.is_certain()

    def val_ge(self, v) -> Cert:
        """Certificate for valuation(self) >= v."""
        if self.is_certain():
            return Cert.of(self.rep_valuation() >= v)
        return Cert.TRUE if self.prec >= v else Cert.UNKNOWN

    def val_gt(self, v) -> Cert:
        """Certificate for valuation(self) > v."""
        if self.is_certain():
            return Cert.of(self.rep_valuation() > v)
        return Cert.TRUE if self.prec > v else Cert.UNKNOWN

    def is_exact(self) -> bool:
        return self.prec == INF

    # arithmetic -------------------------------------------------------------

    def __add__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return FieldElem(self.x + other.x, self.y + other.y, self.p, min(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        return FieldElem(-self.x, -self.y, self.p, self.prec)

    def __sub__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        x = self.x * other.x + p * self.y * other.y
        y = self.x * other.y + self.y * other.x
        prec = min(self.prec + other.valuation(), other.prec + self.valuation())
        return FieldElem(x, y, p, prec)

    __rmul__ = __mul__

    def inverse(self, op: str = "inverse") -> "FieldElem":
        if not self.is_certain():
            raise PrecisionError(f"{op}: divisor is indistinguishable from 0 at precision {self.prec}")
        v = self.rep_valuation()
        norm = self.x * self.x - self.p * self.y * self.y
        return FieldElem(self.x / norm, -self.y / norm, self.p, self.prec - 2 * v)

    def __truediv__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse("division")

    def __rtruediv__(self, other):
        return self.coerce(other) * self.inverse("division")

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse("power") ** (-n)
        out = FieldElem(1, 0, self.p)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def with_prec(self, prec: Val) -> "FieldElem":
        """Forget information beyond prec (never increases precision)."""
        return FieldElem(self.x, self.y, self.p, min(self.prec, _half(prec)))

    def conj(self) -> "FieldElem":
        return FieldElem(self.x, -self.y, self.p, self.prec)

    def sqrt_exact(self) -> "FieldElem | None":
        """Square root inside F of an exact element, or None if there is none."""
        if not self.is_exact():
            raise PrecisionError("sqrt_exact needs an exact element")
        p = self.p
        x, y = self.x, self.y
        if x == 0 and y == 0:
            return FieldElem(0, 0, p)
        if y == 0:
            r = _rational_sqrt(x)
            if r is not None:
                return FieldElem(r, 0, p)
            r = _rational_sqrt(x / p)
            return FieldElem(0, r, p) if r is not None else None
        # (a + b w)^2 = a^2 + p b^2 + 2ab w
        disc = _rational_sqrt(x * x - p * y * y)
        if disc is None:
            return None
        for s in (disc, -disc):
            b2 = (x + s) / (2 * p)
            b = _rational_sqrt(b2) if b2 > 0 else None
            if b:
                return FieldElem(y / (2 * b), b, p)
        return None

    # comparison / display ---------------------------------------------------

    def __eq__(self, other):
        other = self.coerce(other) if not isinstance(other, FieldElem) else other
        if other is NotImplemented or not isinstance(other, FieldElem):
            return NotImplemented
        if other.p != self.p:
            return False
        return (self - other).is_zero_at_prec()

    __hash__ = None

    def __repr__(self):
        prec = "exact" if self.prec == INF else f"O(w^{int(2 * self.prec)})"
        return f"FieldElem({format_literal(self)}, p={self.p}, {prec})"

    def to_json(self) -> dict:
        return {
            "x": _frac_str(self.x),
            "y": _frac_str(self.y),
            "prec": None if self.prec == INF else _frac_str(self.prec),
            "p": self.p,
        }

    @classmethod
    def from_json(cls, d: dict) -> "FieldElem":
        prec = INF if d.get("prec") is None else Fraction(d["prec"])
        return cls(Fraction(d["x"]), Fraction(d["y"]), int(d["p"]), prec)


def _rational_sqrt(q: Fraction):
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _frac_str(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def val_str(v) -> str:
    """Serialise a valuation exactly ("inf" for +infinity)."""
    return "inf" if v == INF else _frac_str(v)


# literal format -----------------------------------------------------------

_TERM = re.compile(
    r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*(?:\*\s*)?)?(?:([wp])\s*\^\s*\(?\s*(-?\d+(?:/\d+)?)\s*\)?|([wp]))?\s*"
)


def parse_literal(text: str, p: int, prec: Val = INF) -> FieldElem:
    """Parse ``r``, ``r*w^e``, ``p^v`` or a +/- sum of such terms.

    ``p^v`` accepts half-integral v, meaning w^(2v).

    Raises:
        ValueError: if the text is not a valid literal.
    """
    s = text.strip()
    if not s:
        raise ValueError("empty literal")
    total = FieldElem(0, 0, p)
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse literal {text!r} at position {pos}")
        sign, coeff, base, exp, bare = m.groups()
        if coeff is None and base is None and bare is None:
            raise ValueError(f"cannot parse literal {text!r}")
        if pos > 0 and sign is None:
            raise ValueError(f"missing operator in literal {text!r}")
        c = Fraction(coeff) if coeff is not None else Fraction(1)
        if sign == "-":
            c = -c
        if bare is not None:
            base, exp = bare, "1"
        if base is None:
            term = FieldElem(c, 0, p)
        else:
            e = Fraction(exp)
            if base == "p":
                e = 2 * e
            if e.denominator != 1:
                raise ValueError(f"exponent in {text!r} must be integral in w")
            term = FieldElem.w_power(int(e), p, c)
        total = total + term
        pos = m.end()
    return total.with_prec(prec)


def format_literal(e: FieldElem) -> str:
    """Inverse of :func:`parse_literal` on the represented residue."""
    parts = []
    if e.x != 0:
        parts.append(_frac_str(e.x))
    if e.y != 0:
        parts.append(f"{_frac_str(e.y)}*w^1")
    if not parts:
        return "0"
    out = parts[0]
    for t in parts[1:]:
        out += t if t.startswith("-") else "+" + t
    return out


def a_p(p: int, h: int) -> FieldElem:
    """The Frobenius trace w^(h-1) + w^(h+1)."""
    return FieldElem.w_power(h - 1, p) + FieldElem.w_power(h + 1, p)
