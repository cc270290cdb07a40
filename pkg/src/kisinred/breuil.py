"""The Hodge filtration on the rank two Breuil module S_F (x) D.

Given a basis f1, f2 of D with Fil^h D = F f2 and monodromy
N(f1) = a f1 + c f2, N(f2) = b f1 + d f2, the filtration on S_F (x) D is

    Fil^i = S_F (f2 + z_{i-1} f1) + S_F E^i f1,   z_i = sum_{j<=i} x_j E^j,

with scalars x_j produced by a short recursion.  Everything here is a
polynomial in E = u + p, so it is stored exactly in the E-adic basis and all
divisions by E are exact polynomial divisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .padic import INF, Cert, FieldElem, vp_factorial


class RecursionError_(ArithmeticError):
    """Internal consistency failure in the filtration recursion."""


class EPoly:
    """Exact polynomial sum c_j E^j with E = u + p and coefficients in F."""

    __slots__ = ("c", "p")

    def __init__(self, coeffs, p: int):
        cs = [c if isinstance(c, FieldElem) else FieldElem(c, 0, p) for c in coeffs]
        while cs and cs[-1].x == 0 and cs[-1].y == 0:
            cs.pop()
        self.c = cs
        self.p = p

    @classmethod
    def zero(cls, p):
        return cls([], p)

    @classmethod
    def u(cls, p):
        return cls([-p, 1], p)

    def coeff(self, j: int) -> FieldElem:
        return self.c[j] if j < len(self.c) else FieldElem(0, 0, self.p)

    @property
    def degree(self) -> int:
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def __add__(self, other):
        other = _as_epoly(other, self.p)
        n = max(len(self.c), len(other.c))
        return EPoly([self.coeff(j) + other.coeff(j) for j in range(n)], self.p)

    __radd__ = __add__

    def __neg__(self):
        return EPoly([-c for c in self.c], self.p)

    def __sub__(self, other):
        return self + (-_as_epoly(other, self.p))

    def __rsub__(self, other):
        return _as_epoly(other, self.p) - self

    def __mul__(self, other):
        other = _as_epoly(other, self.p)
        if self.is_zero() or other.is_zero():
            return EPoly.zero(self.p)
        out = [FieldElem(0, 0, self.p) for _ in range(len(self.c) + len(other.c) - 1)]
        for i, a in enumerate(self.c):
            for j, b in enumerate(other.c):
                out[i + j] = out[i + j] + a * b
        return EPoly(out, self.p)

    __rmul__ = __mul__

    def shift(self, k: int) -> "EPoly":
        """Multiply by E^k."""
        return EPoly([FieldElem(0, 0, self.p)] * k + self.c, self.p)

    def at_pi(self) -> FieldElem:
        """Value at u = pi = -p, i.e. at E = 0."""
        return self.coeff(0)

    def div_E(self) -> "EPoly":
        """Exact division by E.

        Raises:
            RecursionError_: if the value at E = 0 is not zero.
        """
        if not self.at_pi().is_zero_at_prec():
            raise RecursionError_(f"division by E is not exact: residue {self.at_pi()!r}")
        return EPoly(self.c[1:], self.p)

    def div_E_power(self, k: int) -> Optional["EPoly"]:
        """Quotient by E^k if exact, else None."""
        if any(not self.coeff(j).is_zero_at_prec() for j in range(k)):
            return None
        return EPoly(self.c[k:], self.p)

    def n_op(self) -> "EPoly":
        """N = -u d/du, using N(E^j) = -j E^j + j p E^(j-1)."""
        p = self.p
        out = [FieldElem(0, 0, p) for _ in range(len(self.c))]
        for j, cj in enumerate(self.c):
            if j == 0:
                continue
            out[j] = out[j] - j * cj
            out[j - 1] = out[j - 1] + (j * p) * cj
        return EPoly(out, p)

    def u_coeffs(self) -> list[FieldElem]:
        """Coefficients in the u-basis, expanding E^j = (u + p)^j."""
        p = self.p
        n = len(self.c)
        out = [FieldElem(0, 0, p) for _ in range(n)]
        for j, cj in enumerate(self.c):
            for i in range(j + 1):
                out[i] = out[i] + (math.comb(j, i) * p ** (j - i)) * cj
        return out

    def equals(self, other) -> bool:
        return (self - other).is_zero()

    def __repr__(self):
        return "EPoly(" + " + ".join(f"{c!r}*E^{j}" for j, c in enumerate(self.c)) + ")"


def _as_epoly(x, p) -> EPoly:
    if isinstance(x, EPoly):
        if x.p != p:
            raise ValueError("prime mismatch")
        return x
    return EPoly([x], p)


def in_A(poly: EPoly, v) -> bool:
    """Membership in A_v = {sum y_j E^j : v_p(y_j) + v_p(j!) + j >= v}."""
    p = poly.p
    return all(
        c.valuation() + vp_factorial(j, p) + j >= v for j, c in enumerate(poly.c) if not c.is_zero_at_prec()
    )


@dataclass
class FiltrationData:
    """Outputs of the filtration recursion (all exact)."""

    p: int
    h: int
    a: FieldElem
    b: FieldElem
    c: FieldElem
    d: FieldElem
    x: list          # x_1 .. x_{h-1}
    b_seq: list      # b_1 .. b_{h-1} as EPoly
    d_seq: list      # d_1 .. d_{h-1} as EPoly
    z_partial: list  # z_0 = 0, z_1, .., z_{h-1}
    numerator_residues: list  # value at pi of b_i - x_i i u before dividing by E

    @property
    def z(self) -> EPoly:
        return self.z_partial[-1]

    def x_valuations(self) -> list:
        return [xi.valuation() for xi in self.x]


def filtration_recursion(h: int, a, b, c, d, p: int) -> FiltrationData:
    """Run the recursion for x_1, ..., x_{h-1}.

    x_1 = b/pi with pi = -p, and for 1 <= i < h-1:
        d_{i+1} = d_i + c x_i E^i
        b_{i+1} = x_i (a - c z_i - d_i) + (b_i - x_i i u) / E
        x_{i+1} = b_{i+1}(pi) / ((i+1) pi)
    """
    if h < 2:
        raise ValueError("h must be at least 2")
    a, b, c, d = (s if isinstance(s, FieldElem) else FieldElem(s, 0, p) for s in (a, b, c, d))
    pi = FieldElem(-p, 0, p)
    u = EPoly.u(p)
    b_i = EPoly([b], p)
    d_i = EPoly([d], p)
    x_i = b / pi
    xs = [x_i]
    b_seq, d_seq = [b_i], [d_i]
    z = EPoly([FieldElem(0, 0, p), x_i], p)
    z_partial = [EPoly.zero(p), z]
    residues = []
    for i in range(1, h - 1):
        numer = b_i - (x_i * i) * u
        residues.append(numer.at_pi())
        d_next = d_i + EPoly([c * x_i], p).shift(i)
        b_next = (x_i * EPoly([a], p) - (c * x_i) * z - x_i * d_i) + numer.div_E()
        x_next = b_next.at_pi() / ((i + 1) * pi)
        b_i, d_i, x_i = b_next, d_next, x_next
        xs.append(x_i)
        b_seq.append(b_i)
        d_seq.append(d_i)
        z = z + EPoly([x_i], p).shift(i + 1)
        z_partial.append(z)
    return FiltrationData(p, h, a, b, c, d, xs, b_seq, d_seq, z_partial, residues)


def recursion_from_module(Df) -> FiltrationData:
    """Filtration data for a module in its f-basis."""
    (a, b), (c, d) = Df.n_mat
    return filtration_recursion(Df.h, a, b, c, d, Df.p)


@dataclass
class FiltrationCertificate:
    ok: Cert
    per_level: list


def verify_filtration(data: FiltrationData, module=None) -> FiltrationCertificate:
    """Check each claimed generator f2 + z_{i-1} f1 of Fil^i by exact division.

    For i >= 2, N(f2 + z f1) = (b + N z + a z) f1 + (d + c z) f2 must lie in
    S_F (f2 + z_{i-2} f1) + S_F E^(i-1) f1, i.e. (b + N z + a z) - (d + c z) z_{i-2}
    must be divisible by E^(i-1).  The value at pi must be f2, i.e. z(pi) = 0.
    """
    p = data.p
    if module is not None:
        (a, b), (c, d) = module.n_mat
        if not all(s == t for s, t in zip((a, b, c, d), (data.a, data.b, data.c, data.d))):
            return FiltrationCertificate(Cert.FALSE, [{"level": 0, "reason": "monodromy mismatch"}])
    a, b, c, d = data.a, data.b, data.c, data.d
    levels = []
    ok = True
    for i in range(1, data.h + 1):
        zi = data.z_partial[i - 1]
        ev_ok = zi.at_pi().is_zero_at_prec()
        if i == 1:
            levels.append({"level": 1, "tautology": True, "ev_pi": ev_ok})
            ok = ok and ev_ok
            continue
        zprev = data.z_partial[i - 2]
        f1_part = EPoly([b], p) + zi.n_op() + a * zi
        f2_part = EPoly([d], p) + c * zi
        remainder = f1_part - f2_part * zprev
        divisible = remainder.div_E_power(i - 1) is not None
        levels.append({"level": i, "divisible": divisible, "ev_pi": ev_ok})
        ok = ok and divisible and ev_ok
    for i, x in enumerate(data.x, start=1):
        if not (x * i * FieldElem(-p, 0, p) - data.b_seq[i - 1].at_pi()).is_zero_at_prec():
            ok = False
            levels.append({"level": i, "x_identity": False})
    return FiltrationCertificate(Cert.of(ok), levels)


@dataclass
class BoundCertificate:
    lemma_hypotheses: bool
    lemma: list          # per i: Cert for v(x_i) + v(i!) + i >= v(b)
    estimate_applies: bool
    estimate: list       # per j: Cert for v(x_j) >= v(1/L) - (h-1)/2 - v(j!) - j
    b_chain: list        # per i: b_i E^(i-1) in A_{v(b)}

    def all_true(self) -> Cert:
        certs = []
        if self.lemma_hypotheses:
            certs += self.lemma + self.b_chain
        if self.estimate_applies:
            certs += self.estimate
        return Cert.all(certs)


def check_coeff_bounds(data: FiltrationData, v_Linv=None) -> BoundCertificate:
    """Certify the coefficient bounds on x_i.

    The first bound needs a - d and bc integral; the second needs
    v_p(1/L) >= -1 and is skipped when ``v_Linv`` is None.
    """
    p, h = data.p, data.h
    vb = data.b.valuation()
    hyp = (data.a - data.d).val_ge(0) is Cert.TRUE and (data.b * data.c).val_ge(0) is Cert.TRUE
    lemma = []
    chain = []
    for i, x in enumerate(data.x, start=1):
        lemma.append(_ge(x, vb - vp_factorial(i, p) - i))
        chain.append(Cert.of(in_A(data.b_seq[i - 1].shift(i - 1), vb)))
    applies = v_Linv is not None and v_Linv >= -1
    estimate = []
    if applies:
        for j, x in enumerate(data.x, start=1):
            estimate.append(_ge(x, Fraction(v_Linv) - Fraction(h - 1, 2) - vp_factorial(j, p) - j))
    return BoundCertificate(hyp, lemma, applies, estimate, chain)


def _ge(x: FieldElem, bound) -> Cert:
    if bound == -INF:
        return Cert.TRUE
    return x.val_ge(bound)


def closed_form_x2(a, b, d, p):
    """x_2 = b (a - d - 1) / (2 pi^2)."""
    pi = FieldElem(-p, 0, p)
    return b * (a - d - 1) / (2 * pi * pi)


def closed_form_z2_at0(a, b, d, p):
    """z_2(0) = b (a - d - 3) / 2."""
    return b * (a - d - 3) / 2


def z_at_zero(data: FiltrationData) -> FieldElem:
    """z(0), the value at u = 0 (E = p)."""
    return data.z.u_coeffs()[0] if not data.z.is_zero() else FieldElem(0, 0, data.p)


def z_at_zero_p3h3_formula(L: FieldElem) -> FieldElem:
    """-(1/(2L)) (1/L + 1): the printed value of z(0) for p = h = 3."""
    one = FieldElem(1, 0, L.p)
    return -(one / (2 * L)) * (one / L + 1)
