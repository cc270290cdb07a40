"""Reduction of the descended matrix modulo the maximal ideal, and its label.

Residue matrices are 2x2 matrices of polynomials in u over F_p (the residue
field of F = Q_p(w) is F_p).  A polynomial is a list of ints in [0, p).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .padic import Cert, FieldElem, vp_factorial


class UnsupportedPrimeError(ValueError):
    """p = 2 is outside the supported range."""


class NotIntegralError(ValueError):
    """A coefficient that should reduce modulo m_F is not certified integral."""


# residue matrices -------------------------------------------------------------

def _trim(poly: list) -> list:
    out = list(poly)
    while out and out[-1] == 0:
        out.pop()
    return out


def residue(c: FieldElem) -> int:
    """Image of an integral element of O_F in F_p.

    Raises:
        NotIntegralError: if c is not certified integral.
    """
    p = c.p
    if c.val_ge(0) is not Cert.TRUE:
        raise NotIntegralError(f"coefficient {c!r} is not certified integral")
    if c.val_gt(0) is Cert.TRUE:
        return 0
    # c = x + y w with v(x) = 0; y w lies in m_F
    x = Fraction(c.x)
    return x.numerator * pow(x.denominator, -1, p) % p


def reduce_poly(coeffs, p: int) -> list:
    """Reduce a list of u-coefficients (FieldElem) modulo m_F."""
    out = []
    for n, c in enumerate(coeffs):
        try:
            out.append(residue(c))
        except NotIntegralError as exc:
            raise NotIntegralError(f"u^{n} coefficient: {exc}") from None
    return _trim(out)


def E_power_coeffs(h: int, p: int) -> list:
    """u-coefficients of (u + p)^h."""
    return [FieldElem(comb(h, j) * p ** (h - j), 0, p) for j in range(h + 1)]


def reduce_mod_p(P: list, h: int, p: int) -> list:
    """Reduce (P, -1; E^h, 0) modulo m_F.

    Raises:
        NotIntegralError: naming the first coefficient of P that is not
            certified integral.
    """
    try:
        top_left = reduce_poly(P, p)
    except NotIntegralError as exc:
        raise NotIntegralError(f"P is not certified integral: {exc}") from None
    return [[top_left, [p - 1]], [reduce_poly(E_power_coeffs(h, p), p), []]]


def format_residue_matrix(mat, p: int) -> str:
    def fmt(poly):
        poly = _trim(poly)
        if not poly:
            return "0"
        terms = []
        for n, c in enumerate(poly):
            if not c:
                continue
            c_s = str(c - p) if c == p - 1 else str(c)
            if n == 0:
                terms.append(c_s)
            else:
                mon = "u" if n == 1 else f"u^{n}"
                terms.append(mon if c == 1 else ("-" + mon if c == p - 1 else f"{c_s}*{mon}"))
        return " + ".join(terms).replace("+ -", "- ")

    return "(" + ", ".join(fmt(x) for x in mat[0]) + "; " + ", ".join(fmt(x) for x in mat[1]) + ")"


# classification ----------------------------------------------------------------

@dataclass
class ReductionLabel:
    form: list
    kind: str                # "induced", "reducible" or "unrecognized"
    exponent: int | None = None
    twist: str | None = None
    characters: tuple | None = None
    inertia_weights: tuple | None = None
    det_char_exponent: int | None = None
    irreducible: bool | None = None
    p: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        if self.kind == "induced":
            return f"Ind(omega_2^{self.exponent} {self.twist})"
        if self.kind == "reducible":
            return f"{self.characters[0]} + {self.characters[1]}"
        return "unrecognized"

    def same_as(self, other: "ReductionLabel") -> bool:
        return (self.kind, self.label, self.inertia_weights, self.det_char_exponent, self.irreducible) == (
            other.kind, other.label, other.inertia_weights, other.det_char_exponent, other.irreducible)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "kind": self.kind,
            "weights": list(self.inertia_weights) if self.inertia_weights else None,
            "det_exponent": self.det_char_exponent,
            "irreducible": self.irreducible,
            "form": format_residue_matrix(self.form, self.p),
        }


def _monomial_unit(poly: list):
    """(m, c) if poly = c u^m (1 + u * ...), else None."""
    poly = _trim(poly)
    if not poly:
        return None
    m = next(n for n, c in enumerate(poly) if c)
    return m, poly[m]


def classify(mat, p: int) -> ReductionLabel:
    """Label the phi-module over F_p((u)) with matrix ``mat``.

    Recognised shapes (units of F_p[[u]] in the lower-left entry are absorbed
    by a base change, since phi contracts 1 + u F_p[[u]]):

    * (0, a; b u^m * unit, 0): phi^2(e1) = a b u^(pm) e1, induced from the
      unramified quadratic extension.  The twist is chi when a b = -1 and
      chi times the unramified character sending Frobenius to -a b otherwise.
    * (q, a; b u^m * unit, 0) with q a nonzero constant: reducible.

    Anything else is reported as unrecognized with the matrix echoed.
    """
    (m11, m12), (m21, m22) = (_trim(x) for x in mat[0]), (_trim(x) for x in mat[1])
    unknown = ReductionLabel(mat, "unrecognized", p=p)
    if _trim(m22) or len(m12) != 1 or not m12[0]:
        return unknown
    lower = _monomial_unit(m21)
    if lower is None:
        return unknown
    m, beta = lower
    alpha = m12[0]
    q2 = p * p - 1
    if not m11:
        c = (-alpha * beta) % p
        twist = "chi" if c == 1 else f"chi*unr({c})"
        return ReductionLabel(
            mat, "induced", exponent=m, twist=twist,
            inertia_weights=(m % q2, (p * m) % q2), det_char_exponent=m % (p - 1),
            irreducible=(m % (p + 1) != 0), p=p,
            notes={"phi2_constant": (alpha * beta) % p},
        )
    if len(m11) == 1:
        q = m11[0]
        other = (-alpha * beta * pow(q, -1, p)) % p
        return ReductionLabel(
            mat, "reducible", exponent=m, characters=(f"unr({q})", f"omega^{m % (p - 1)}*unr({other})"),
            inertia_weights=(0, m % (p - 1)), det_char_exponent=m % (p - 1), irreducible=False, p=p,
        )
    return unknown


def conjugate_diag(mat, a: int, b: int, p: int):
    """diag(a, b) * mat * diag(a, b)^-1 over F_p (constants are phi-fixed)."""
    ia, ib = pow(a, -1, p), pow(b, -1, p)
    scale = [[1, a * ib], [b * ia, 1]]
    return [[[c * scale[i][j] % p for c in mat[i][j]] for j in range(2)] for i in range(2)]


# bounds -------------------------------------------------------------------------

def _check(p: int, k: int):
    if p == 2:
        raise UnsupportedPrimeError("p = 2 is not supported")
    if k < 3:
        raise ValueError(f"weight k must be at least 3, got {k}")


def bound_threshold(p: int, k: int, weak: bool = False) -> Fraction:
    """T such that the bound reads v_p(1/L) > T (h = k - 1)."""
    _check(p, k)
    h = k - 1
    t = Fraction(h - 1, 2) + vp_factorial(h - 1, p)
    return t if weak else t - 1


def weight_form_bound(p: int, k: int) -> Fraction:
    """B such that the bound reads v_p(L) < B, stated in terms of k."""
    _check(p, k)
    return 2 - Fraction(k, 2) - vp_factorial(k - 2, p)


def bound_forms_agree(p: int, k: int) -> bool:
    """The weight form and the h form describe the same half-line."""
    return weight_form_bound(p, k) == -bound_threshold(p, k)


def theorem_bound(p: int, k: int, v_L, weak: bool = False) -> bool:
    """Whether v_p(L) satisfies the strict bound (v_L may be half-integral).

    Raises:
        UnsupportedPrimeError: for p = 2.
    """
    _check(p, k)
    return -Fraction(v_L) > bound_threshold(p, k, weak)
