"""Frobenius matrices of rank two Kisin-type modules over R_2.

A :class:`PhiMat` is a 2x2 matrix of :class:`TruncSeries`.  Changing basis by
an invertible C replaces A with C * A * phi(C)^-1 (:func:`star_conj`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .breuil import EPoly, FiltrationData
from .padic import INF, Cert, FieldElem, PrecisionError, a_p
from .series import TruncSeries, lambda_products, weierstrass_divide


@dataclass(frozen=True)
class PhiMat:
    """2x2 matrix of truncated series; ``rows[i][j]`` is the (i+1, j+1) entry."""

    rows: tuple
    h: int

    @classmethod
    def of(cls, m11, m12, m21, m22, h: int) -> "PhiMat":
        ref = next(x for x in (m11, m12, m21, m22) if isinstance(x, TruncSeries))
        m = [ref.like(x) for x in (m11, m12, m21, m22)]
        return cls(((m[0], m[1]), (m[2], m[3])), h)

    @classmethod
    def diag(cls, d1, d2, h: int) -> "PhiMat":
        ref = d1 if isinstance(d1, TruncSeries) else d2
        return cls.of(d1, TruncSeries.zero(ref.p, ref.N, ref.cap), TruncSeries.zero(ref.p, ref.N, ref.cap), d2, h)

    @classmethod
    def identity(cls, p, N, h, cap=INF) -> "PhiMat":
        one = TruncSeries.one(p, N, cap)
        return cls.diag(one, one, h)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    @property
    def p(self):
        return self.rows[0][0].p

    @property
    def N(self):
        return self.rows[0][0].N

    def entries(self):
        return [self.rows[i][j] for i in range(2) for j in range(2)]

    def __mul__(self, other: "PhiMat") -> "PhiMat":
        a, b = self.rows, other.rows
        return PhiMat(
            tuple(tuple(a[i][0] * b[0][j] + a[i][1] * b[1][j] for j in range(2)) for i in range(2)),
            self.h,
        )

    def __add__(self, other: "PhiMat") -> "PhiMat":
        return PhiMat(tuple(tuple(self.rows[i][j] + other.rows[i][j] for j in range(2)) for i in range(2)), self.h)

    def __sub__(self, other: "PhiMat") -> "PhiMat":
        return PhiMat(tuple(tuple(self.rows[i][j] - other.rows[i][j] for j in range(2)) for i in range(2)), self.h)

    def scale(self, s) -> "PhiMat":
        return PhiMat(tuple(tuple(self.rows[i][j] * s for j in range(2)) for i in range(2)), self.h)

    def frobenius(self) -> "PhiMat":
        return PhiMat(tuple(tuple(x.frobenius() for x in row) for row in self.rows), self.h)

    def det(self) -> TruncSeries:
        r = self.rows
        return r[0][0] * r[1][1] - r[0][1] * r[1][0]

    def adj(self) -> "PhiMat":
        r = self.rows
        return PhiMat(((r[1][1], -r[0][1]), (-r[1][0], r[0][0])), self.h)

    def inverse(self) -> "PhiMat":
        """Inverse over R_2; the determinant must be a certified unit."""
        return self.adj().scale(self.det().invert_unit())

    def at_zero(self):
        return [[self.rows[i][j].coeff(0) for j in range(2)] for i in range(2)]

    def close_to(self, other: "PhiMat", v) -> Cert:
        return Cert.all((self.rows[i][j] - other.rows[i][j]).in_H(v) for i in range(2) for j in range(2))

    def min_gap(self, other: "PhiMat") -> float:
        """Smallest certified v_R2 of the entrywise difference."""
        return min((self.rows[i][j] - other.rows[i][j]).vlow() for i in range(2) for j in range(2))

    def to_json(self, upto=None) -> dict:
        return {f"a{i + 1}{j + 1}": self.rows[i][j].to_json(upto) for i in range(2) for j in range(2)}


def star_conj(C: PhiMat, A: PhiMat) -> PhiMat:
    """C * A * phi(C)^-1.

    Raises:
        PrecisionError: if det C is not a certified unit of R_2.
    """
    return C * A * C.frobenius().inverse()


# building blocks ---------------------------------------------------------------

@dataclass
class SeriesContext:
    """Shared truncation data: prime, window N, precision cap and lambda's."""

    p: int
    h: int
    N: int
    cap: float

    def __post_init__(self):
        self.E = TruncSeries.E(self.p, self.N, self.cap)
        self.Eh = TruncSeries.E_power(self.h, self.p, self.N, self.cap)
        self.c = TruncSeries.frak_c(self.p, self.N, self.cap)
        self.c_inv_h = self.c.invert_unit() ** self.h
        self.lam_minus, self.lam_pp = lambda_products(self.p, self.N, self.cap)
        self.ap = a_p(self.p, self.h)

    def const(self, c) -> TruncSeries:
        return TruncSeries.constant(c, self.p, self.N, self.cap)

    def series(self, poly: EPoly) -> TruncSeries:
        return TruncSeries.from_u_coeffs(poly.u_coeffs(), self.p, self.N, self.cap)

    def zero(self):
        return TruncSeries.zero(self.p, self.N, self.cap)

    def one(self):
        return TruncSeries.one(self.p, self.N, self.cap)


def z_series(ctx: SeriesContext, filt: FiltrationData) -> TruncSeries:
    return ctx.series(filt.z)


def frobenius_matrix_f(ctx: SeriesContext) -> PhiMat:
    """X = (a_p, -1; p^h, 0) as constant series."""
    p, h = ctx.p, ctx.h
    return PhiMat.of(ctx.const(ctx.ap), ctx.const(-1), ctx.const(p ** h), ctx.zero(), h)


def build_A_prime(ctx: SeriesContext, z: TruncSeries) -> PhiMat:
    """A' = E^h B^-1 X phi(B) p^-h c^-h with B = (E^h, z; 0, 1).

    E^h B^-1 is the adjugate of B since det B = E^h, so no division by E
    is needed.  The scalar p^-h c^-h is applied last.
    """
    h = ctx.h
    adjB = PhiMat.of(ctx.one(), -z, ctx.zero(), ctx.Eh, h)
    B = PhiMat.of(ctx.Eh, z, ctx.zero(), ctx.one(), h)
    core = adjB * frobenius_matrix_f(ctx) * B.frobenius()
    scale = ctx.c_inv_h * FieldElem(Fraction(1, ctx.p ** h), 0, ctx.p)
    return core.scale(scale)


def nu_of(ctx: SeriesContext, z: TruncSeries) -> TruncSeries:
    """nu = -1 + phi(z) (a_p - p^h z)."""
    return -1 + z.frobenius() * (ctx.const(ctx.ap) - z * (ctx.p ** ctx.h))


def A_prime_closed_form(ctx: SeriesContext, z: TruncSeries) -> PhiMat:
    """(a_p - p^h z, p^-h c^-h nu; E^h p^h, E^h phi(z) c^-h)."""
    p, h = ctx.p, ctx.h
    ph = p ** h
    inv_ph = FieldElem(Fraction(1, ph), 0, p)
    return PhiMat.of(
        ctx.const(ctx.ap) - z * ph,
        ctx.c_inv_h * nu_of(ctx, z) * inv_ph,
        ctx.Eh * ph,
        ctx.Eh * z.frobenius() * ctx.c_inv_h,
        h,
    )


def lambda_conjugator(ctx: SeriesContext) -> PhiMat:
    """diag(p^h lambda_-^h, lambda_++^h)."""
    h = ctx.h
    return PhiMat.diag(ctx.lam_minus ** h * (ctx.p ** h), ctx.lam_pp ** h, h)


def build_A(ctx: SeriesContext, A_prime: PhiMat) -> PhiMat:
    """Conjugate A' by diag(p^h lambda_-^h, lambda_++^h)."""
    return star_conj(lambda_conjugator(ctx), A_prime)


def A_closed_form(ctx: SeriesContext, z: TruncSeries) -> PhiMat:
    """((a_p - p^h z)(l_-/l_++)^h, nu; E^h, E^h phi(z) (l_++/l_-)^h)."""
    h = ctx.h
    ratio = (ctx.lam_minus * ctx.lam_pp.invert_unit()) ** h
    ratio_inv = (ctx.lam_pp * ctx.lam_minus.invert_unit()) ** h
    return PhiMat.of(
        (ctx.const(ctx.ap) - z * (ctx.p ** h)) * ratio,
        nu_of(ctx, z),
        ctx.Eh,
        ctx.Eh * z.frobenius() * ratio_inv,
        h,
    )


def crystalline_A(ctx: SeriesContext) -> PhiMat:
    """Lambda X0 Cdiag with Lambda = diag(1, E^h), Cdiag = diag(1, c^-h).

    X0 = (a_p, -1; 1, 0) is the unit companion matrix with trace a_p.
    """
    h = ctx.h
    Lam = PhiMat.diag(ctx.one(), ctx.Eh, h)
    X0 = PhiMat.of(ctx.const(ctx.ap), ctx.const(-1), ctx.one(), ctx.zero(), h)
    Cd = PhiMat.diag(ctx.one(), ctx.c_inv_h, h)
    return Lam * X0 * Cd


# certificates ----------------------------------------------------------------

@dataclass
class HeightCertificate:
    ok: Cert
    remainder_val: float
    rest_val: float
    unit_gap: float


def height_certificate(M: PhiMat, thr) -> HeightCertificate:
    """Certify det M = (unit) * E^h up to H_thr.

    Divides det M by E^h; the remainder and leftover must lie in H_thr and the
    quotient must be a unit (constant term known, normalised quotient in
    1 + H_0^o).
    """
    d = M.det()
    q, r, rest = weierstrass_divide(d, M.h, target=thr)
    c0 = q.coeff(0)
    if not c0.is_certain():
        return HeightCertificate(Cert.UNKNOWN, r.vlow(), rest.vlow(), -INF)
    gap = (q * c0.inverse() - 1)
    unit = gap.in_H_open(0)
    ok = Cert.all([r.in_H(thr), rest.in_H(thr), unit])
    return HeightCertificate(ok, r.vlow(), rest.vlow(), gap.vlow())


def det_identity_certificate(A: PhiMat, C: PhiMat, conj: PhiMat, thr) -> Cert:
    """det(C *phi A) = det A det C / phi(det C), checked up to H_thr."""
    dC = C.det()
    lhs = conj.det()
    rhs = A.det() * dC * dC.frobenius().invert_unit()
    return (lhs - rhs).in_H(thr)
