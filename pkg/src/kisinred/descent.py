"""Normalisation to the shape (G, -1; E^h, 0) and descent to a polynomial matrix.

The descent is a successive row reduction.  Writing M for the current matrix,
the base change C = I + X with

    X = (M12 + 1, -T_{>h}(M11)/u^h; M22, -T_{>h}(M21)/u^h)

cancels the first-order error of M against (P, -1; E^h, 0), while phi(X) is
smaller because X has no constant term.  Every C is an exact polynomial
matrix chosen by us, so the accumulated C_total is a concrete witness; the
final residual is recomputed from scratch as C_total *phi A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .padic import INF, Cert, FieldElem, PrecisionError
from .kisin import PhiMat, SeriesContext, height_certificate, nu_of, star_conj
from .series import TruncSeries, lambda_products, phi_orbit_product


class OutOfRangeError(ValueError):
    """The instance lies outside the range the method covers."""


class DescentStalled(PrecisionError):
    """The row reduction stopped improving before reaching the threshold."""


STALL_WINDOW = 4


# valuation lemmas -------------------------------------------------------------

def lambda_estimates(ctx: SeriesContext) -> dict:
    """lambda_- in 1 + H_{p-2}, lambda_++ in 1 + H_{p^2-2}, both units of valuation 0."""
    p = ctx.p
    lm, lpp = ctx.lam_minus, ctx.lam_pp
    if ctx.cap <= p * p:
        # the lambda_++ estimate sits at weight p^2 - 2; widen the cap for it
        lm, lpp = lambda_products(p, ctx.N, 2 * p * p)
    lm_inv, lpp_inv = lm.invert_unit(), lpp.invert_unit()
    return {
        "lambda_minus_near_one": (lm - 1).in_H(p - 2),
        "lambda_pp_near_one": (lpp - 1).in_H(p * p - 2),
        "units": Cert.all([(lm_inv - 1).in_H_open(0), (lpp_inv - 1).in_H_open(0)]),
        "valuation_zero": Cert.all([_exact_val(x, 0) for x in (lm, lm_inv, lpp, lpp_inv)]),
    }


def _exact_val(f: TruncSeries, v) -> Cert:
    lo, exact = f.v_R2()
    if lo >= v and exact and lo == v:
        return Cert.TRUE
    if lo >= v:
        return Cert.UNKNOWN
    return Cert.FALSE if exact else Cert.UNKNOWN


@dataclass
class ZEstimates:
    certs: dict
    vlow: dict
    z0: Optional[dict] = None

    def all(self) -> Cert:
        return Cert.all(self.certs.values())


def z_estimates(ctx: SeriesContext, z: TruncSeries, L: Optional[FieldElem] = None, weak: bool = False) -> ZEstimates:
    """Certify the valuation estimates on z and nu = -1 + phi(z)(a_p - p^h z).

    With ``weak`` every threshold moves up by 2 (z is then p times smaller).
    For p = h = 3 the sharper estimates phi(z) in H_{-1}^o and
    nu in -1 + H_1^o are added, and z(0) is compared with the closed form.
    """
    p, h = ctx.p, ctx.h
    s = 2 if weak else 0
    pz = z * (p ** h)
    phz = z.frobenius()
    nu = nu_of(ctx, z)
    certs = {
        "p^h z": pz.in_H_open(h - 1 + s),
        "phi(z)": phz.in_H_open(-2 + s),
        "nu": (nu + 1).in_H_open(h - 3 + s),
    }
    certs["nu_unit"] = _unit_cert(nu)
    vlow = {"p^h z": pz.vlow(), "phi(z)": phz.vlow(), "nu+1": (nu + 1).vlow()}
    z0 = None
    if p == 3 and h == 3 and not weak:
        certs["phi(z) sharp"] = phz.in_H_open(-1)
        certs["nu sharp"] = (nu + 1).in_H_open(1)
        if L is not None:
            from .breuil import z_at_zero_p3h3_formula

            printed = z_at_zero_p3h3_formula(L)
            got = z.coeff(0)
            if printed.is_zero_at_prec():
                ratio_unit = Cert.of(got.is_zero_at_prec())
                ratio = None
            else:
                ratio = got / printed
                ratio_unit = Cert.of(ratio.is_certain() and ratio.valuation() == 0)
            z0 = {"computed": got, "closed_form": printed, "ratio": ratio}
            certs["z(0) closed form up to a unit"] = ratio_unit
    return ZEstimates(certs, vlow, z0)


def _unit_cert(f: TruncSeries) -> Cert:
    """f(0) nonzero and f/f(0) - 1 in H_0^o."""
    c = f.coeff(0)
    if not c.is_certain():
        return Cert.UNKNOWN
    return (f * c.inverse() - 1).in_H_open(0)


# normalisation ----------------------------------------------------------------

@dataclass
class Normalization:
    G: TruncSeries
    C: PhiMat
    A_normal: PhiMat
    certs: dict
    gaps: dict


def normalize_to_G(A: PhiMat, ctx: SeriesContext, sharp: bool = False) -> Normalization:
    """Bring A = (mu, nu; E^h, eta) to (G, -1; E^h, 0).

    First conjugate by (1, 0; -eta/nu, 1), then by
    diag(-nu_-/(nu(0) nu_+), nu_+/nu_-) where nu_+ = prod phi^(2n)(nu/nu(0)),
    nu_- = phi(nu_+).  G is cross-checked against
    (mu + nu phi(eta)/phi(nu)) nu_-^2/(nu_+ nu_++).

    Raises:
        OutOfRangeError: if nu is not a certified unit.
    """
    h = ctx.h
    mu, nu, eta = A[0, 0], A[0, 1], A[1, 1]
    if _unit_cert(nu) is not Cert.TRUE:
        raise OutOfRangeError("nu is not a certified unit of R_2; the normalisation does not apply")
    nu_c = nu.coeff(0)
    nu_inv = nu.invert_unit()
    C1 = PhiMat.of(ctx.one(), ctx.zero(), -(eta * nu_inv), ctx.one(), h)
    A1 = star_conj(C1, A)
    nu0 = nu * nu_c.inverse()
    nu_p = phi_orbit_product(nu0, start=0, step=2)
    nu_m = nu_p.frobenius()
    nu_pp = nu_m.frobenius()
    d1 = nu_m * nu_p.invert_unit() * (-nu_c.inverse())
    d2 = nu_p * nu_m.invert_unit()
    D = PhiMat.diag(d1, d2, h)
    A2 = star_conj(D, A1)
    G = A2[0, 0]
    G_formula = (mu + nu * eta.frobenius() * nu.frobenius().invert_unit()) * (
        nu_m * nu_m * (nu_p * nu_pp).invert_unit()
    )
    gap = {
        "G vs formula": (G - G_formula).vlow(),
        "A12 + 1": (A2[0, 1] + 1).vlow(),
        "A21 - E^h": (A2[1, 0] - ctx.Eh).vlow(),
        "A22": A2[1, 1].vlow(),
        "G - mu": (G - mu).vlow(),
    }
    thr = _shape_threshold(ctx)
    certs = {
        "G - mu in H_h^o": (G - mu).in_H_open(h),
        "G formula": (G - G_formula).in_H(thr),
        "shape": Cert.all([(A2[0, 1] + 1).in_H(thr), (A2[1, 0] - ctx.Eh).in_H(thr), A2[1, 1].in_H(thr)]),
    }
    return Normalization(G, D * C1, A2, certs, gap)


def _shape_threshold(ctx: SeriesContext) -> int:
    return default_threshold(ctx.h)


def default_threshold(h: int) -> int:
    """Residual level the descent and the shape checks must certify."""
    return 2 * h + 2


def check_G_hypotheses(G: TruncSeries, h: int) -> dict:
    """G in H_{h-1}, T_{>h}(G) in H_{h-1}^o, T_{<=h}(G) in m_F[u]."""
    return {
        "G in H_(h-1)": G.in_H(h - 1),
        "T>h(G) in H_(h-1)^o": G.truncate_gt(h).in_H_open(h - 1),
        "T<=h(G) integral": Cert.all(G.coeff(n).val_gt(0) for n in range(h + 1)),
    }


# descent ------------------------------------------------------------------------

@dataclass
class DescentResult:
    C_total: PhiMat
    G: TruncSeries
    P: list
    hypothesis_certs: dict
    certs: dict
    residual: float
    residual_entries: dict
    rounds: int
    history: list = field(default_factory=list)  # v_R2 of T_{>h}(M11) per round

    @property
    def P_valuations(self) -> list:
        return [c.valuation() for c in self.P]


def _exact_poly(f: TruncSeries, zero_const: bool = False) -> TruncSeries:
    """The representative of f as an exact polynomial (a concrete choice).

    Raises:
        PrecisionError: if the constant term must vanish but is certified nonzero.
    """
    X, Y = list(f.X), list(f.Y)
    if zero_const:
        if not f.coeff(0).is_zero_at_prec():
            raise PrecisionError("descent: base change would move C(0) away from the identity")
        X[0] = Y[0] = 0
    return TruncSeries(f.p, f.N, f.K, X, Y, np.full(f.N + 1, INF), INF, f.cap)


def _errors(M: PhiMat, h: int, Eh: TruncSeries) -> dict:
    return {
        "T>h(M11)": M[0, 0].truncate_gt(h).vlow(),
        "M12 + 1": (M[0, 1] + 1).vlow(),
        "M21 - E^h": (M[1, 0] - Eh).vlow(),
        "M22": M[1, 1].vlow(),
    }


def descend(G: TruncSeries, ctx: SeriesContext, hyp: Optional[dict] = None, theta=None,
            max_rounds: Optional[int] = None, require_hypotheses: bool = True) -> DescentResult:
    """Find C with C(0) = I and C *phi (G, -1; E^h, 0) = (P, -1; E^h, 0).

    Raises:
        OutOfRangeError: if the hypotheses on G are not all certified and
            ``require_hypotheses`` is set.
        DescentStalled: if the threshold is not reached within the budget.
    """
    h, p, N = ctx.h, ctx.p, ctx.N
    hyp = check_G_hypotheses(G, h) if hyp is None else hyp
    if require_hypotheses and Cert.all(hyp.values()) is not Cert.TRUE:
        raise OutOfRangeError(f"descent hypotheses not certified: {_fmt(hyp)}")
    theta = default_threshold(h) if theta is None else theta
    max_rounds = 2 * N if max_rounds is None else max_rounds
    A0 = PhiMat.of(G, -1, ctx.Eh, 0, h)
    M = A0
    C_total = PhiMat.identity(p, N, h, ctx.cap)
    history = []
    measures = []
    rounds = 0
    while True:
        err = _errors(M, h, ctx.Eh)
        measure = min(err.values())
        history.append(err["T>h(M11)"])
        measures.append(measure)
        if measure >= theta:
            break
        # single rounds may plateau; a window of STALL_WINDOW rounds must improve
        stalled = len(measures) > STALL_WINDOW and measure <= measures[-1 - STALL_WINDOW]
        if rounds >= max_rounds or stalled:
            raise DescentStalled(
                f"descent stalled after {rounds} rounds at v_R2 {measure} (threshold {theta})"
            )
        x11 = _exact_poly(M[0, 1] + 1, zero_const=True)
        x21 = _exact_poly(M[1, 1], zero_const=True)
        x12 = _exact_poly(-M[0, 0].truncate_gt(h).shift_down(h))
        x22 = _exact_poly(-M[1, 0].truncate_gt(h).shift_down(h))
        one = ctx.one()
        C = PhiMat.of(one + x11, x12, x21, one + x22, h)
        M = star_conj(C, M)
        C_total = PhiMat(tuple(tuple(_exact_poly(x) for x in row) for row in (C * C_total).rows), h)
        rounds += 1

    # independent recomputation from the starting matrix
    M = star_conj(C_total, A0)
    P_series = M[0, 0].truncate_le(h)
    P = [P_series.coeff(n) for n in range(h + 1)]
    target = PhiMat.of(P_series, -1, ctx.Eh, 0, h)
    entries = {
        "11": (M[0, 0] - P_series).vlow(),
        "12": (M[0, 1] + 1).vlow(),
        "21": (M[1, 0] - ctx.Eh).vlow(),
        "22": M[1, 1].vlow(),
    }
    diffP = P_series - G.truncate_le(h)
    # C_total is an exact polynomial matrix; compare its constant term as such
    ident = all(
        C_total[i, j].Y[0] == 0 and C_total[i, j].X[0] == (p ** C_total[i, j].K if i == j else 0)
        for i in range(2) for j in range(2)
    )
    detC = C_total.det()
    certs = {
        "C(0) = I": Cert.of(ident),
        "C invertible": (detC - 1).in_H_open(0),
        "residual": (M - target).close_to(PhiMat.of(ctx.zero(), 0, 0, 0, h), theta),
        "deg P <= h": Cert.TRUE,
        "P integral": Cert.all(c.val_gt(0) for c in P),
        "P - T<=h(G) in H_h^o": diffP.in_H_open(h),
        "bottom-left E^h": (M[1, 0] - ctx.Eh).in_H(theta),
        "height": height_certificate(M, theta).ok,
    }
    return DescentResult(C_total, G, P, hyp, certs, diffP.vlow(), entries, rounds, history)


def _fmt(certs: dict) -> str:
    return ", ".join(f"{k}={v.value}" for k, v in certs.items())
