import pytest

from kisinred.descent import (
    DescentStalled,
    OutOfRangeError,
    check_G_hypotheses,
    default_threshold,
    descend,
    lambda_estimates,
    normalize_to_G,
    z_estimates,
)
from kisinred.kisin import PhiMat, SeriesContext, star_conj
from kisinred.padic import Cert, FieldElem
from kisinred.series import TruncSeries
from builders import instance

# (p, k, e) with L = w^e inside the strong bound
COMPLIANT = [(3, 4, -3), (3, 6, -5), (5, 5, -3), (5, 6, -4), (7, 5, -3), (7, 8, -5), (3, 9, -7)]


@pytest.mark.parametrize("p", [3, 5, 7])
def test_lambda_estimates(p):
    ctx = SeriesContext(p, 4, max(p * p + 5, 30), 2 * p * p + 4)
    assert all(c is Cert.TRUE for c in lambda_estimates(ctx).values())
    # a small cap is widened internally
    small = SeriesContext(p, 4, max(p * p + 5, 30), 12)
    assert all(c is Cert.TRUE for c in lambda_estimates(small).values())


@pytest.mark.parametrize("p,k,e", COMPLIANT)
def test_z_estimates_on_compliant_instances(p, k, e):
    ctx, z, _, _ = instance(p, k, e)
    est = z_estimates(ctx, z, FieldElem.w_power(e, p))
    assert est.all() is Cert.TRUE, est.certs


def test_p3h3_sharp_estimates_and_z0_ratio():
    ctx, z, _, _ = instance(3, 4, -3)
    est = z_estimates(ctx, z, FieldElem.w_power(-3, 3))
    assert {"phi(z) sharp", "nu sharp", "z(0) closed form up to a unit"} <= set(est.certs)
    assert est.all() is Cert.TRUE
    assert est.z0["ratio"] == FieldElem(1, 0, 3) / 2


def test_weak_estimates_p3h2():
    ctx, z, _, _ = instance(3, 3, -3)
    assert z_estimates(ctx, z, FieldElem.w_power(-3, 3), weak=True).all() is Cert.TRUE


@pytest.mark.parametrize("p,k", [(3, 4), (5, 6), (7, 5)])
def test_crystalline_normalization(p, k):
    ctx, _, _, A = instance(p, k)
    h = k - 1
    thr = default_threshold(h)
    nm = normalize_to_G(A, ctx)
    assert all(c is Cert.TRUE for c in nm.certs.values())
    ratio = (ctx.lam_minus * ctx.lam_pp.invert_unit()) ** h
    assert (nm.G - ratio * ctx.ap).in_H(thr) is Cert.TRUE
    assert nm.G.coeff(0) == ctx.ap


@pytest.mark.parametrize("p,k,e", COMPLIANT)
def test_normalization_and_descent_postconditions(p, k, e):
    ctx, _, _, A = instance(p, k, e)
    h = k - 1
    thr = default_threshold(h)
    nm = normalize_to_G(A, ctx)
    assert all(c is Cert.TRUE for c in nm.certs.values()), nm.certs
    # the conjugator really produces the normalised matrix
    assert star_conj(nm.C, A).close_to(nm.A_normal, thr) is Cert.TRUE
    # at u = 0 the eta term cancels the p^h z(0) part of mu
    assert nm.G.coeff(0) == ctx.ap
    hyp = check_G_hypotheses(nm.G, h)
    assert all(c is Cert.TRUE for c in hyp.values()), hyp
    res = descend(nm.G, ctx, hyp)
    assert all(c is Cert.TRUE for c in res.certs.values()), res.certs
    assert len(res.P) == h + 1
    assert res.P[0] == ctx.ap
    assert res.residual > h
    assert min(res.residual_entries.values()) >= thr


@pytest.mark.parametrize("p,k,e", [(3, 6, -5), (5, 6, -4), (7, 8, -5)])
def test_descent_progress_is_monotone(p, k, e):
    ctx, _, _, A = instance(p, k, e)
    h = k - 1
    G = normalize_to_G(A, ctx).G
    theta = default_threshold(h) + 4
    res = descend(G, ctx, theta=theta)
    assert res.rounds >= 2
    hist = res.history
    assert all(b - a >= 1 for a, b in zip(hist, hist[1:])), hist


def test_polynomial_G_is_a_fixed_point():
    p, h, N = 5, 4, 40
    ctx = SeriesContext(p, h, N, 60)
    G = TruncSeries.from_u_coeffs([25, 5, 0, 5, 5], p, N, 60)
    res = descend(G, ctx)
    assert res.rounds == 0
    assert res.P == [G.coeff(n) for n in range(h + 1)]
    assert PhiMat.identity(p, N, h, 60).close_to(res.C_total, 60) is Cert.TRUE
    assert all(c is Cert.TRUE for c in res.certs.values())


def test_descent_refuses_bad_G():
    p, h, N = 5, 4, 40
    ctx = SeriesContext(p, h, N, 60)
    G = TruncSeries.from_u_coeffs([1, 0, 0, 0, 0, 0, 1], p, N, 60)
    hyp = check_G_hypotheses(G, h)
    assert hyp["T<=h(G) integral"] is Cert.FALSE
    with pytest.raises(OutOfRangeError):
        descend(G, ctx)


def test_descent_budget_exhausted():
    ctx, _, _, A = instance(5, 6, -4)
    G = normalize_to_G(A, ctx).G
    with pytest.raises(DescentStalled):
        descend(G, ctx, theta=default_threshold(5) + 6, max_rounds=0)


def test_normalization_needs_unit_nu():
    p, h, N = 5, 4, 30
    ctx = SeriesContext(p, h, N, 60)
    A = PhiMat.of(ctx.const(5), ctx.E, ctx.Eh, ctx.zero(), h)
    with pytest.raises(OutOfRangeError):
        normalize_to_G(A, ctx)
