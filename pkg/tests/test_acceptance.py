"""The ten acceptance criteria, one test each.

Every test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line and then
asserts; the lines are repeated in a block at the end of the session.
"""

import time
from fractions import Fraction

import pytest

from kisinred.breuil import (
    check_coeff_bounds,
    closed_form_x2,
    closed_form_z2_at0,
    filtration_recursion,
    recursion_from_module,
    verify_filtration,
)
from kisinred.filtmod import make_D, to_f_basis
from kisinred.kisin import (
    A_closed_form,
    A_prime_closed_form,
    SeriesContext,
    build_A,
    build_A_prime,
)
from kisinred.padic import INF, Cert, FieldElem
from kisinred.pipeline import EXIT_CERT_FAILURE, EXIT_OK, RunConfig, run_pipeline
from kisinred.reduction import bound_forms_agree, bound_threshold, theorem_bound

PRIMES = (3, 5, 7)
TUPLES = [  # (a, b, c, d): integral, mixed, and with p in denominators
    (Fraction(1), Fraction(2), Fraction(3), Fraction(-1)),
    (Fraction(7, 2), Fraction(-5, 3), Fraction(1, 4), Fraction(2)),
    (Fraction(0), Fraction(1), Fraction(-2, 9), Fraction(1, 5)),
]
L_EXPS = (-5, -2, 1)


RESULTS = {}


@pytest.fixture(autouse=True)
def _capsys(capsys):
    global CAPSYS
    CAPSYS = capsys


def announce(n: int, ok: bool, detail: str):
    line = f"ACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    with CAPSYS.disabled():
        print("\n" + line)


def recursion_grid():
    """(p, h, data, L) over rational tuples and module-derived scalars."""
    out = []
    for p in PRIMES:
        for h in range(2, 9):
            for a, b, c, d in TUPLES:
                out.append((p, h, filtration_recursion(h, a, b, c, d, p), None))
            for e in L_EXPS:
                L = FieldElem.w_power(e, p)
                out.append((p, h, recursion_from_module(to_f_basis(make_D(p, h + 1, L))), L))
    return out


def compliant_configs():
    """Instances inside the strong bound with h >= 4 or p = h = 3, two v_L each."""
    out = []
    for p in PRIMES:
        for k in range(4 if p == 3 else 5, 10):
            t = bound_threshold(p, k)
            for v in (-(t + Fraction(1, 2)), -(t + 2)):
                out.append(RunConfig(p=p, k=k, L_val=v))
    return out


@pytest.fixture(scope="module")
def compliant_runs():
    runs = []
    for cfg in compliant_configs():
        t0 = time.perf_counter()
        rep = run_pipeline(cfg)
        runs.append((cfg, rep, time.perf_counter() - t0))
    return runs


@pytest.fixture(scope="module")
def crystalline_runs():
    return [run_pipeline(RunConfig(p=p, k=k, L="oo")) for p in PRIMES for k in range(4, 10)]


def group_certs(rep, groups):
    return [c for c in rep.certificates if c.group in groups]


def test_criterion_1_recursion_closed_forms():
    t0 = time.perf_counter()
    grid = recursion_grid()
    bad = []
    for p, h, data, _ in grid:
        pi = FieldElem(-p, 0, p)
        a, b, d = data.a, data.b, data.d
        if data.x[0] != b / pi:
            bad.append((p, h, "x1"))
        if h >= 3:
            if data.x[1] != closed_form_x2(a, b, d, p):
                bad.append((p, h, "x2"))
            z2 = data.z_partial[2].u_coeffs()
            if (z2[0] if z2 else FieldElem(0, 0, p)) != closed_form_z2_at0(a, b, d, p):
                bad.append((p, h, "z2(0)"))
    elapsed = time.perf_counter() - t0
    ok = not bad and len(grid) >= 50 and elapsed < 10
    announce(1, ok, f"{len(grid)} instances, {elapsed:.2f}s, mismatches {bad[:3]}")
    assert ok


def test_criterion_2_filtration_membership():
    grid = recursion_grid()
    bad = [(p, h) for p, h, data, _ in grid if verify_filtration(data).ok is not Cert.TRUE]
    ok = not bad
    announce(2, ok, f"{len(grid)} instances verified by exact division, failures {bad[:3]}")
    assert ok


def test_criterion_3_coefficient_bounds():
    n_lemma = n_est = 0
    bad = []
    for p, h, data, L in recursion_grid():
        bc = check_coeff_bounds(data, None if L is None else -L.valuation())
        if bc.lemma_hypotheses:
            n_lemma += 1
            if Cert.all(bc.lemma + bc.b_chain) is not Cert.TRUE:
                bad.append((p, h, "lemma"))
        if bc.estimate_applies:
            n_est += 1
            if Cert.all(bc.estimate) is not Cert.TRUE:
                bad.append((p, h, "estimate"))
    ok = not bad and n_lemma > 0 and n_est > 0
    announce(3, ok, f"first bound on {n_lemma}, estimate on {n_est} instances, failures {bad[:3]}")
    assert ok


def test_criterion_4_matrix_identities(compliant_runs, crystalline_runs):
    names = {"A' closed form", "det A' = E^h c^-h", "A closed form", "det A = unit E^h"}
    bad = []
    for rep in [r for _, r, _ in compliant_runs] + crystalline_runs:
        got = {c.name: c.cert for c in rep.certificates if c.group == "matrix"}
        if set(got) != names or any(v is not Cert.TRUE for v in got.values()):
            bad.append((rep.config.p, rep.config.k, rep.config.L_val))
    # the crystalline matrices carry only p-power denominators: compare exactly through N_u
    exact_ok = True
    for p, h in [(3, 3), (3, 5), (5, 4), (5, 6), (7, 4)]:
        N = RunConfig(p=p, k=h + 1, L="oo").default_deg_u()
        ctx = SeriesContext(p, h, N, INF)
        z = ctx.zero()
        Ap = build_A_prime(ctx, z)
        diffs = list((build_A(ctx, Ap) - A_closed_form(ctx, z)).entries())
        diffs += list((Ap - A_prime_closed_form(ctx, z)).entries())
        diffs.append(Ap.det() - ctx.Eh * ctx.c_inv_h)
        exact_ok &= all(c.is_exact() and c.is_zero_at_prec() for f in diffs for c in f.u_coeffs(N))
    ok = not bad and exact_ok
    announce(4, ok, f"{len(compliant_runs) + len(crystalline_runs)} instances certified, "
                    f"exact through N_u on the crystalline path: {exact_ok}, failures {bad[:3]}")
    assert ok


def test_criterion_5_valuation_lemmas(compliant_runs):
    bad = []
    for cfg, rep, _ in compliant_runs:
        certs = group_certs(rep, {"lambda", "z", "G"})
        certs += [c for c in rep.certificates if c.name == "G - mu in H_h^o"]
        if len(certs) < 12 or any(c.cert is not Cert.TRUE or c.status == "unknown-final" for c in certs):
            bad.append((cfg.p, cfg.k, str(cfg.L_val)))
    p3h3 = [rep for cfg, rep, _ in compliant_runs if cfg.p == 3 and cfg.k == 4]
    sharp = all(rep.cert("nu sharp") is Cert.TRUE and rep.cert("phi(z) sharp") is Cert.TRUE for rep in p3h3)
    ok = not bad and sharp and bool(p3h3)
    announce(5, ok, f"{len(compliant_runs)} compliant instances, p = h = 3 sharpening {sharp}, failures {bad[:3]}")
    assert ok


def test_criterion_6_descent_postconditions(compliant_runs, crystalline_runs):
    expected = {"C(0) = I", "C invertible", "residual", "deg P <= h", "P integral",
                "P - T<=h(G) in H_h^o", "bottom-left E^h", "height"}
    bad = []
    slowest = 0.0
    for cfg, rep, dt in compliant_runs:
        slowest = max(slowest, dt)
        got = {c.name: c for c in group_certs(rep, {"descent"})}
        if set(got) != expected or any(c.cert is not Cert.TRUE or not c.asserted for c in got.values()):
            bad.append((cfg.p, cfg.k, str(cfg.L_val)))
        if rep.exit_code != EXIT_OK or len(rep.P) != cfg.h + 1 or dt >= 60:
            bad.append((cfg.p, cfg.k, str(cfg.L_val), "run"))
    for rep in crystalline_runs:
        if rep.exit_code != EXIT_OK or any(c.cert is not Cert.TRUE for c in group_certs(rep, {"descent"})):
            bad.append((rep.config.p, rep.config.k, "oo"))
    ok = not bad
    announce(6, ok, f"{len(compliant_runs)} + {len(crystalline_runs)} descents, slowest {slowest:.2f}s, "
                    f"failures {bad[:3]}")
    assert ok


def _label_ok(red, p, h):
    q2 = p * p - 1
    return (
        red is not None
        and red["form"] == f"(0, -1; u^{h}, 0)"
        and red["label"] == f"Ind(omega_2^{h} chi)"
        and set(red["weights"]) == {h % q2, p * h % q2}
        and red["det_exponent"] == h % (p - 1)
        and red["irreducible"] == (h % (p + 1) != 0)
    )


def test_criterion_7_reduction_agreement(compliant_runs, crystalline_runs):
    bad = []
    for cfg, rep, _ in compliant_runs:
        p, h = cfg.p, cfg.h
        if not (_label_ok(rep.reduction, p, h) and _label_ok(rep.crystalline_reduction, p, h)
                and rep.labels_agree is True):
            bad.append((p, cfg.k, str(cfg.L_val)))
    for rep in crystalline_runs:
        if not _label_ok(rep.reduction, rep.config.p, rep.config.h):
            bad.append((rep.config.p, rep.config.k, "oo"))
    ok = not bad
    announce(7, ok, f"labels Ind(omega_2^h chi) on both paths, failures {bad[:3]}")
    assert ok


def test_criterion_8_bound_predicate():
    vec = (theorem_bound(3, 6, -3), theorem_bound(3, 6, -2), theorem_bound(3, 4, -1))
    grid = all(bound_forms_agree(p, k) for p in (3, 5, 7, 11, 13) for k in range(3, 60))
    ok = vec == (True, False, True) and grid
    announce(8, ok, f"(3,6,-3),(3,6,-2),(3,4,-1) -> {vec}; bound forms agree on grid: {grid}")
    assert ok


def test_criterion_9_weak_bound_path():
    thr = bound_threshold(3, 3, weak=True)
    vals = [Fraction(-1), Fraction(-3, 2), Fraction(-2), Fraction(-3)]
    bad = []
    for v in vals:
        assert -v > thr
        rep = run_pipeline(RunConfig(p=3, k=3, L_val=v, weak_bound=True))
        if rep.exit_code != EXIT_OK or rep.bound is not True or not rep.certificates \
                or any(c.cert is not Cert.TRUE for c in rep.certificates):
            bad.append((str(v), rep.status))
    ok = not bad
    announce(9, ok, f"p = 3, h = 2 with the weak bound at v_L in {[str(v) for v in vals]}, failures {bad}")
    assert ok


def test_criterion_10_negative_control():
    rep = run_pipeline(RunConfig(p=3, k=6, L_val=Fraction(-2)))
    integral = [c for c in rep.certificates if c.name == "P integral"]
    d = rep.to_json(timings=False)
    ok = (
        rep.bound is False
        and d["bound"]["satisfied"] is False
        and all(not c.asserted for c in integral)
        and not any(c.name == "induced label" for c in rep.certificates)
        and rep.exit_code != EXIT_CERT_FAILURE
        and "not asserted" in rep.message
    )
    announce(10, ok, f"(3, 6, v = -2): bound {rep.bound}, P integrality asserted: "
                     f"{[c.asserted for c in integral]}, observed {rep.P_integral_observed}")
    assert ok
