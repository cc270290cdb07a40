"""End-to-end runs: filtered module -> filtration -> Kisin matrix -> descent -> label.

A run produces a :class:`RunReport`.  Each certificate in the report is marked
``asserted`` when the theory guarantees it for the instance; the exit code is
decided by the asserted certificates only.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .breuil import check_coeff_bounds, recursion_from_module, verify_filtration
from .descent import (
    DescentStalled,
    OutOfRangeError,
    check_G_hypotheses,
    default_threshold,
    descend,
    lambda_estimates,
    normalize_to_G,
    z_estimates,
)
from .filtmod import make_D, to_f_basis, weak_admissibility_check
from .kisin import (
    A_closed_form,
    A_prime_closed_form,
    SeriesContext,
    build_A,
    build_A_prime,
    height_certificate,
    z_series,
)
from .padic import INF, Cert, FieldElem, PrecisionError, format_literal, is_prime, parse_literal
from .reduction import NotIntegralError, UnsupportedPrimeError, bound_threshold, classify, reduce_mod_p, theorem_bound

SCHEMA = 1
MAX_ESCALATIONS = 2

EXIT_OK = 0
EXIT_CERT_FAILURE = 1
EXIT_OUT_OF_RANGE = 2
EXIT_PRECISION = 3


@dataclass(frozen=True)
class RunConfig:
    """One instance.  ``L`` is a literal ("oo" for the crystalline limit)."""

    p: int
    k: int
    L: Optional[str] = None
    L_val: Optional[Fraction] = None
    prec: Optional[int] = None
    deg_u: Optional[int] = None
    weak_bound: bool = False

    @property
    def h(self) -> int:
        return self.k - 1

    @property
    def crystalline(self) -> bool:
        return self.L is not None and self.L.strip().lower() in ("oo", "inf", "infinity")

    def validate(self):
        """Raise OutOfRangeError for configurations the method does not cover."""
        p, h = self.p, self.h
        if p == 2:
            raise OutOfRangeError("p = 2 is not supported")
        if not is_prime(p):
            raise OutOfRangeError(f"p = {p} is not prime")
        if self.k < 3:
            raise OutOfRangeError(f"weight k = {self.k} must be at least 3")
        if (self.L is None) == (self.L_val is None):
            raise OutOfRangeError("give exactly one of L and L_val")
        if not self.crystalline and not self.weak_bound:
            if p == 3 and h < 3:
                raise OutOfRangeError("p = 3 needs h >= 3 under the strong bound (try the weak bound)")
            if p >= 5 and h < 4:
                raise OutOfRangeError(
                    f"p = {p}, h = {h}: the descent argument needs h >= 4 (or p = h = 3) under the strong bound"
                )
        if self.deg_u is not None and self.deg_u < p * p:
            raise OutOfRangeError(f"--deg-u must be at least p^2 = {p * p}")

    def theta(self) -> int:
        return default_threshold(self.h)

    def default_deg_u(self) -> int:
        """Window large enough that the c^-h tail (about (p-2)/p per degree) clears the threshold."""
        p, h = self.p, self.h
        return max(p * p, 2 * p * h, math.ceil(p * (self.theta() + 2 * h + 4) / (p - 2)))

    def default_prec(self, v_L) -> int:
        v = 0 if v_L is None else math.ceil(abs(Fraction(v_L)))
        return 2 * self.h + 2 * v + 10


def _frac_json(v):
    if v is None:
        return None
    if v == INF or v == math.inf:
        return "inf"
    if v == -INF or v == -math.inf:
        return "-inf"
    f = Fraction(v) if not isinstance(v, float) else Fraction(v).limit_denominator(2)
    return {"num": f.numerator, "den": f.denominator}


def _elem_json(e: FieldElem) -> dict:
    return {"value": format_literal(e), "valuation": _frac_json(e.valuation()), "exact": e.is_exact()}


@dataclass
class CertEntry:
    group: str
    name: str
    cert: Cert
    asserted: bool
    status: str = ""

    def to_json(self):
        return {"group": self.group, "name": self.name, "status": self.status, "asserted": self.asserted}


@dataclass
class RunReport:
    config: RunConfig
    exit_code: int = EXIT_OK
    status: str = "ok"
    message: str = ""
    L_repr: Optional[str] = None
    v_L: Optional[Fraction] = None
    representative_dependent: bool = False
    bound: Optional[bool] = None
    bound_threshold: Optional[Fraction] = None
    certificates: list = field(default_factory=list)
    x_valuations: list = field(default_factory=list)
    G_summary: dict = field(default_factory=dict)
    P: list = field(default_factory=list)
    P_integral_observed: Optional[bool] = None
    reduction: Optional[dict] = None
    crystalline_reduction: Optional[dict] = None
    labels_agree: Optional[bool] = None
    notes: dict = field(default_factory=dict)
    deg_u: Optional[int] = None
    prec: Optional[int] = None
    escalations: int = 0
    timings: dict = field(default_factory=dict)

    def cert(self, name: str) -> Optional[Cert]:
        for c in self.certificates:
            if c.name == name:
                return c.cert
        return None

    def asserted(self) -> list:
        return [c for c in self.certificates if c.asserted]

    def to_json(self, timings: bool = True) -> dict:
        cfg = self.config
        out = {
            "schema": SCHEMA,
            "config": {
                "p": cfg.p, "k": cfg.k, "h": cfg.h,
                "L": cfg.L, "L_val": _frac_json(cfg.L_val),
                "prec": self.prec, "deg_u": self.deg_u, "weak_bound": cfg.weak_bound,
            },
            "status": self.status,
            "exit_code": self.exit_code,
            "message": self.message,
            "L_representative": self.L_repr,
            "representative_dependent": self.representative_dependent,
            "v_L": _frac_json(self.v_L),
            "bound": {"satisfied": self.bound, "threshold_v_Linv": _frac_json(self.bound_threshold)},
            "certificates": [c.to_json() for c in self.certificates],
            "x_valuations": [_frac_json(v) for v in self.x_valuations],
            "G": self.G_summary,
            "P": self.P,
            "P_integral_observed": self.P_integral_observed,
            "reduction": self.reduction,
            "crystalline_reduction": self.crystalline_reduction,
            "labels_agree": self.labels_agree,
            "notes": self.notes,
            "escalations": self.escalations,
        }
        if timings:
            out["timings"] = {k: round(v, 4) for k, v in self.timings.items()}
        return out


# one attempt ---------------------------------------------------------------------

class _Attempt:
    """State of a single attempt at fixed (deg_u, prec)."""

    def __init__(self, cfg: RunConfig, L: Optional[FieldElem], N: int, prec: int, report: RunReport):
        self.cfg, self.L, self.N, self.prec, self.rep = cfg, L, N, prec, report
        self.certs: list = []
        self.t0 = time.perf_counter()

    def add(self, group, name, cert, asserted=True):
        self.certs.append(CertEntry(group, name, cert, asserted))

    def lap(self, key):
        now = time.perf_counter()
        self.rep.timings[key] = self.rep.timings.get(key, 0.0) + now - self.t0
        self.t0 = now

    def run(self):
        cfg, rep = self.cfg, self.rep
        p, h, k = cfg.p, cfg.h, cfg.k
        bound_ok = bool(rep.bound)
        theta = cfg.theta()
        ctx = SeriesContext(p, h, self.N, 2 * self.prec)

        # filtered module and filtration
        D = make_D(p, k, self.L)
        for name, ok in D.check_axioms().items():
            self.add("module", name, Cert.of(ok))
        self.add("module", "weakly admissible", weak_admissibility_check(D).admissible)
        if self.L is None:
            z = ctx.zero()
        else:
            Df = to_f_basis(D)
            cmp_n = Df.notes["displayed_n_comparison"]
            rep.notes["monodromy_vs_displayed"] = cmp_n["entrywise_vs_displayed"]
            self.add("module", "monodromy b-entry", Cert.of(cmp_n["matches_b_value"]))
            fd = recursion_from_module(Df)
            rep.x_valuations = fd.x_valuations()
            self.add("filtration", "Fil^i generators", verify_filtration(fd, Df).ok)
            bc = check_coeff_bounds(fd, -self.L.valuation())
            if bc.lemma_hypotheses:
                self.add("filtration", "x_i bound", Cert.all(bc.lemma + bc.b_chain))
            if bc.estimate_applies:
                self.add("filtration", "x_j estimate", Cert.all(bc.estimate), asserted=bound_ok)
            z = z_series(ctx, fd)
        self.lap("filtration")

        # Kisin matrices
        Ap = build_A_prime(ctx, z)
        self.add("matrix", "A' closed form", Ap.close_to(A_prime_closed_form(ctx, z), theta))
        self.add("matrix", "det A' = E^h c^-h", (Ap.det() - ctx.Eh * ctx.c_inv_h).in_H(theta))
        A = build_A(ctx, Ap)
        self.add("matrix", "A closed form", A.close_to(A_closed_form(ctx, z), theta))
        self.add("matrix", "det A = unit E^h", height_certificate(A, theta).ok)
        self.lap("kisin")

        # valuation lemmas
        for name, c in lambda_estimates(ctx).items():
            self.add("lambda", name, c)
        ze = z_estimates(ctx, z, self.L, weak=cfg.weak_bound)
        for name, c in ze.certs.items():
            self.add("z", name, c, asserted=bound_ok)
        if ze.z0 is not None:
            rep.notes["z0_p3h3"] = {
                "computed": format_literal(ze.z0["computed"]),
                "closed_form": format_literal(ze.z0["closed_form"]),
                "ratio": None if ze.z0["ratio"] is None else format_literal(ze.z0["ratio"]),
            }

        # normalisation and descent
        try:
            nm = normalize_to_G(A, ctx)
        except OutOfRangeError as exc:
            if bound_ok:
                raise
            rep.notes["normalization"] = str(exc)
            self.lap("descent")
            return
        for name, c in nm.certs.items():
            self.add("normalization", name, c, asserted=bound_ok or name != "G - mu in H_h^o")
        G = nm.G
        hyp = check_G_hypotheses(G, h)
        for name, c in hyp.items():
            self.add("G", name, c, asserted=bound_ok)
        rep.G_summary = {
            "coeffs": [_elem_json(G.coeff(n)) for n in range(h + 1)],
            "v_R2_lower": _frac_json(G.vlow()),
            "v_R2_tail_above_h_lower": _frac_json(G.truncate_gt(h).vlow()),
        }
        try:
            res = descend(G, ctx, hyp, theta=theta, require_hypotheses=bound_ok)
        except (DescentStalled, OutOfRangeError) as exc:
            if bound_ok:
                raise
            # outside the bound nothing guarantees that the descent exists
            rep.notes["descent"] = f"no descent found: {exc}"
            self.lap("descent")
            return
        for name, c in res.certs.items():
            self.add("descent", name, c, asserted=bound_ok)
        rep.P = [_elem_json(c) for c in res.P]
        rep.P_integral_observed = res.certs["P integral"] is Cert.TRUE
        rep.notes["descent_rounds"] = res.rounds
        rep.notes["descent_history"] = [_frac_json(v) for v in res.history]
        self.lap("descent")

        # reduction
        try:
            label = classify(reduce_mod_p(res.P, h, p), p)
            rep.reduction = label.to_json()
        except NotIntegralError as exc:
            rep.reduction = {"label": None, "refused": str(exc)}
            label = None
        if bound_ok:
            self.add("reduction", "induced label", Cert.of(label is not None and label.kind == "induced"
                                                            and label.exponent == h))
        if self.L is not None:
            cris = _crystalline_label(p, h, self.N, self.prec, theta)
            rep.crystalline_reduction = cris.to_json() if cris is not None else None
            rep.labels_agree = label is not None and cris is not None and label.same_as(cris)
            if bound_ok:
                self.add("reduction", "labels agree with L = oo", Cert.of(rep.labels_agree))
        self.lap("reduction")


def _crystalline_label(p, h, N, prec, theta):
    ctx = SeriesContext(p, h, N, 2 * prec)
    A = build_A(ctx, build_A_prime(ctx, ctx.zero()))
    G = normalize_to_G(A, ctx).G
    res = descend(G, ctx, theta=theta)
    return classify(reduce_mod_p(res.P, h, p), p)


# public entry points --------------------------------------------------------------

def _materialize_L(cfg: RunConfig, report: RunReport) -> Optional[FieldElem]:
    p = cfg.p
    if cfg.crystalline:
        report.L_repr = "oo"
        return None
    if cfg.L is not None:
        L = parse_literal(cfg.L, p)
    else:
        v = Fraction(cfg.L_val)
        if v.denominator not in (1, 2):
            raise OutOfRangeError(f"v_p(L) = {v} is not in (1/2)Z")
        L = FieldElem.w_power(int(2 * v), p)
        report.representative_dependent = True
    if L.is_zero_at_prec():
        raise OutOfRangeError("L = 0 is not supported (the Fil line is then phi-stable)")
    report.L_repr = format_literal(L)
    return L


def run_pipeline(cfg: RunConfig) -> RunReport:
    """Run one instance with automatic precision escalation (at most twice)."""
    report = RunReport(cfg)
    try:
        cfg.validate()
        L = _materialize_L(cfg, report)
    except (OutOfRangeError, UnsupportedPrimeError, ValueError) as exc:
        return _refuse(report, exc)
    if L is None:
        report.v_L = None
        report.bound = True
    else:
        report.v_L = L.valuation()
        report.bound = theorem_bound(cfg.p, cfg.k, report.v_L, cfg.weak_bound)
        report.bound_threshold = bound_threshold(cfg.p, cfg.k, cfg.weak_bound)
    N = cfg.deg_u or cfg.default_deg_u()
    prec = cfg.prec or cfg.default_prec(report.v_L)
    last_error = None
    for attempt in range(MAX_ESCALATIONS + 1):
        report.certificates = []
        report.notes, report.P, report.G_summary = {}, [], {}
        report.reduction = report.crystalline_reduction = None
        report.P_integral_observed = report.labels_agree = None
        report.escalations = attempt
        report.deg_u, report.prec = N, prec
        run = _Attempt(cfg, L, N, prec, report)
        try:
            run.run()
        except OutOfRangeError as exc:
            return _refuse(report, exc)
        except (PrecisionError, DescentStalled) as exc:
            last_error = exc
            report.certificates = run.certs
            N, prec = 2 * N, 2 * prec
            continue
        report.certificates = run.certs
        if any(c.asserted and c.cert is Cert.UNKNOWN for c in run.certs) and attempt < MAX_ESCALATIONS:
            N, prec = 2 * N, 2 * prec
            continue
        last_error = None
        break
    return _finish(report, last_error)


def _refuse(report: RunReport, exc: Exception) -> RunReport:
    report.status = "out-of-range"
    report.exit_code = EXIT_OUT_OF_RANGE
    report.message = str(exc)
    return report


def _finish(report: RunReport, error) -> RunReport:
    final = error is None
    for c in report.certificates:
        if c.cert is Cert.UNKNOWN:
            c.status = "unknown-final" if final or report.escalations >= MAX_ESCALATIONS else "unknown-escalated"
        else:
            c.status = c.cert.value
    if error is not None:
        report.status = "precision-exhausted"
        report.exit_code = EXIT_PRECISION
        report.message = str(error)
        for c in report.certificates:
            if c.cert is Cert.UNKNOWN:
                c.status = "unknown-final"
        return report
    asserted = report.asserted()
    if any(c.cert is Cert.FALSE for c in asserted):
        report.status = "certificate-failure"
        report.exit_code = EXIT_CERT_FAILURE
        report.message = "failed: " + ", ".join(c.name for c in asserted if c.cert is Cert.FALSE)
    elif any(c.cert is Cert.UNKNOWN for c in asserted):
        report.status = "precision-exhausted"
        report.exit_code = EXIT_PRECISION
        report.message = "undecided: " + ", ".join(c.name for c in asserted if c.cert is Cert.UNKNOWN)
    else:
        report.status = "ok"
        report.exit_code = EXIT_OK
        if not report.bound:
            report.message = "bound not satisfied: integrality of P is reported, not asserted"
    return report


# sweeps --------------------------------------------------------------------------------

def _parse_values(text: str, key: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = [Fraction(b) for b in part.split(":")]
            if len(bits) not in (2, 3):
                raise ValueError(f"bad range {part!r} for {key}")
            lo, hi = bits[0], bits[1]
            step = bits[2] if len(bits) == 3 else Fraction(1)
            if step <= 0:
                raise ValueError(f"range step must be positive in {part!r}")
            v = lo
            while v <= hi:
                out.append(v)
                v += step
        else:
            out.append(Fraction(part))
    return out


def parse_sweep(text: str) -> dict:
    """Parse "p=3,5;k=4:8:2;v=-4:-1" into value lists.

    Ranges are inclusive, ``a:b`` or ``a:b:step``.  ``v`` is v_p(L) and may be
    half-integral; ``oo`` in the ``v`` list selects the crystalline limit.
    """
    grid = {"p": [], "k": [], "v": []}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        key, _, vals = chunk.partition("=")
        key = key.strip()
        if key not in grid:
            raise ValueError(f"unknown sweep key {key!r} (expected p, k, v)")
        for part in vals.split(","):
            if key == "v" and part.strip().lower() in ("oo", "inf"):
                grid["v"].append(None)
                continue
            values = _parse_values(part, key)
            if key in ("p", "k") and any(v.denominator != 1 for v in values):
                raise ValueError(f"{key} values must be integers")
            grid[key].extend(int(v) if key != "v" else v for v in values)
    return grid


def sweep(grid_text: str, base: Optional[RunConfig] = None) -> tuple[list, list]:
    """Run every cell of the grid; returns (reports, summary rows)."""
    grid = parse_sweep(grid_text)
    reports, rows = [], []
    for p in grid["p"]:
        for k in grid["k"]:
            for v in grid["v"]:
                kw = dict(p=p, k=k, L="oo" if v is None else None, L_val=v)
                cfg = replace(base, **kw) if base is not None else RunConfig(**kw)
                try:
                    rep = run_pipeline(cfg)
                except Exception as exc:  # a failing cell must not stop the sweep
                    rep = RunReport(cfg, exit_code=EXIT_CERT_FAILURE, status="error", message=repr(exc))
                reports.append(rep)
                rows.append({
                    "p": p, "k": k, "v_L": "oo" if v is None else str(v),
                    "bound": rep.bound,
                    "label": (rep.reduction or {}).get("label"),
                    "status": rep.status,
                    "exit_code": rep.exit_code,
                })
    return reports, rows


def format_summary(rows: list) -> str:
    head = f"{'p':>3} {'k':>3} {'v_L':>6} {'bound':>6}  {'status':<20} label"
    lines = [head, "-" * len(head)]
    for r in rows:
        b = "-" if r["bound"] is None else ("yes" if r["bound"] else "no")
        lines.append(f"{r['p']:>3} {r['k']:>3} {r['v_L']:>6} {b:>6}  {r['status']:<20} {r['label'] or '-'}")
    return "\n".join(lines)
