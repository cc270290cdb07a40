"""p = 3, k = 6, v(L) = -2 lies outside the bound.

The descent still runs, but integrality of P is only observed, never asserted.
"""

from fractions import Fraction

from kisinred.pipeline import RunConfig, run_pipeline

for v in (Fraction(-3), Fraction(-2)):
    rep = run_pipeline(RunConfig(p=3, k=6, L_val=v))
    cert = next(c for c in rep.certificates if c.name == "P integral")
    print(f"v = {v}: bound {rep.bound}, P integral {cert.status}, asserted {cert.asserted}")
    if rep.message:
        print("  ", rep.message)
