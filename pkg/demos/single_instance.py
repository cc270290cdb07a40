"""Run one instance and print the certificate table and the reduction."""

from fractions import Fraction

from kisinred.pipeline import RunConfig, run_pipeline

rep = run_pipeline(RunConfig(p=5, k=6, L_val=Fraction(-3)))
print(f"status {rep.status}, bound satisfied {rep.bound}")
for c in rep.certificates:
    print(f"  {c.status:>6}  {c.group}: {c.name}")
print("P valuations:", [c["valuation"] for c in rep.P])
print("reduction:", rep.reduction["form"], "->", rep.reduction["label"])
