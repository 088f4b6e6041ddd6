"""
Rough data: local bounds and smoothing
======================================

Continuous data with a Holder-beta kink at x = 0.5.  Away from t = 0 the
weighted norm of u settles under refinement; the data itself does not.
"""
from kimuralab.operator import CoefficientSet
from kimuralab.verify import Problem, RoughData, RoughDataFamily, schauder_ratio_local, smoothing_check

L = CoefficientSet.from_mapping(1, 0, {"a1": "1", "b1": "0.5"})

fam = [Problem("beta=%.3g" % mb.beta, L, mb, T=0.5) for mb in RoughDataFamily().members()]
rep = schauder_ratio_local(fam, T0=0.2, r=0.5, z0=[0.5], alpha=0.5)
print(rep.summary_line())
for row in rep.table:
    print("   %-10s J=%3d  Q=%.4f" % (row["problem"], row["J"], row["Q"]))

rep = smoothing_check(Problem("beta=1/2", L, RoughData(0.5), T=0.5), T0=0.2, alpha=0.5)
print(rep.summary_line())
for row in rep.table:
    print("   J=%3d  norm on [T0,T]: %.4f   data interpolant: %.2f" % (
        row["J"], row["late_norm"], row["early_norm"]))
