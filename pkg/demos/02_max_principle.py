"""
Maximum and comparison principles
=================================

The scheme is monotone: implicit Euler with a nonnegative drift at the
degenerate face keeps sup|u| below sup|f| + T sup|g|.
"""
from kimuralab.operator import CoefficientSet
from kimuralab.verify import Problem, RoughData, comparison_check, max_principle_check

L = CoefficientSet.from_mapping(1, 0, {"a1": "1", "b1": "0.5"})

for p in [Problem("f=0, g=-1 (equality)", L, "0", "-1"),
          Problem("gaussian", L, "exp(-(x1 - 1)^2)"),
          Problem("rough, beta=1/3", L, RoughData(1 / 3))]:
    r = max_principle_check(p)
    m = r.measured
    print("%-24s sup|u|=%.6f  bound=%.6f  two-grid tol=%.1e  %s" % (
        p.name, m["sup_u"], m["rhs"], m["tol"], r.status))

# nonpositive data stays nonpositive
r = comparison_check(Problem("neg", L, "-x1*exp(-x1)", "-1"))
print("comparison: max u = %.3e  %s" % (r.measured["max_u"], r.status))

# a negative drift at x = 0 is refused before any solve
try:
    Problem("bad", CoefficientSet.from_mapping(1, 0, {"a1": "1", "b1": "-0.1"}), "x1").solve(
        Problem("bad", L, "x1").config(16, 0.05))
except Exception as exc:
    print("negative drift:", type(exc).__name__)
