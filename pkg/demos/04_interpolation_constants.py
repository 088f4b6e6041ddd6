"""
Interpolation constants
=======================

The lower-order pieces of the weighted norm are bounded by
eps ||u||_{2+alpha} + C eps^{-m0} ||u||_C.  C and m0 are calibrated once
on a fixed smooth family and frozen in kimuralab/data/constants.json;
this script reads them back and re-checks one configuration on a
different grid.
"""
from kimuralab.interpolation import eps_grid, load_constants, smooth_family
from kimuralab.verify import interp_check

table = load_constants()
for key, row in sorted(table["interpolation"].items()):
    print("%-24s C=%-6g m0=%g  (required %.3g)" % (key, row["C"], row["m0"], row["C_required"]))
for key, row in sorted(table["lemma_Lu"].items()):
    print("%-24s L u bound: C=%g m_k=%g" % (key, row["C"], row["m_k"]))

print("family:", ", ".join(mb.name for mb in smooth_family(1, 0)))
rep = interp_check(1, 0, 0.5, eps=eps_grid(), grid_kw={"J": 40})
print(rep.summary_line())

# recalibrating (slow-ish, a few seconds) reproduces the frozen values:
# from kimuralab.interpolation import calibrate; print(calibrate(1, 0, 0.5))
