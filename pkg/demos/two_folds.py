"""
Two folds over one critical value
=================================

A single fold x -> x^2 is stable.  Two fold points mapping to the same value
are not: a small perturbation separates the critical values, so the
multigerm is not even locally equivalent to itself under deformation.  We
watch both sides of that story, the linear algebra and the geometry.
"""

# %%
# One fold
# --------

from germstab import check_infinitesimal_stability, theorem1_local_equivalence
from germstab.catalog import config_get

fold = config_get("fold_1_1", 2).config
verdict = check_infinitesimal_stability(fold)
print("fold:", "stable" if verdict.stable else "unstable",
      f"(rank {verdict.rank} of {verdict.dimension} at order {verdict.order})")
print("certificate re-checked:", verdict.verify())

# %%
# Two folds
# ---------
# The operator is no longer onto.  The witness is a field along the two
# germs that no combination of tf, wf and ideal terms reaches.

two = config_get("two_folds_1_1", 2).config
verdict = check_infinitesimal_stability(two)
print("two folds:", "stable" if verdict.stable else "unstable",
      f"(rank {verdict.rank} of {verdict.dimension})")
w = verdict.witness
print("unreachable field:", [f.to_str(["x"]) for f in w.w])
print("witness re-checked:", w.verify(verdict.operator))

# %%
# The geometric side
# ------------------
# Each fold's critical-value stratum is the origin of the line.  Two copies
# of {0} in R^1 are not in general position, which matches the verdict.

report = theorem1_local_equivalence(two)
print("strata in general position:", report.general_position)
print("per-germ verdicts:", [v.stable for v in report.germ_verdicts])
print("both sides agree:", report.agree)

# %%
# A regular sheet does not hurt
# -----------------------------

mixed = config_get("fold_regular_1_1", 2).config
print("fold + regular:", check_infinitesimal_stability(mixed).stable)
