"""
Checking the error bounds numerically
=====================================

Two inequalities tie the quality of a sketch to quantities we can compute:

* the summed one-sided error over a stream is at most ||A||^2 minus the
  top-r energy of S A_(1);
* the excess error on one matrix is at most ||U_k U_k^T - S^T S||_F^2 ||A||_F^2.

We check both on random instances and look at how much slack they leave.
"""

import numpy as np

from tensorsketch.harness import relaxation_trials, subspace_gap_trials

rel = relaxation_trials(100, seed=0)
slack = np.array([(r.rhs - r.lhs) / r.rhs for r in rel])
print(f"stream bound holds in {sum(r.holds for r in rel)}/100; relative slack median {np.median(slack):.2f}")

gaps = subspace_gap_trials(100, seed=0)
ratio = np.array([g.excess / g.bound_factor for g in gaps])
print(f"subspace bound holds in {sum(g.holds for g in gaps)}/100; excess/bound median {np.median(ratio):.3f}")

# %%
# Random sketches are far from the dominant subspace, so the second bound
# is loose here: it is informative only when the sketch is nearly optimal,
# which is what training aims for.
