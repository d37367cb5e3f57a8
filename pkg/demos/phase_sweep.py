"""Survival probability across beta1 with common random numbers.

On the line with gamma = 0 survival of a single seed turns positive near beta1 = 3.3.

Run: python3 demos/phase_sweep.py
"""
import numpy as np

from asymcp import LatticeGeometry, Params, survival_estimate

g = LatticeGeometry(1, 100)
print(" beta1  survival  95% CI")
for b in np.arange(2.0, 4.51, 0.25):
    est = survival_estimate(Params(float(b), 0.0, 0.0), g, "single-1", 100.0, 200, seed=0)
    lo, hi = est.ci
    print(f"{b:6.2f}  {est.estimate:8.3f}  ({lo:.3f}, {hi:.3f})")
