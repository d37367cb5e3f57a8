"""Branching and percolation bounds side by side with direct simulation."""
from asymcp import Params
from asymcp.bounds import PC_UPPER_Z2, beta_bar, gw_offspring_mean, gw_radius_bound, percolation_mc
from asymcp.dynamics import exit_estimate

gamma = 0.2
print(f"d=1, gamma={gamma}: offspring mean {gw_offspring_mean(1, gamma):.4f}")
for r in (2, 3, 5):
    est = exit_estimate(Params(0.0, 20.0, gamma), 1, r, 20_000, seed=r)
    print(f"  exit [-{r},{r}]: simulated {est.estimate:.4f}, branching bound {gw_radius_bound(1, gamma, r):.4f}")

for g in (0.0, 1.0):
    b = beta_bar(g, 2, PC_UPPER_Z2)
    print(f"d=2, gamma={g}: open-site probability reaches 7/8 at beta1 = {b:.4f}")

for b1 in (10.0, 70.0):
    est = percolation_mc(b1, 0.0, 2, 40, 200, seed=1)
    print(f"  beta1={b1}: p_open={est.p_open:.3f}, origin cluster reaches radius 40 in {est.estimate:.2f} of runs")
