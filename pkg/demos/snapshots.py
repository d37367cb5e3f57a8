"""Grow an epidemic from a single asymptomatic site and save PGM snapshots.

Run: python3 demos/snapshots.py [outdir]
"""
import sys
from pathlib import Path

from asymcp import LatticeGeometry, Params, initial_configuration, run_ctmc
from asymcp.lattice import write_pgm

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_snapshots")
out.mkdir(parents=True, exist_ok=True)

g = LatticeGeometry(2, 80)
p = Params(beta1=12.0, beta2=6.0, gamma=0.5)
times = [2.0, 5.0, 10.0]
tr = run_ctmc(initial_configuration("single-1", g), p, 10.0, sample_dt=0.5, seed=0, snapshot_times=times)

for t in times:
    write_pgm(tr.snapshots[t], out / f"snapshot_t{t:g}.pgm")
(out / "trajectory.csv").write_text(tr.to_csv())

u0, u1, u2 = tr.densities[-1]
print(f"t=10: healthy {u0:.3f}, asymptomatic {u1:.3f}, symptomatic {u2:.3f}")
print(f"snapshots written to {out}/")
