"""Mean-field trajectories on both sides of the survival condition."""
from asymcp import Params
from asymcp.meanfield import fixed_points, integrate

for p in (Params(4.0, 4.0, 1.0), Params(0.5, 0.5, 1.0), Params(0.5, 3.0, 2.0)):
    rep = fixed_points(p)
    tr = integrate((0.01, 0.01), p, 60.0)
    u1, u2 = tr.final
    print(f"beta1={p.beta1}, beta2={p.beta2}, gamma={p.gamma}: "
          f"D2 - D1 = {rep.D2 - rep.D1:+.2f}, interior point {rep.p12}, "
          f"state at t=60 ({u1:.4f}, {u2:.4f})")
    for t in (0, 5, 10, 20, 40):
        a, b = tr.states[int(round(t / 1e-3))]
        print(f"    t={t:>2}: u1={a:.4f} u2={b:.4f}")
