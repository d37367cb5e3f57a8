"""Ordered couplings keep one infected set inside the other; the naive gamma
coupling with beta1 > beta2 does not."""
from asymcp import LatticeGeometry, Params, initial_configuration
from asymcp.coupling import Coupling, CouplingKind, coupled_run, coupling_break_demo, verify_table_closure

for kind in CouplingKind:
    r = verify_table_closure(kind)
    print(f"{kind.value}: {r.cases} table cases, {len(r.violations)} violations")

g = LatticeGeometry(1, 50)
c = Coupling(CouplingKind.GAMMA, Params(1.0, 3.0, 0.5), 2.0)
tr = coupled_run(c, initial_configuration("all-1", g), 20.0, seed=3)
print("gamma coupling, infected fraction low/high:")
for t, a, b in zip(tr.times[::5], tr.infected_low[::5], tr.infected_high[::5]):
    print(f"  t={t:4.1f}  {a / g.n_sites:.2f}  {b / g.n_sites:.2f}")

br = coupling_break_demo(3.0, 1.0, 0.5, 2.0, g, 10.0, seed=1)
print(f"with beta1 > beta2 the pair {br.pair!r} appears at t={br.time:.3f}, site {br.site}")
