"""Production rate of accepted heralding events versus pump gain.

A longer dark window means better states but fewer accepted events: at
higher gain more clicks happen, but more of them are vetoed by the window.
The accepted-event rate therefore peaks at an intermediate gain.  This
script sweeps eps/gamma at T*gamma = 10 for two trigger efficiencies and
prints the optimum.

Run: python3 demos/rate_optimum.py
"""

import numpy as np

from opoherald import (ClickMode, OpoParams, WindowSpec,
                       production_rate_windowed)

click = ClickMode(0.0, 0.02)
window = WindowSpec(10.0, 0.02)   # 500 dark boxes of width dt_c
eps_grid = np.arange(0.06, 0.46, 0.02)

print(f"T*gamma = {window.duration}, m = {window.n_boxes} boxes")
print(f"{'eps/gamma':>10}  {'r/gamma (eta_t=1)':>18}  {'r/gamma (eta_t=0.4)':>20}")
rates = {}
for eta_t in (1.0, 0.4):
    rates[eta_t] = [production_rate_windowed(
        OpoParams(epsilon=e, eta_t=eta_t), window, click) for e in eps_grid]
for e, r1, r2 in zip(eps_grid, rates[1.0], rates[0.4]):
    print(f"{e:10.2f}  {r1:18.5f}  {r2:20.5f}")

for eta_t in (1.0, 0.4):
    k = int(np.argmax(rates[eta_t]))
    print(f"\neta_t = {eta_t}: peak r/gamma = {rates[eta_t][k]:.4f} "
          f"at eps/gamma = {eps_grid[k]:.2f} "
          f"(one event per {1.0 / rates[eta_t][k]:.0f} cavity lifetimes)")
