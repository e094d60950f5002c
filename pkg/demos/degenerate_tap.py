"""Degenerate (single-beam) source: tap reflectivity trade-off.

With a degenerate source a beam splitter of reflectivity R taps the signal
off the same squeezed beam the trigger monitors.  A stronger tap improves
the heralded state but starves the trigger.  This script sweeps R and
prints the one-photon fidelity of the click-conditioned state.

Run: python3 demos/degenerate_tap.py
"""

import numpy as np

from opoherald import (ClickMode, DegenerateParams, OpoParams,
                       build_cov_degenerate, click_condition_degenerate,
                       exp_mode, fidelity_degenerate)

base = OpoParams(epsilon=0.1)
click = ClickMode(0.0, 0.02)
f = exp_mode(base)

print(f"eps/gamma = {base.epsilon}")
print(f"{'R':>5}  {'F1':>8}  {'W(0,0)':>9}")
for r in np.linspace(0.1, 0.9, 9):
    dp = DegenerateParams(base, r)
    cov = build_cov_degenerate(dp, f, click)
    w = click_condition_degenerate(cov)
    print(f"{r:5.2f}  {fidelity_degenerate(cov):8.5f}  {w(0.0, 0.0):+9.5f}")

print()
print("The click-conditioned Wigner function is axial (not radial): the")
print("single beam is squeezed in p and anti-squeezed in x.")
