"""Wigner negativity of the click-conditioned signal mode.

Far below threshold the heralded state approaches a single photon; its
Wigner function dips negative at the origin.  This script evaluates the
conditioned state at eps/gamma = 0.02 with the decay-matched exponential
signal mode and prints a radial profile plus the one-photon fidelity.

Run: python3 demos/wigner_negativity.py
"""

import numpy as np

from opoherald import (ClickMode, OpoParams, build_click_signal_cov,
                       click_condition, exp_mode, fidelity_one_photon,
                       wigner_eval, wigner_one_photon)

params = OpoParams(epsilon=0.02)
click = ClickMode(0.0, 0.02)
f = exp_mode(params)
cov = build_click_signal_cov(params, f, click)
w = click_condition(cov)

print(f"eps/gamma = {params.epsilon}, dt_c*gamma = {params.dt_c}")
print(f"one-photon fidelity  F1     = {fidelity_one_photon(cov):.6f}")
print(f"Wigner at the origin W(0,0) = {wigner_eval(w, 0.0, 0.0):+.6f}")
print(f"ideal one photon     W(0,0) = {wigner_one_photon(0.0, 0.0):+.6f}")
print()
print("radial profile (x, p = 0):")
print(f"{'x':>5}  {'W(x,0)':>10}  {'one photon':>10}")
for x in np.linspace(0.0, 3.0, 13):
    print(f"{x:5.2f}  {wigner_eval(w, x):10.5f}  {wigner_one_photon(x):10.5f}")
