"""Half-line model: phase shift, the decaying correction G and the eigenfunction F.

Run: python3 demos/half_line_model.py
"""

import math

import numpy as np

from rieszlab import halfline as hl

omega, lam = 1.0, 2.0
theta = float(hl.phase_shift(omega, lam))
print(f"phase shift theta_{omega:g}({lam:g}) = {theta:.12f}  (limit pi/8 = {math.pi / 8:.12f})")

fit = hl.fit_g(omega, lam)
print(f"G fit: {fit.rates.size} exponentials, Laplace-transform residual {fit.fit_residual:.1e}")
print(f"G(0+) = {fit.at_zero:.6f}, sin(theta) = {math.sin(theta):.6f}")

ef = hl.make_eigenfunction(omega, lam)
t = np.linspace(0.0, 6.0, 13)
print("\n   t        G(t)        F(t)    sin(lam t + theta)")
for ti, gi, fi in zip(t, fit(t), ef(t)):
    print(f"{ti:5.2f}  {gi:10.6f}  {fi:10.6f}  {math.sin(lam * ti + theta):10.6f}")
