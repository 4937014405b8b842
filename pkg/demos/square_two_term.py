"""Galerkin spectrum of the unit square and the two-term Riesz and heat-trace laws.

Run: python3 demos/square_two_term.py
"""

import numpy as np

from rieszlab import stats
from rieszlab.domains import make_domain
from rieszlab.galerkin import BasisSpec, SpectralParams, extrapolated_spectrum, spectrum_for

square = make_domain("rectangle", 1.0, 1.0)
params = SpectralParams(2, 1.0)
raw = spectrum_for(square, params, BasisSpec("tensor_sine", (32, 32)), 350)
ext = extrapolated_spectrum(square, params, (20, 24, 28, 32), 350)
print("first eigenvalues (raw 32x32):", np.round(raw.eigenvalues[:6], 5))

target = stats.boundary_coefficient(2, 1.0, square)
ev = ext.eigenvalues
fit = stats.extract_boundary_coefficient(ext, square, 2, 1.0, (ev[49], ev[199]))
print(f"\nboundary coefficient: predicted {target:.5f}, fitted {fit.estimate:.5f} +- {fit.stderr:.1e}")

law = stats.predict_riesz(2, 1.0, square)
print("\n lam      R(lam)      two-term law")
for lam in (10.0, 20.0, 30.0, 40.0):
    print(f"{lam:5.1f}  {stats.riesz_mean(ext, lam):10.3f}  {law(lam):10.3f}")

rep = stats.berezin_check(raw, square, 2, 1.0, np.geomspace(0.01, 1.0, 30))
print(f"\nBerezin bound holds on all 30 h values; smallest margin {rep.margins.min():.4f}")

print("\n  t      Z(t)    prediction")
for t in (0.08, 0.12, 0.2):
    z = stats.heat_trace(raw, t, tail="weyl").value
    print(f"{t:4.2f}  {z:8.3f}  {stats.predict_heat_trace(2, 1.0, square, t):8.3f}")
