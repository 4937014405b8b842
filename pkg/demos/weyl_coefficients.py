"""The two Weyl-type coefficients of sqrt(-Delta + m^2) - m, with the second one cross-checked.

Run: python3 demos/weyl_coefficients.py   (about two minutes: the kernel route is slow)
"""

import math

from rieszlab import constants as cst

for d in (2, 3):
    print(f"d={d}: Lambda1_0 = {cst.lambda1(d, 0.0):.12f}, C_d = {cst.c_d(d):.12f}")

res = cst.lambda2(2, 0.0, validate=True)
print(f"\nLambda2_0 (d=2): frequency-first {res.value:.10f}, kernel route {res.check:.10f}, "
      f"relative gap {res.relative_gap:.1e}")
print(f"1/(4 pi^2)       = {1 / (4 * math.pi**2):.10f}")

print("\nmass dependence (d=2):")
for mu in (0.0, 0.5, 1.0, 4.0):
    print(f"  mu={mu:3g}: Lambda1 = {cst.lambda1(2, mu):.8f}, Lambda2 = {cst.lambda2(2, mu).value:.8f}")
