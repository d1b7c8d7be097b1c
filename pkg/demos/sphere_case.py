"""The round sphere as a sanity check for the shooting solver.

With m = 1 and kappa1 = 1 the Neumann weight is cos(2s) and the first
eigenfunction on [0, pi/4] is sin(2s) with eigenvalue 8. The weight vanishes
at the right endpoint, so this also exercises the singular-endpoint path.

Run:  python3 demos/sphere_case.py
"""

import math

import numpy as np

from plapbound import SpectralParams, rayleigh_oracle, solve_neumann

params = SpectralParams(m=1, p=2.0, kappa1=1.0, kappa2=0.0, halfwidth=math.pi / 4)
res = solve_neumann(params)
print(f"shooting eigenvalue   {res.eigenvalue:.12f}")
print(f"bracket               [{res.bracket[0]:.12f}, {res.bracket[1]:.12f}]")
print(f"trajectory defect     {res.residual:.2e}")

# compare the eigenfunction shape with sin(2s)
shape = res.phi_samples / res.phi_samples[-1]
print(f"max |phi - sin(2s)|   {np.max(np.abs(shape - np.sin(2 * res.grid))):.2e}")

ray = rayleigh_oracle(params, n=4096)
print(f"Rayleigh minimiser    {ray.eigenvalue:.12f}  ({ray.iterations} iterations)")

# the same problem for other p: no closed form, two independent routes
for p in (1.2, 1.5, 3.0):
    prm = SpectralParams(1, p, 1.0, 0.0, math.pi / 4)
    a, b = solve_neumann(prm).eigenvalue, rayleigh_oracle(prm, n=4096).eigenvalue
    print(f"p={p:<4} shooting {a:.8f}  rayleigh {b:.8f}  rel diff {abs(a - b) / a:.1e}")
