"""Brute-force check of the flat comparison bound on grid tori.

For the flat square torus of side L the diameter is sqrt(2) L / 2 and the
bound is (p-1) (pi_p / D)^p. The discrete p-Laplacian eigenvalue should sit
above it for every 1 < p <= 2.

Run:  python3 demos/torus_check.py
"""

import math

from plapbound.oracle import TorusGrid, discrete_laplacian_eigenvalue, verify_neumann_bound

print(f"{'p':>4} {'L':>4} {'bound':>12} {'torus':>12} {'margin':>8}  status")
for p in (2.0, 1.7, 1.5, 1.2):
    for L in (1.0, 2.0):
        rep = verify_neumann_bound(TorusGrid(48, L), p)
        print(f"{p:4.1f} {L:4.1f} {rep.bound:12.6f} {rep.oracle:12.6f} {rep.margin:8.3f}  {rep.status.value}")

g = TorusGrid(48, 1.0)
print()
print(f"p=2 discrete spectrum gives {discrete_laplacian_eigenvalue(g):.6f}; continuum 4 pi^2 = {4 * math.pi**2:.6f}")
