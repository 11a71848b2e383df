"""Ghost eigenvalues: rotating a limit-circle boundary condition off the
Friedrichs line sends eigenvalues to -infinity, in number equal to a Maslov
index against the Friedrichs Lagrangian.

The truncated problem -u'' on (delta, 1] carries the Friedrichs data of the
principal solution u = t at the truncation point; rotating the boundary line
to the softening side makes exactly one eigenvalue dive.
"""

from symind.catalog import make_problem
from symind.core import SymplecticSpace, line_frame, rotation_matrix
from symind.spectral import rellich_ghosts

delta = 1e-3
problem = make_problem("bessel", q=0.0, interval=(delta, 1.0))
left_space = SymplecticSpace.minus_plus(1, 0)
friedrichs = line_frame(left_space, [1.0, delta])


def bc_path(u):
    return rotation_matrix(left_space, -u) @ friedrichs.frame


out = rellich_ghosts(problem, bc_path, friedrichs, M_values=(1e2, 1e3), N=1024,
                     u_values=(0.4, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005))

print("maslov prediction:", out["maslov_prediction"])
print("u decreasing:", out["u_values"])
for M, counts in out["counts_below_minus_M"].items():
    print(f"count below -{M:g}:", counts)
print("bottom eigenvalue trace (diving):")
for u, lam in zip(out["u_values"], out["lambda_min_trace"]):
    print(f"  u = {u:7.4f}: lambda_min = {lam:14.2f}")
