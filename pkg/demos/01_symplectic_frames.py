"""Lagrangian frames in (R^2n, Omega): construction, intersections, graphs.

Coordinates are ordered (quasi-derivative, position); the Dirichlet plane
R^n x 0 and Neumann plane 0 x R^n are the two distinguished Lagrangians.
"""

import numpy as np

from symind.core import (
    SymplecticMatrix,
    SymplecticSpace,
    dirichlet_frame,
    graph_lagrangian,
    intersection_dim,
    lagrangian_from_columns,
    neumann_frame,
    random_lagrangian,
    random_symplectic,
    symplectic_residual,
)

space = SymplecticSpace.standard(2)
print("standard space of half-dimension 2; form matrix J:")
print(space.form)

LD, LN = dirichlet_frame(space), neumann_frame(space)
print("\ndim(Dirichlet cap Neumann) =", intersection_dim(LD, LN), "(transversal)")
print("dim(Dirichlet cap Dirichlet) =", intersection_dim(LD, LD))

# any isotropic span canonicalizes to an orthonormal frame
L = lagrangian_from_columns(space, np.array([[1.0, 0.0], [0.0, 1.0],
                                             [1.0, 0.0], [0.0, 0.0]]))
print("\ncanonicalized frame of an isotropic span:")
print(np.round(L.frame, 6))
print("isotropy residual:", L.isotropy_residual())

rng = np.random.default_rng(0)
M = random_symplectic(space, rng, scale=0.4)
print("\nrandom symplectic matrix: residual |M^T J M - J| =",
      f"{symplectic_residual(M):.2e}")
G = graph_lagrangian(M)
GI = graph_lagrangian(SymplecticMatrix(space, np.eye(4)))
fixed = 4 - np.linalg.matrix_rank(M.entries - np.eye(4))
print("graph(M) cap graph(I) has dimension", intersection_dim(G, GI),
      "= dim ker(M - I) =", fixed)

L1 = random_lagrangian(space, rng)
print("\nimage of a random Lagrangian under M stays Lagrangian:",
      f"residual {lagrangian_from_columns(space, M.entries @ L1.frame).isotropy_residual():.1e}")
