"""The triple index and the Hormander index, with their exact identities.

iota(alpha, beta, gamma) is the coindex of the chart form plus intersection
corrections; s(l1, l2; m1, m2) is the difference iota(l1, l2, m2) -
iota(l1, l2, m1) and can be recomputed as a Maslov-index difference along
any connecting path.
"""

import numpy as np

from symind.core import SymplecticSpace, intersection_dim, line_frame, random_lagrangian
from symind.maslov import hormander_index, hormander_via_maslov, triple_index

S1 = SymplecticSpace.standard(1)
x = line_frame(S1, [1.0, 0.0])
y = line_frame(S1, [0.0, 1.0])

print("iota(x-axis, y-axis, x-axis) =", triple_index(x, y, x), " (= n - dim cap)")
print("iota(x-axis, y-axis, diag+)  =", triple_index(x, y, line_frame(S1, [1.0, 1.0])))
print("iota(x-axis, y-axis, diag-)  =", triple_index(x, y, line_frame(S1, [1.0, -1.0])))

rng = np.random.default_rng(5)
space = SymplecticSpace.standard(2)
print("\ncircular-permutation identity on random triples (n=2):")
for _ in range(4):
    a, b, c = (random_lagrangian(space, rng) for _ in range(3))
    lhs = triple_index(a, b, c) - triple_index(b, c, a)
    rhs = intersection_dim(a, c) - intersection_dim(b, a)
    print(f"  iota(a,b,c) - iota(b,c,a) = {lhs}   dim(a^c) - dim(b^a) = {rhs}")

print("\nHormander index: triple-index route vs Maslov route:")
for _ in range(4):
    l1, l2, m1, m2 = (random_lagrangian(space, rng) for _ in range(4))
    s_t = hormander_index(l1, l2, m1, m2)
    s_m = hormander_via_maslov(l1, l2, m1, m2)
    print(f"  s = {s_t:+d} (triple)   {s_m:+d} (paths)   antisym: "
          f"{hormander_index(l1, l2, m2, m1):+d}")
