"""Central configurations, the normalized matrix Bbar(a), and the Morse
classification of asymptotic motions.

Bbar(a) = (2/9) M^{-1} D^2 U(a) / U(a) always carries the radial eigenvalue
4/9 and d translational zeros; its spectrum against -1/4 decides whether a
total-collision or parabolic motion has finite Morse index, and hyperbolic
motions are finite regardless.
"""

import numpy as np

from symind.nbody import (
    asymptotic_morse,
    asymptotic_morse_from_spectrum,
    bbar_spectrum,
    euler3,
    lagrange3,
    two_body,
)

for name, cc in (("two-body", two_body()),
                 ("lagrange equilateral", lagrange3()),
                 ("euler collinear", euler3())):
    w = bbar_spectrum(cc)
    print(f"{name}: residual {cc.residual:.2e}")
    print("  Bbar spectrum:", np.round(w, 6))
    rep = asymptotic_morse(cc, "total-collision")
    print("  total-collision verdict:", rep.verdict,
          " per-direction:", rep.diagnostics["per_direction"])

print("\nsynthetic spectrum with an eigenvalue below -1/4:")
rep = asymptotic_morse_from_spectrum([0.0, -0.5, 4.0 / 9.0], "total-collision")
print("  verdict:", rep.verdict)

print("\nthe same spectrum along a hyperbolic motion stays finite:")
rep = asymptotic_morse_from_spectrum([0.0, -0.5, 4.0 / 9.0], "hyperbolic")
print("  verdict:", rep.verdict)
