"""symind: symplectic intersection indices, Morse indices of singular
Sturm-Liouville operators, spectral flow, Bessel-type classifications, and
Morse-index classification of asymptotic N-body motions."""

__version__ = "0.1.0"
