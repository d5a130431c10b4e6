"""slopekit: p-adic slope decompositions for modular symbols.

Layers, from the bottom up:

- padics / linalg / series: capped-precision Z_p and Q_p scalars, generic
  valuation-pivoted linear algebra, truncated series with Newton polygons
  and slope factorization.
- weights / distributions: the weight disk with its universal character,
  and finite-moment distribution modules with the explicit monoid action.
- symbols / classical: a finite Manin-style presentation of the symbol
  space carrying Hecke operators, plus an independent exact-rational
  classical oracle.
- slopes / eigen: Fredholm series of the controlling operator, slope data
  and decompositions, and local eigencurve pieces with Hecke eigenpackets.
- homology: Smith normal form, Ext/Tor, universal-coefficients checks and
  the projective-dimension/grade predicates over one-variable weight rings.
- cli: batch front end and the acceptance-suite runner.
"""

from .padics import AtLeast, PadicRing, PadicScalar

__all__ = ["AtLeast", "PadicRing", "PadicScalar"]
__version__ = "0.1.0"
