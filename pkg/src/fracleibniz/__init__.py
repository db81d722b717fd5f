"""Spectral toolkit for fractional Leibniz rules and Kato-Ponce type commutators.

Submodules
----------
field
    Periodic grids, sampled fields and the spectral transform pair.
dyadic
    Littlewood-Paley bumps, band projections and the paraproduct split.
symbols
    Fourier multipliers with an exact calculus for homogeneous symbols.
norms
    Lebesgue, BMO, Besov and Hardy norms and the maximal function.
remainders
    Commutator and Leibniz remainders, each with a bilinear-symbol oracle.
zoo
    Counterexample families.
xlab
    Experiment probes, slope fits, emitters and the command-line interface.
"""

from .field import Field, Grid, Spectrum, forward, inverse, make_grid, pointwise, product, sample

__version__ = "0.1.0"

__all__ = [
    "Field",
    "Grid",
    "Spectrum",
    "forward",
    "inverse",
    "make_grid",
    "pointwise",
    "product",
    "sample",
]
