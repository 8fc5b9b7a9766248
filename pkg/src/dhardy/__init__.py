"""Norms, additive energies and fundamental functions of Dirichlet polynomials."""

__version__ = "0.1.0"

from .freq import Frequency, make_frequency
from .dpoly import DirichletPolynomial, indicator
from .energy import additive_energy, sum_spectrum
from .norms import NormEstimate, norm

__all__ = ["__version__", "Frequency", "make_frequency", "DirichletPolynomial", "indicator",
           "additive_energy", "sum_spectrum", "NormEstimate", "norm"]
