"""Igusa class polynomials of primitive quartic CM fields via theta constants."""

from .classpoly import ClassPolynomialSet, RunConfig, igusa_class_polynomials
from .cmfield import CMFieldSpec

__all__ = ["CMFieldSpec", "ClassPolynomialSet", "RunConfig", "igusa_class_polynomials"]
__version__ = "0.1.0"
