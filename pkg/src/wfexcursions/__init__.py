"""Excursion theory and special-function toolkit for the Wright-Fisher diffusion with mutation."""

__version__ = "0.1.0"

from .wfmodel import DomainError, ThetaParams, ToleranceUnreachable, make_theta

__all__ = ["DomainError", "ThetaParams", "ToleranceUnreachable", "make_theta", "__version__"]
