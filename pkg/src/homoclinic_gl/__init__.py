"""Bifurcations of homoclinic orbits in a four-dimensional reversible
Hamiltonian system with two coupled Ginzburg-Landau type modes."""

from .model import ParamId, SystemParams, DomainError

__version__ = "0.1.0"

__all__ = ["ParamId", "SystemParams", "DomainError", "__version__"]
