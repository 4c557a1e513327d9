"""Flux, end classification and balancing for CMC-1 surfaces in hyperbolic space."""

__version__ = "0.1.0"

from .cmc import SurfaceData, validate
from .ends import EndAnalysis, EndType, classify_end
from .flux import FluxMatrix, balance, contour_flux, eta_residues, flux_at_end
from .series import INF, PowerForm, RationalFunction

__all__ = [
    "INF", "EndAnalysis", "EndType", "FluxMatrix", "PowerForm", "RationalFunction", "SurfaceData",
    "balance", "classify_end", "contour_flux", "eta_residues", "flux_at_end", "validate",
]
