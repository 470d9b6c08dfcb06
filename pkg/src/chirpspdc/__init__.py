"""Spatial entanglement of photon pairs from chirped QPM down-conversion.

Library layout:
    special  -- complex error function + Gauss-Legendre helpers
    model    -- physical configuration and the joint pair amplitude
    schmidt  -- OAM-sector kernels, Schmidt spectra, entanglement metrics
    config   -- key = value configuration parsing
    runner   -- run/sweep orchestration and file emission
    cli      -- command-line entry point
"""

from .model import (
    CrystalPumpConfig,
    GratingSpec,
    TransversePair,
    amplitude,
    chirp_from_periods,
)
from .schmidt import (
    EntanglementReport,
    RadialGrid,
    SchmidtSpectrum,
    converged_solve,
    entropy,
    schmidt_number,
    solve,
    spiral_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "CrystalPumpConfig",
    "GratingSpec",
    "TransversePair",
    "amplitude",
    "chirp_from_periods",
    "EntanglementReport",
    "RadialGrid",
    "SchmidtSpectrum",
    "converged_solve",
    "entropy",
    "schmidt_number",
    "solve",
    "spiral_spectrum",
    "__version__",
]
