"""Universal eigenvalue inequalities checked on exact, mesh and Heisenberg spectra."""

__version__ = "0.1.0"

from .exact_spectra import (  # noqa: E402
    ModelSpectrum,
    gap_index,
    saturation_sides,
    sphere_eigenvalue,
    sphere_multiplicity,
    spectrum_prefix,
    verify_sphere_saturation,
)
from .inequalities import (  # noqa: E402
    AmbientContext,
    BoundResult,
    ConfigurationError,
    InequalityReport,
    SpectrumSample,
    build_report,
)
from .solver import ConvergenceError, SolveConfig, solve_smallest  # noqa: E402
from .estimators import InequalityAudit, KohnSpectrum, MeshSpectrum  # noqa: E402

__all__ = [
    "__version__",
    "ModelSpectrum",
    "gap_index",
    "saturation_sides",
    "sphere_eigenvalue",
    "sphere_multiplicity",
    "spectrum_prefix",
    "verify_sphere_saturation",
    "AmbientContext",
    "BoundResult",
    "ConfigurationError",
    "InequalityReport",
    "SpectrumSample",
    "build_report",
    "ConvergenceError",
    "SolveConfig",
    "solve_smallest",
    "InequalityAudit",
    "KohnSpectrum",
    "MeshSpectrum",
]
