"""Dispersion curves of a 2D charged particle in a homogeneous magnetic field
perturbed by a straight (translationally invariant) potential obstacle.

The unperturbed spectrum consists of the flat Landau levels B(2n+1); a
nontrivial obstacle profile bends them into dispersive bands.  This package
solves the one-dimensional fiber problems behind that picture, sweeps the
conserved momentum into band structures, and turns the analytic facts about
those bands (ordering, gap bounds, derivative formulas, asymptotics) into
executable checks.
"""

from .eigensolver import NonConvergence, TridiagonalMatrix
from .fiber import (
    FieldConfig,
    FiberEigenpairs,
    Grid,
    UnboundedBelow,
    current_density,
    hermite_function,
    solve_fiber,
)
from .dispersion import (
    BandStructure,
    CheckResult,
    SweepConfig,
    asymptote_check,
    band_width,
    band_widths,
    delta_limit_study,
    fh_derivative_lambda,
    fh_derivative_p,
    fd_derivative_p,
    first_order_estimate,
    gaps,
    lambda_sweep,
    run_check,
    sweep,
)
from .potentials import (
    FlatWell,
    Linear,
    Lorentzian,
    Parabola,
    Scaled,
    SignClass,
    SineObstacle,
    Sum,
    Tabulated,
    scale,
)

__version__ = "0.1.0"

__all__ = [
    "BandStructure",
    "CheckResult",
    "FieldConfig",
    "FiberEigenpairs",
    "FlatWell",
    "Grid",
    "Linear",
    "Lorentzian",
    "NonConvergence",
    "Parabola",
    "Scaled",
    "SignClass",
    "SineObstacle",
    "Sum",
    "SweepConfig",
    "Tabulated",
    "TridiagonalMatrix",
    "UnboundedBelow",
    "asymptote_check",
    "band_width",
    "band_widths",
    "current_density",
    "delta_limit_study",
    "fh_derivative_lambda",
    "fh_derivative_p",
    "fd_derivative_p",
    "first_order_estimate",
    "gaps",
    "hermite_function",
    "lambda_sweep",
    "run_check",
    "scale",
    "solve_fiber",
    "sweep",
    "__version__",
]
