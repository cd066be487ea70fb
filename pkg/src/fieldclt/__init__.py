"""Simulation and statistical verification of Gaussian limits for window
integrals of stationary random fields.

Subpackages cover window geometry (``windows``), field generators with
closed-form moments (``fields``), dependence-coefficient algebra
(``dependence``), the constructive Jordan decomposition (``bvdecomp``),
variance quadrature and block statistics (``estimation``), pointwise
transforms (``transforms``), and the Monte Carlo harness (``harness``).
"""

__version__ = "0.1.0"

from .windows import Window, LatticeCubeSet, vh_ratio, inner_lattice, vh_diagnostics
from .fields import (
    BoxKernel,
    TriangularKernel,
    GaussianCovariance,
    ExponentialCovariance,
    ShotNoiseField,
    LatticeMAField,
    GaussianGridField,
    mean,
    covariance,
    sample,
    exact_window_integral,
)
from .dependence import (
    ThetaSequence,
    psi,
    lip_transform_theta,
    shift_theta,
    qa_to_bl_theta,
    brute_force_tail_sum,
)
from .bvdecomp import (
    MonotonePiece,
    PiecewiseMonotoneFn,
    jordan_decompose,
    total_variation,
    eval_g,
)
from .estimation import (
    normalized_statistic,
    riemann_integral,
    block_statistics,
    sigma_squared,
    sigma_matrix,
    covariance_sum_check,
)
from .transforms import IdentityTransform, ScaleTransform, MinCapTransform, PiecewiseTransform
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    run_univariate_clt,
    run_multivariate_clt,
    run_transformed_clt,
    ks_test_normal,
)

__all__ = [
    "__version__",
    "Window",
    "LatticeCubeSet",
    "vh_ratio",
    "inner_lattice",
    "vh_diagnostics",
    "BoxKernel",
    "TriangularKernel",
    "GaussianCovariance",
    "ExponentialCovariance",
    "ShotNoiseField",
    "LatticeMAField",
    "GaussianGridField",
    "mean",
    "covariance",
    "sample",
    "exact_window_integral",
    "ThetaSequence",
    "psi",
    "lip_transform_theta",
    "shift_theta",
    "qa_to_bl_theta",
    "brute_force_tail_sum",
    "MonotonePiece",
    "PiecewiseMonotoneFn",
    "jordan_decompose",
    "total_variation",
    "eval_g",
    "normalized_statistic",
    "riemann_integral",
    "block_statistics",
    "sigma_squared",
    "sigma_matrix",
    "covariance_sum_check",
    "IdentityTransform",
    "ScaleTransform",
    "MinCapTransform",
    "PiecewiseTransform",
    "ExperimentConfig",
    "ExperimentReport",
    "run_univariate_clt",
    "run_multivariate_clt",
    "run_transformed_clt",
    "ks_test_normal",
]
