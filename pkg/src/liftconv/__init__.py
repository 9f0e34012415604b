"""Sparse rank-one recovery from randomly subsampled convolutions.

The measurement model convolves two dictionary-sparse signals,
subsamples the result at random time points, and rescales. This
package provides the forward and adjoint operators in dense and
implicit form, restricted signal models with spectral-flatness
projections, Monte Carlo estimators of restricted isometry, angle, and
orthogonality constants, closed-form entropy and sample-complexity
calculators, and an alternating least-squares recovery solver with a
phase-transition sweep harness.
"""

from .bounds import (
    BoundQuery,
    SampleComplexity,
    angle_preservation_bound,
    dudley_fourier_bound,
    dudley_sparse_bound,
    dyadic_chain_check,
    gamma2_bound,
    greedy_cover,
    maurey_f,
    maurey_h,
    sample_complexity,
    solve_a,
)
from .concentration import (
    EstimateReport,
    estimate_rap,
    estimate_rip,
    estimate_rip_matrix,
    estimate_rop,
    exact_rip_small,
    isotropy_check,
    polarization_check,
    rop_form_samples,
)
from .fourier import dft_matrix, fftu, ifftu
from .measurement import (
    Ensemble,
    LiftedPoint,
    adjoint_actions,
    adjoint_apply,
    forward,
    forward_dense,
    lifted_dist,
    lifted_inner,
    measurement_matrix,
    partial_forward,
    r_matrix,
    sample_omega,
    xi_vector,
)
from .models import (
    FlatProjectionError,
    InfeasibleModelError,
    ModelSpec,
    OrthogonalizationError,
    hard_threshold,
    in_gamma,
    in_tilde_gamma,
    orthogonalize_pair,
    project_flat,
    sample_model,
    spectral_flatness,
)
from .solver import (
    SolveOptions,
    SolveResult,
    SolverBreakdownError,
    plant_instance,
    recover,
    spectral_init,
    success_metric,
)
from .util import derive_seed, rng_for

__version__ = "0.1.0"

__all__ = [
    "BoundQuery",
    "SampleComplexity",
    "angle_preservation_bound",
    "dudley_fourier_bound",
    "dudley_sparse_bound",
    "dyadic_chain_check",
    "gamma2_bound",
    "greedy_cover",
    "maurey_f",
    "maurey_h",
    "sample_complexity",
    "solve_a",
    "EstimateReport",
    "estimate_rap",
    "estimate_rip",
    "estimate_rip_matrix",
    "estimate_rop",
    "exact_rip_small",
    "isotropy_check",
    "polarization_check",
    "rop_form_samples",
    "dft_matrix",
    "fftu",
    "ifftu",
    "Ensemble",
    "LiftedPoint",
    "adjoint_actions",
    "adjoint_apply",
    "forward",
    "forward_dense",
    "lifted_dist",
    "lifted_inner",
    "measurement_matrix",
    "partial_forward",
    "r_matrix",
    "sample_omega",
    "xi_vector",
    "FlatProjectionError",
    "InfeasibleModelError",
    "ModelSpec",
    "OrthogonalizationError",
    "hard_threshold",
    "in_gamma",
    "in_tilde_gamma",
    "orthogonalize_pair",
    "project_flat",
    "sample_model",
    "spectral_flatness",
    "SolveOptions",
    "SolveResult",
    "SolverBreakdownError",
    "plant_instance",
    "recover",
    "spectral_init",
    "success_metric",
    "derive_seed",
    "rng_for",
    "__version__",
]
