"""Joint-sparse recovery from multichannel measurements.

Mixed-norm minimization, thresholding and simultaneous orthogonal matching
pursuit, the deterministic conditions and probabilistic bounds that govern
them, and Monte Carlo tools for measuring phase transitions.
"""

__version__ = "0.1.0"

from .core import (
    CoefficientModel,
    CoefficientVariant,
    DimensionError,
    JointSignal,
    Support,
    mixed_norm_21,
    replicate_channels,
    row_sign,
    sample_coefficients,
    support_of,
)
from .ensembles import (
    EnsembleTag,
    MeasurementMatrix,
    alltop_gabor,
    bernoulli_ensemble,
    dirac_fourier,
    gaussian_ensemble,
    make_ensemble,
    spherical_ensemble,
)
from .conditions import (
    ConditionReport,
    analyze,
    coherence,
    coherence_lower_bound,
    delta_of_support,
    delta_star,
    dual_certificate_check,
    local_two_coherence,
    pinv_column_norms,
    rip_constant_exact,
    verify_general_certificate,
)
from .solvers import (
    L21Solver,
    RecoveryResult,
    SolverOptions,
    l0_oracle,
    p_somp,
    p_thresholding,
    solve_l21,
)
from .montecarlo import ExperimentConfig, PhaseCurve, TrialRecord, phase_curve, run_trial
