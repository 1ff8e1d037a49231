"""Phase-space Monte Carlo simulation of two-copy purification of phase-diffused squeezed light."""

from .calibration import calibrate_vp
from .channels import (
    LossSpec,
    PhaseNoiseSpec,
    apply_gaussian_phase_diffusion,
    apply_loss,
    apply_phase_noise,
    apply_phase_series,
    bandlimited_phase_series,
)
from .config import ExperimentConfig, config_from_dict, load_config
from .estimators import BeamSplitter, HomodyneTrigger, PhaseDiffusion
from .exceptions import (
    CVPurifyError,
    ConfigError,
    EmptySelectionError,
    GridCoverageError,
    HeisenbergViolationError,
    InfeasibleCalibrationError,
    SparseBinError,
    SurvivorStarvationError,
)
from .harness import run, sweep
from .phase_space import (
    Ensemble,
    QuadPoint,
    SqueezedStateSpec,
    db_of,
    diffused_variances,
    rotate_point,
    sample_squeezed,
    spec_from_db,
)
from .protocol import (
    PurifiedResult,
    SelectionRule,
    TwoModeEnsemble,
    beam_split,
    condition,
    iterate_purify,
    prepare_arm,
    purify_round,
    threshold_from_rate,
)
from .results import RunResult
from .stats import (
    CovMatrix4,
    VarianceEstimate,
    bootstrap_se,
    covariance4,
    excess_kurtosis,
    gaussian_chi2_reduced,
    log_negativity,
    variance_with_se,
)
from .wigner import Grid2D, GridGeometry, grid_checks, wigner_diffused_grid, wigner_sms_at

__version__ = "0.1.0"
