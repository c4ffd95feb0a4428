"""Two-stage mmWave AoD estimation with flat-top widebeams and auxiliary beam pairs."""

from ._version import __version__
from .arrays import (
    ArrayGeometry,
    angle_to_spatial,
    gain_kernel,
    spatial_to_angle,
    steering,
    steering_matrix,
)
from .beams import (
    AbpPair,
    SteeringCodebook,
    SynthesisError,
    WidebeamCodebook,
    WidebeamPrecoder,
    beam_power_pattern,
    build_abp,
    build_steering_codebook,
    build_widebeam_codebook,
    is_adequate,
    synthesize_widebeam,
    write_codebook_csv,
    write_pattern_csv,
)
from .channel import ChannelRealization, PathParams, make_rician, make_single_path
from .estimators import (
    DegenerateSoundingError,
    EstimationReport,
    SoundingResult,
    closed_form_powers,
    estimate_gob,
    estimate_gob_abp,
    estimate_two_stage,
    invert_ratio,
    ratio_metric,
    sound,
)
from .montecarlo import (
    ErrorCurve,
    EstimatorSpec,
    ExperimentConfig,
    config_digest,
    run_sweep,
    run_trial,
    write_results_csv,
)

__all__ = [
    "__version__",
    "ArrayGeometry",
    "angle_to_spatial",
    "spatial_to_angle",
    "steering",
    "steering_matrix",
    "gain_kernel",
    "PathParams",
    "ChannelRealization",
    "make_single_path",
    "make_rician",
    "SynthesisError",
    "WidebeamPrecoder",
    "WidebeamCodebook",
    "SteeringCodebook",
    "AbpPair",
    "is_adequate",
    "beam_power_pattern",
    "synthesize_widebeam",
    "build_widebeam_codebook",
    "build_steering_codebook",
    "build_abp",
    "write_pattern_csv",
    "write_codebook_csv",
    "DegenerateSoundingError",
    "SoundingResult",
    "EstimationReport",
    "sound",
    "ratio_metric",
    "invert_ratio",
    "closed_form_powers",
    "estimate_two_stage",
    "estimate_gob",
    "estimate_gob_abp",
    "EstimatorSpec",
    "ExperimentConfig",
    "ErrorCurve",
    "run_trial",
    "run_sweep",
    "write_results_csv",
    "config_digest",
]
