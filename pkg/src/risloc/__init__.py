"""Desk-scale workbench for RIS-aided single-BS indoor positioning.

Synthesizes frequency-domain mmWave sweep acquisitions with 1-bit beam
codebooks, extracts multipath parameters with a SAGE estimator, derives
radiolocation features, and solves the positioning scenario matrix by
nonlinear least squares with full error statistics.
"""

__version__ = "0.1.0"

from .channel import (
    ArrayGeometry,
    BeamCodebook,
    BeamState,
    ChannelTensor,
    FrequencyGrid,
    PathComponent,
    RadioConfig,
    array_factor,
    generate_clutter,
    quantize_1bit,
    run_sweep,
    steering_codeword,
    synthesize_channel,
)
from .config import CampaignConfig, build_config, load_config
from .evaluation import ErrorReport, mark_significance, median, rmse, wilcoxon_rank_sum
from .features import (
    FeatureSet,
    SweepSeries,
    best_candidate,
    coarse_aod,
    fine_aod,
    isolate_mpc,
    path_distance_estimate,
)
from .geometry import (
    AnchorPose,
    AxisRect,
    PathSpec,
    Point2D,
    ScenePlan,
    SweepPlan,
    aoa_at_ue,
    bearing_from_anchor,
    ota_distance,
    wrap180,
)
from .positioning import (
    SCENARIOS,
    LsProblem,
    RadioMeasurement,
    ScenarioResult,
    build_measurements,
    residuals,
    run_campaign,
    solve_ls,
)
from .sage import MpcEstimate, SageConfig, overall_gain_db, sage_extract, subband_select
