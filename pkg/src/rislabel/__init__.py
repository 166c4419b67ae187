"""Label multipath through phase-toggling surfaces, extract it, and localize.

Pipeline: trace a 2D floorplan with the image-source method, synthesize
stacked OFDM snapshots, cancel the static channel by differencing against
the first slot, pull out per-path (bearing, delay, gain) with multisnapshot
Newtonized orthogonal matching pursuit, associate paths to their labeling
surface, and triangulate the receiver from the recovered bearings.
"""

from .association import LabeledPath, associate, estimate_beta, ratio_signature, select_los
from .channel import (CsiSnapshot, PropagationPath, RadioConfig, RxArray, Scene,
                      atom, build_propagation_paths, delay_ramp, desk_radio,
                      dictionary, measured_snr_db, paper_radio, path_alpha,
                      path_beta, path_gain, ris_array_factor, ris_coefficient,
                      steering_rx, synthesize_snapshot, synthesize_snapshots,
                      triangular_array)
from .config import (DESK, PAPER, POINT_A, POINT_B, EstimatorSettings,
                     ExperimentConfig, GridSpec, config_from_dict, config_to_dict,
                     default_config, default_scene, load_config, with_overrides)
from .errors import (ConfigurationError, DegenerateGeometryError, ExtractionError,
                     NumericalError, RejectedInputError, UndecidableError)
from .flipping import (MULTI, SINGLE, DeltaSnapshot, PhaseSchedule, delta,
                       delta_gamma, make_schedule, schedule_from_table)
from .harness import (TrialRecord, absolute_angle_error, build_grid, cdf,
                      extract_and_label, mae, mae_localization, run_position,
                      run_trial, sweep, trial_seed_key, write_csv)
from .localize import (BearingObservation, PositionEstimate, extract_tx_aoa,
                       extract_tx_path, triangulate)
from .mnomp import (CoarseDetection, ExtractedPath, Grid, StoppingRule,
                    coarse_detect, extract, fit_cost, fit_cost_concentrated,
                    fit_cost_fixed_gains, refine_newton, solve_gains)
from .scene import (FloorPlan, PathGeometry, RisAnchor, rectangle_plan,
                    trace_paths, unfolded_length, visibility, wrap_angle)

__version__ = "0.1.0"
