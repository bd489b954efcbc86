"""airsig: synthesis and verification of 3D on-air signatures.

Three synthesis routes around a shared Sigma-Lognormal core:

* full synthesis (FS): morphology -> timed action plan -> rendered signature,
* kinematic synthesis (KS): human-like velocity for a bare 3D trajectory,
* duplicated synthesis (DS): controlled genuine/forgery-like variants.

Plus DTW and Manhattan-histogram verifiers with EER/DET/AUC and CMC
evaluation, and seeded database generation behind the `airsig` CLI.
"""

from .model import (LognormalStroke, SigmaLogSignature, Trajectory3D,
                    lognormal_area, reconstruct_trajectory,
                    reconstruct_velocity, snr_t, snr_v,
                    stroke_velocity_vector, unit_lognormal)
from .plan import (ActionPlan, MorphologyConfig, PlanarArc, SurfaceConfig,
                   airwriting_config, assign_timestamps, fit_planar_arc,
                   generate_gesture_plan, generate_morphology_2d,
                   generate_signature_plan, make_action_plan,
                   project_to_surface)
from .synthesis import (plan_to_signature, render_full_signature, solve_mu,
                        solve_sigma)
from .kinematics import (DensePath3D, SalientPointSet, VelocityProfile,
                         densify_path, detect_salient_points,
                         estimate_parameters, moments_to_lognormal,
                         plane_curvature, resample_with_velocity,
                         synthesize_kinematics, synthesize_velocity)
from .duplication import (DuplicationConfig, affine_transform,
                          duplicate_signature, edit_target_points,
                          perturb_parameters, sinusoidal_distortion)
from .verification import (ExperimentProtocol, FeatureSequence,
                           HistogramFeature, VerificationReport, classify_cmc,
                           compute_auc, compute_eer, det_curve, dtw_distance,
                           evaluate, extract_features, extract_histogram,
                           man_distance, score_probe)
from .database import (DatabaseConfig, GestureDbConfig,
                       generate_full_database, generate_gesture_database,
                       load_database, load_labeled_database,
                       regenerate_from_manifest)

__version__ = "0.1.0"
