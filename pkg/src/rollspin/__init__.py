"""Rolling-joint continuum manipulator toolkit.

Synthesizes the constant-centerline rolling-joint contour, models the
two-section tendon-driven manipulator built from it, simulates endoluminal
clearance, and plans electrospinning jet targeting.
"""

from .chain import (ActuationResult, AuditReport, ConfigState, FKResult,
                    ManipulatorSpec, Pose3, TendonState, WorkspaceResult,
                    actuate, angles_for_travel, centerline_audit,
                    forward_kinematics, section_config, steps_for_angles,
                    tendon_lengths, workspace)
from .config import (DEFAULT_DOCUMENT, SpecDocument, SpecValidationError,
                     load_spec, parse_document, serialize)
from .exporters import export_profile_csv, export_svg
from .lumen import (ClearanceReport, InsertionState, LumenPath, SteerTrace,
                    auto_steer, backbone_points, clearance, demo_path,
                    make_insertion)
from .profile import (CircularBaseline, ContactPair, CriticalNResult,
                      InterferenceReport, JointDesign, JointProfile,
                      PlanarPose, PlanarTransform, check_interference,
                      circular_baseline, contact_pair, centerline_span,
                      deflect_transform, find_critical_n, generate_profile,
                      upper_segment_pose)
from .spin import (AimResult, CoveragePlan, FootprintConic, JetCone,
                   SpinParams, TargetPlane, aim_at, footprint, plan_coverage)

__version__ = "0.1.0"
