"""Virtual palpation: haptic organ simulation without the haptic hardware.

The package renders touch numerically: a triangle mesh painted with
per-vertex material channels, a 1 kHz spring-damper servo that turns tool
poses into contact forces, a Gaussian surface bump for the visuals, 100 Hz
session traces with bit-exact replay, cone force maps, and a skill scorer
that tells a practiced hand from a beginner's.
"""

from .assessment import (DEFAULT_THRESHOLDS, EXPERT, INDETERMINATE, NOVICE,
                         Report, Tap, Thresholds, analyze, segment_taps)
from .assets import asset_root, find_mesh, load_asset_mesh
from .config import AppConfig, ServiceConfig, default_config, load_config
from .deformation import (DisplacementQuery, KernelParams, cutoff_radius,
                          displacement_field, gauss_kernel)
from .errors import (AssetError, DomainError, GeometryError,
                     InvalidBarycentric, MaterialError, PalpaError,
                     ParseError, RangeError, SchemaError, SessionAborted,
                     UnknownPreset, VersionError)
from .forcemap import (Cone, ConeScale, cone_geometry, cones_from_trace,
                       export_obj, load_cones, save_cones)
from .gestures import (load_script, parse_script, press_cycle_waypoints,
                       simulate)
from .haptics import (SERVO_DT, ContactState, ServoOutput, ToolState,
                      compute_force, resolve_contact, servo_step)
from .materials import (MaterialPoint, MaterialRange, bake_nodular,
                        bake_radial_spot, bake_uniform, material_at,
                        value_noise3)
from .mesh import (TriMesh, Violation, compute_vertex_normals, load_mesh,
                   save_obj, triangle_areas, validate_mesh)
from .presets import Preset, instantiate, list_presets, load_preset, load_scene
from .recorder import (ForceSample, Trace, TraceHeader, load_trace, record,
                       replay, replay_full, save_trace, validate_trace)
from .server import PalpationService, run_service
from .session import Session, TickResult
from .timeline import run_ticks, tick_states, waypoint_poses

__version__ = "0.1.0"
