"""Joint 6D pose and focal-length estimation core: camera model, update rule,
losses, benchmark metrics and an oracle-driven refinement harness."""

from .geometry import (
    CameraIntrinsics,
    DegenerateRotationError,
    Pose,
    ProjectionError,
    intrinsics_matrix,
    project_point,
    project_points,
    rotation_from_6d,
    rotation_geodesic,
)
from .loss import (
    LossBreakdown,
    disentangled_pose_loss,
    disentangled_reprojection_loss,
    huber_log_focal,
    pose_distance,
    reprojection_loss,
    total_loss,
)
from .mesh import TriMesh, builtin_mesh, load_mesh, sample_mesh_points
from .metrics import (
    EvalRecord,
    MetricReport,
    aggregate,
    bbox_iou,
    focal_error,
    point_matching_error,
    reprojection_error,
    rotation_error,
    translation_error,
)
from .refine import PredictorSpec, predict, run_experiment, run_refinement
from .scene import NoiseConfig, SceneConfig, SceneSample, compute_crop, perturb_state, sample_scene
from .update import (
    IDENTITY_UPDATE,
    Detection2D,
    ParamState,
    UpdateVector,
    apply_update,
    ideal_update,
    init_state,
)

__version__ = "0.1.0"
