"""Domain-specific face synthesis with block-sparse still-to-video recognition.

The pipeline has four stages: measure capture conditions of operational-domain
video ROIs, select weighted condition exemplars by two-pass affinity
propagation, synthesize each enrolled still under those conditions, and
classify probes over a cross-domain block dictionary with rejection.
"""

from .capture import (
    ConditionVector,
    Domain,
    MetricConfig,
    PoseAngles,
    RoiRecord,
    condition_vector,
    gcq,
    glq,
)
from .classifier import (
    CrossDomainDictionary,
    Decision,
    Outcome,
    SolverConfig,
    SolverMode,
    SparseSolution,
    build_cross_domain_dictionary,
    classify,
    group_prox,
    load_dictionary,
    recognize,
    save_dictionary,
    sci,
    solve_weighted_block_l1,
)
from .clustering import (
    ApState,
    ClusterConfig,
    ClusterResult,
    Exemplar,
    ExemplarSet,
    SimilarityMatrix,
    ap_cluster,
    exemplar_weights,
    lighting_similarities,
    pose_similarities,
    two_step_select,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    DimensionMismatchError,
    DsfsError,
)
from .evaluation import (
    BenchmarkConfig,
    BenchmarkReport,
    CurveSummary,
    ScoredTrial,
    dsq,
    roc_metrics,
    run_benchmark,
)
from .image import GrayImage, load_image, resample, save_image
from .layers import LayerConfig, LayerDecomposition, decompose
from .morphing import default_landmarks, delaunay, piecewise_affine_warp, transfer_illumination
from .render import render_pose
from .shape import (
    CameraPose,
    Mesh3D,
    ShapeModel,
    ellipsoid_head,
    frame_camera,
    load_shape_model,
    project_vertices,
    rotation_matrix,
    save_shape_model,
    synthesize_shape,
)
from .synthesis import (
    Provenance,
    SynthesisConfig,
    SyntheticSet,
    generate_synthetic_set,
)

__version__ = "0.1.0"

__all__ = [
    "ApState",
    "BenchmarkConfig",
    "BenchmarkReport",
    "CameraPose",
    "ClusterConfig",
    "ClusterResult",
    "ConditionVector",
    "ConfigError",
    "ConvergenceError",
    "CrossDomainDictionary",
    "CurveSummary",
    "DataError",
    "Decision",
    "DimensionMismatchError",
    "Domain",
    "DsfsError",
    "Exemplar",
    "ExemplarSet",
    "GrayImage",
    "LayerConfig",
    "LayerDecomposition",
    "Mesh3D",
    "MetricConfig",
    "Outcome",
    "PoseAngles",
    "Provenance",
    "RoiRecord",
    "ScoredTrial",
    "ShapeModel",
    "SimilarityMatrix",
    "SolverConfig",
    "SolverMode",
    "SparseSolution",
    "SynthesisConfig",
    "SyntheticSet",
    "ap_cluster",
    "build_cross_domain_dictionary",
    "classify",
    "condition_vector",
    "decompose",
    "default_landmarks",
    "delaunay",
    "dsq",
    "ellipsoid_head",
    "exemplar_weights",
    "frame_camera",
    "gcq",
    "generate_synthetic_set",
    "glq",
    "group_prox",
    "lighting_similarities",
    "load_dictionary",
    "load_image",
    "load_shape_model",
    "piecewise_affine_warp",
    "pose_similarities",
    "project_vertices",
    "recognize",
    "render_pose",
    "resample",
    "roc_metrics",
    "rotation_matrix",
    "run_benchmark",
    "save_dictionary",
    "save_image",
    "save_shape_model",
    "sci",
    "solve_weighted_block_l1",
    "synthesize_shape",
    "transfer_illumination",
    "two_step_select",
]
