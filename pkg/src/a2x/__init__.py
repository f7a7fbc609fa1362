"""Deterministic toolkit for multi-target (all-to-X) backdoor poisoning:
optimal class-mapping selection and bit-exact poisoned dataset construction."""

from .assignment import (
    AssignConfig,
    Assignment,
    GroupDistanceMatrix,
    brute_force_assign,
    group_distances,
    hungarian_max,
)
from .dataio import (
    EmbeddingSet,
    Mapping,
    TensorDataset,
    read_dataset,
    read_embeddings,
    read_mapping,
    write_dataset,
    write_embeddings,
    write_mapping,
)
from .errors import A2XError, FormatError, GuardError, InfeasibleError, ValidationError
from .features import DistanceMatrix, Norm, PositionMatrix, distance_matrix, position_vectors
from .grouping import Grouping, KMeansConfig, SilhouetteReport, kmeans, silhouette
from .mapping import (
    MappingScore,
    build_mapping,
    cyclic_mapping,
    pearson,
    random_mapping,
    score_mapping,
    sweep_random,
    validate_mapping,
)
from .poison import PoisonManifest, PoisonPlan, poison_dataset, select_victims, trigger_all
from .triggers import (
    Blend,
    FourCorner,
    ReplaceSquare,
    Sinusoid,
    TriggerSpec,
    apply,
    render,
    trigger_from_json,
    trigger_to_json,
)

__version__ = "0.1.0"
