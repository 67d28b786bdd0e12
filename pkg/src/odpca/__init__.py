"""Online distributed PCA: two-level eigenspace aggregation for streaming
data on a simulated star topology, with one-shot and centralized baselines,
synthetic spiked-covariance benchmarks, and downstream evaluation tasks."""

from .aggregation import (
    OdpcaState,
    aggregate_local,
    baseline_all_eigenvectors,
    dpca,
    full_pca,
    local_top_k,
    odpca_finalize,
    odpca_init,
    odpca_step,
)
from .datagen import (
    SeededStream,
    SpikedModel,
    default_spikes,
    make_spiked_model,
    sample_gaussian,
    sample_heavy_shuffled,
)
from .datasets import DatasetSpec, load_dataset, partition_stream, write_csv_matrix
from .errors import (
    ConvergenceError,
    IdentifiabilityError,
    IngestionError,
    OdpcaError,
    RankDeficiencyError,
    StateError,
)
from .estimators import (
    AllEigenvectorsBaseline,
    DistributedPCA,
    FullPCA,
    OnlineDistributedPCA,
)
from .harness import (
    MatrixSource,
    RunConfig,
    RunReport,
    SyntheticSource,
    run_stream,
    scaling_experiment,
    timing_probe,
)
from .linalg import (
    EigenDecomposition,
    empirical_covariance,
    frobenius_norm,
    orthonormalize,
    sym_eig,
    top_k_eig,
)
from .subspace import (
    SpectrumStats,
    h_objective,
    mean_projector,
    projection_distance,
    spectrum_stats,
)
from .tasks import (
    ClusteringResult,
    clustering_cost_ratio,
    kmeans_lloyd,
    lowrank_error,
    project_data,
    projected_clustering_cost,
    relative_error,
)

__version__ = "0.1.0"

__all__ = [
    "AllEigenvectorsBaseline",
    "ClusteringResult",
    "ConvergenceError",
    "DatasetSpec",
    "DistributedPCA",
    "EigenDecomposition",
    "FullPCA",
    "IdentifiabilityError",
    "IngestionError",
    "MatrixSource",
    "OdpcaError",
    "OdpcaState",
    "OnlineDistributedPCA",
    "RankDeficiencyError",
    "RunConfig",
    "RunReport",
    "SeededStream",
    "SpectrumStats",
    "SpikedModel",
    "StateError",
    "SyntheticSource",
    "aggregate_local",
    "baseline_all_eigenvectors",
    "clustering_cost_ratio",
    "default_spikes",
    "dpca",
    "empirical_covariance",
    "frobenius_norm",
    "full_pca",
    "h_objective",
    "kmeans_lloyd",
    "load_dataset",
    "local_top_k",
    "lowrank_error",
    "make_spiked_model",
    "mean_projector",
    "odpca_finalize",
    "odpca_init",
    "odpca_step",
    "orthonormalize",
    "partition_stream",
    "project_data",
    "projected_clustering_cost",
    "projection_distance",
    "relative_error",
    "run_stream",
    "sample_gaussian",
    "sample_heavy_shuffled",
    "scaling_experiment",
    "spectrum_stats",
    "sym_eig",
    "timing_probe",
    "top_k_eig",
    "write_csv_matrix",
]
