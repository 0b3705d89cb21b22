"""purekit: instance-level principal component removal for token embeddings.

Library layout:

* :mod:`purekit.linalg`   - float64 primitives: Householder QR, one-sided
  Jacobi SVD (the exact oracle), seeded Gaussian sampling
* :mod:`purekit.rsvd`     - randomized SVD via Gaussian sketching and
  subspace iteration
* :mod:`purekit.purify`   - component removal, attention pooling, and the
  per-instance pipeline
* :mod:`purekit.isotropy` - intra/cross-instance similarity diagnostics
* :mod:`purekit.metrics`  - attack-record bookkeeping (acc/aua/asr/avgq/pdr)
* :mod:`purekit.harness`  - synthetic perturbation-robustness bench
* :mod:`purekit.npyio`    - NPY matrix files and instance-batch loading
* :mod:`purekit.cli`      - the ``purekit`` command
"""

from .batch import InstanceBatch
from .errors import (
    IoFailure,
    NumericalError,
    PurekitError,
    ValidationError,
)
from .harness import (
    DirectionMode,
    RobustnessReport,
    SynthConfig,
    directional_perturb,
    probe_flip_rate,
    run_experiment,
    synth_batch,
)
from .isotropy import (
    IsotropyReport,
    anisotropy_baseline,
    anisotropy_baseline_exhaustive,
    dimension_dominance,
    intra_set_similarity,
    isotropy_report,
    pc_variance_shares,
)
from .linalg import (
    SvdResult,
    as_matrix,
    exact_svd,
    gaussian_matrix,
    make_rng,
    qr_orthonormalize,
)
from .metrics import (
    AttackRecord,
    MetricsReport,
    accuracy_under_attack,
    attack_success_rate,
    average_pdr,
    average_queries,
    clean_accuracy,
    compute_report,
    load_records_jsonl,
    performance_drop_rate,
)
from .npyio import read_instances, read_npy, write_npy
from .purify import (
    Backend,
    Pooling,
    PurifiedInstance,
    PurifyConfig,
    pfsa_pool,
    purify_batch,
    purify_instance,
    rank1_residual_oracle,
    remove_top_components,
)
from .rsvd import RsvdConfig, randomized_range_finder, rsvd

__version__ = "0.1.0"

__all__ = [
    "AttackRecord",
    "Backend",
    "DirectionMode",
    "InstanceBatch",
    "IoFailure",
    "IsotropyReport",
    "MetricsReport",
    "NumericalError",
    "Pooling",
    "PurekitError",
    "PurifiedInstance",
    "PurifyConfig",
    "RobustnessReport",
    "RsvdConfig",
    "SvdResult",
    "SynthConfig",
    "ValidationError",
    "accuracy_under_attack",
    "anisotropy_baseline",
    "anisotropy_baseline_exhaustive",
    "as_matrix",
    "attack_success_rate",
    "average_pdr",
    "average_queries",
    "clean_accuracy",
    "compute_report",
    "dimension_dominance",
    "directional_perturb",
    "exact_svd",
    "gaussian_matrix",
    "intra_set_similarity",
    "isotropy_report",
    "load_records_jsonl",
    "make_rng",
    "pc_variance_shares",
    "performance_drop_rate",
    "pfsa_pool",
    "probe_flip_rate",
    "purify_batch",
    "purify_instance",
    "qr_orthonormalize",
    "randomized_range_finder",
    "rank1_residual_oracle",
    "read_instances",
    "read_npy",
    "remove_top_components",
    "rsvd",
    "run_experiment",
    "synth_batch",
    "write_npy",
]
