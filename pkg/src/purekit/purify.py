"""Instance-level principal component removal and parameter-free attention
pooling.

The removal step nulls each token row's projection onto the instance's own
top right singular vectors (computed on the raw, uncentered token matrix);
removing the top component equals subtracting the closest rank-1 matrix.
Pooling then aggregates the purified rows into one sentence vector, either by
a plain mean or by a parameter-free attention reweighting blended in with a
scalar ``alpha``.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .batch import InstanceBatch
from .errors import InvalidConfig, InvalidK, ValidationError
from .linalg import exact_svd
from .rsvd import ZERO_NORM_TOL, RsvdConfig, rsvd


class Backend(str, Enum):
    EXACT = "exact"
    RANDOMIZED = "rsvd"


class Pooling(str, Enum):
    PFSA_THEN_MEAN = "pfsa"
    MEAN_ONLY = "mean"


@dataclass(frozen=True)
class PurifyConfig:
    """Knobs for the purification pipeline.

    ``remove_k`` top components are removed per instance (0 disables
    removal); instances shorter than ``min_tokens_for_removal`` skip removal
    so a one-token instance is not annihilated. ``alpha`` scales the
    attention pooling blend; ``center_first`` subtracts the row mean before
    extracting components (ablation only, off by default).
    """

    remove_k: int = 1
    alpha: float = 1.5
    backend: Backend = Backend.RANDOMIZED
    rsvd: RsvdConfig = field(default_factory=RsvdConfig)
    min_tokens_for_removal: int = 2
    pooling: Pooling = Pooling.PFSA_THEN_MEAN
    center_first: bool = False

    def __post_init__(self) -> None:
        if self.remove_k < 0:
            raise InvalidConfig("remove_k must be >= 0")
        if not np.isfinite(self.alpha):
            raise InvalidConfig("alpha must be finite")
        if self.min_tokens_for_removal < 1:
            raise InvalidConfig("min_tokens_for_removal must be >= 1")


@dataclass
class PurifiedInstance:
    """Purified token rows, the pooled sentence vector, and what was removed.

    ``removed_components`` holds ``(scale, direction)`` pairs; ``scale`` is
    the norm of the projection actually subtracted, which equals the singular
    value when the decomposition is exact. ``removal_shortfall`` counts
    requested removals that were skipped (short instance or rank deficit).
    """

    tokens: np.ndarray
    pooled: np.ndarray
    removed_components: list[tuple[float, np.ndarray]]
    removal_shortfall: int = 0


def _top_right_vectors(X: np.ndarray, k: int, backend: Backend,
                       rsvd_cfg: RsvdConfig | None, stream: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Top-k right singular vectors of X and their singular values."""
    if backend == Backend.EXACT:
        res = exact_svd(X)
        return res.V[:, :k], res.sigma[:k]
    if rsvd_cfg is None:
        raise InvalidConfig("randomized backend requires an RsvdConfig")
    n, d = X.shape
    if rsvd_cfg.sketch_width_r < k:
        raise InvalidConfig(
            f"sketch_width_r={rsvd_cfg.sketch_width_r} cannot produce {k} components"
        )
    # Clamp the sketch to the instance: short sentences make min(n, d) < r.
    eff = replace(
        rsvd_cfg,
        sketch_width_r=min(rsvd_cfg.sketch_width_r, n, d),
        target_rank_t=k,
    )
    res = rsvd(X, eff, *stream)
    return res.V, res.sigma


def remove_top_components(
    X,
    k: int,
    backend: Backend = Backend.EXACT,
    rsvd_cfg: RsvdConfig | None = None,
    stream: tuple[int, ...] = (),
    center_first: bool = False,
) -> tuple[np.ndarray, list[tuple[float, np.ndarray]]]:
    """Null the projections of every row onto the top-k right singular
    vectors of ``X`` itself.

    Returns ``(X - sum_i (X v_i) v_i^T, removed)`` where all k directions
    come from one decomposition of the raw matrix. Directions whose singular
    value sits at numerical-noise level (relative 1e-12 of the largest) are
    not removed, so at most rank(X) components go; the caller sees the
    shortfall as a shorter ``removed`` list. Raises InvalidK when
    ``k > min(rows, cols)``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError("remove_top_components expects a 2-D array")
    n, d = X.shape
    if k > min(n, d):
        raise InvalidK(f"k={k} exceeds min(rows, cols)={min(n, d)}")
    if k == 0:
        return X.copy(), []

    mu = X.mean(axis=0) if center_first else None
    work = X - mu if mu is not None else X
    if np.linalg.norm(work) <= ZERO_NORM_TOL:
        return X.copy(), []

    V, sigma = _top_right_vectors(work, k, backend, rsvd_cfg, stream)
    keep = int(np.count_nonzero(sigma > sigma[0] * 1e-12)) if sigma[0] > 0 else 0
    V = V[:, :keep]

    coeffs = work @ V                       # (n, keep)
    out = work - coeffs @ V.T
    if mu is not None:
        out += mu
    removed = [
        (float(np.linalg.norm(coeffs[:, i])), V[:, i].copy()) for i in range(keep)
    ]
    return out, removed


def rank1_residual_oracle(X, k: int) -> np.ndarray:
    """Brute-force residual: drop the k leading rank-1 terms of the full SVD.

    Computes the complete exact decomposition and sums
    ``sigma_i u_i v_i^T`` for ``i > k``. Exists to cross-check
    :func:`remove_top_components`; it shares no arithmetic with the
    projection-subtraction path.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError("rank1_residual_oracle expects a 2-D array")
    n, d = X.shape
    if k > min(n, d):
        raise InvalidK(f"k={k} exceeds min(rows, cols)={min(n, d)}")
    res = exact_svd(X)
    out = np.zeros_like(X)
    for i in range(k, res.sigma.size):
        out += res.sigma[i] * np.outer(res.U[:, i], res.V[:, i])
    return out


def pfsa_pool(X, alpha: float) -> np.ndarray:
    """Parameter-free attention pooling followed by the mean.

    Rows are direction-normalized, scored against their own mean direction
    (scaled by 1/sqrt(d)), and softmax-reweighted into a context vector c in
    the convex hull of the rows. Each token is then pulled toward c by
    ``alpha`` and the rows are averaged, which collapses to
    ``(1 - alpha) * mean(X) + alpha * c``. Linear time in n*d, no learned
    parameters; ``alpha = 0`` reduces to plain mean pooling.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValidationError("pfsa_pool expects a non-empty 2-D array")
    n, d = X.shape
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    Xhat = np.divide(X, norms, out=np.zeros_like(X), where=norms > 0.0)
    g = Xhat.mean(axis=0)
    scores = (Xhat @ g) / np.sqrt(d)
    scores -= scores.max()
    w = np.exp(scores)
    w /= w.sum()
    context = w @ X
    return (1.0 - alpha) * X.mean(axis=0) + alpha * context


def purify_instance(X, cfg: PurifyConfig, stream: tuple[int, ...] = ()) -> PurifiedInstance:
    """Run removal (when the instance is long enough) and pooling on one
    instance's token matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValidationError("purify_instance expects a non-empty 2-D array")
    n, d = X.shape
    if cfg.remove_k >= 1 and n >= cfg.min_tokens_for_removal:
        # remove_k is a global setting; per-instance shape caps it.
        k_eff = min(cfg.remove_k, n, d)
        tokens, removed = remove_top_components(
            X,
            k_eff,
            backend=cfg.backend,
            rsvd_cfg=cfg.rsvd,
            stream=stream,
            center_first=cfg.center_first,
        )
    else:
        tokens, removed = X.copy(), []
    if cfg.pooling == Pooling.PFSA_THEN_MEAN:
        pooled = pfsa_pool(tokens, cfg.alpha)
    else:
        pooled = tokens.mean(axis=0)
    return PurifiedInstance(
        tokens=tokens,
        pooled=pooled,
        removed_components=removed,
        removal_shortfall=cfg.remove_k - len(removed),
    )


def purify_batch(batch: InstanceBatch, cfg: PurifyConfig, workers: int = 1) -> list[PurifiedInstance]:
    """Purify every instance of a batch, in input order.

    Each instance draws its randomness from the stream keyed
    ``(cfg.rsvd.seed, instance_index)``, so results are identical no matter
    how many workers execute the batch. The first failing instance aborts the
    run with its index and id in the error message.
    """
    def one(i: int) -> PurifiedInstance:
        try:
            return purify_instance(batch.instance(i), cfg, stream=(i,))
        except Exception as exc:
            raise type(exc)(f"instance {i} (id {batch.ids[i]!r}): {exc}") from exc

    if workers <= 1 or len(batch) <= 1:
        return [one(i) for i in range(len(batch))]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(one, i) for i in range(len(batch))]
        return [f.result() for f in futures]
