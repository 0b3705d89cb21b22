"""Isotropy diagnostics for token-embedding corpora.

Three views of how directionally uniform an embedding space is: the mean
cosine between tokens of the *same* instance (unadjusted similarity), the
mean cosine between tokens of *different* instances (the anisotropy
estimate, which the adjusted score subtracts out), and per-dimension /
per-principal-component decompositions of where that cross-instance
similarity comes from.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewInstances, TooFewRows, ZeroMatrix, ZeroRow
from .linalg import exact_svd, make_rng

ROW_NORM_TOL = 1e-12
DEFAULT_PAIRS = 10_000


@dataclass
class IsotropyReport:
    """Corpus-level isotropy summary.

    ``adjusted = unadjusted - anisotropy_estimate`` holds exactly;
    ``pc_variance_shares`` are the squared singular values of the stacked
    token matrix, normalized to sum to 1; ``dim_dominance`` sums to
    ``anisotropy_estimate``.
    """

    unadjusted: float
    anisotropy_estimate: float
    adjusted: float
    pc_variance_shares: np.ndarray
    dim_dominance: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "unadjusted": self.unadjusted,
            "anisotropy_estimate": self.anisotropy_estimate,
            "adjusted": self.adjusted,
            "pc_variance_shares": [float(v) for v in self.pc_variance_shares],
            "dim_dominance": [float(v) for v in self.dim_dominance],
        }


def _unit_rows(X: np.ndarray, what: str) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1)
    if (norms < ROW_NORM_TOL).any():
        bad = int(np.argmax(norms < ROW_NORM_TOL))
        raise ZeroRow(f"{what} row {bad} has norm {norms[bad]:.3e} < {ROW_NORM_TOL:g}")
    return X / norms[:, None]


def intra_set_similarity(X) -> float:
    """Mean cosine similarity over all unordered distinct row pairs.

    Cosines come from the normalized Gram matrix,
    ``G_ij / sqrt(G_ii G_jj)``, which makes identical rows score exactly
    1.0 (``sqrt(s * s) == s`` in IEEE arithmetic). Needs n >= 2 and no zero
    rows.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise TooFewRows(f"intra_set_similarity needs >= 2 rows, got {n}")
    G = X @ X.T
    diag = np.diag(G)
    if (diag < ROW_NORM_TOL * ROW_NORM_TOL).any():
        bad = int(np.argmax(diag < ROW_NORM_TOL * ROW_NORM_TOL))
        raise ZeroRow(f"instance row {bad} has norm below {ROW_NORM_TOL:g}")
    cosines = G / np.sqrt(np.outer(diag, diag))
    iu = np.triu_indices(n, k=1)
    return float(cosines[iu].mean())


def _check_corpus(corpus) -> list[np.ndarray]:
    mats = [np.asarray(M, dtype=np.float64) for M in corpus]
    if len(mats) < 2:
        raise TooFewInstances(f"need >= 2 instances, got {len(mats)}")
    return mats


def _sample_cross_rows(corpus: list[np.ndarray], n_pairs: int, seed: int):
    """Seeded draws of (token-from-instance-a, token-from-instance-b), a != b.

    Instances are drawn uniformly, then a token uniformly within each, so
    short sentences weigh the same as long ones.
    """
    rng = make_rng(seed)
    m = len(corpus)
    a = rng.integers(0, m, size=n_pairs)
    b = rng.integers(0, m - 1, size=n_pairs)
    b = b + (b >= a)
    lengths = np.array([inst.shape[0] for inst in corpus])
    ia = np.floor(rng.random(n_pairs) * lengths[a]).astype(np.intp)
    ib = np.floor(rng.random(n_pairs) * lengths[b]).astype(np.intp)
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    stacked = np.concatenate(corpus, axis=0)
    return stacked[starts[a] + ia], stacked[starts[b] + ib]


def _pair_contributions(corpus, n_pairs: int, seed: int) -> np.ndarray:
    mats = _check_corpus(corpus)
    for idx, M in enumerate(mats):
        _unit_rows(M, f"instance {idx}")
    xa, xb = _sample_cross_rows(mats, n_pairs, seed)
    denom = np.linalg.norm(xa, axis=1) * np.linalg.norm(xb, axis=1)
    return (xa * xb) / denom[:, None]


def anisotropy_baseline(corpus, n_pairs: int = DEFAULT_PAIRS, seed: int = 42) -> float:
    """Mean cosine between seeded random cross-instance token pairs.

    This is the background similarity an anisotropic space carries between
    unrelated tokens; the adjusted isotropy score subtracts it from the
    intra-instance similarity.
    """
    contrib = _pair_contributions(corpus, n_pairs, seed)
    return float(contrib.sum(axis=1).mean())


def anisotropy_baseline_exhaustive(corpus) -> float:
    """Exact mean over *all* cross-instance token pairs.

    Quadratic in corpus size; the independent oracle for
    :func:`anisotropy_baseline` on small corpora.
    """
    mats = _check_corpus(corpus)
    units = [_unit_rows(M, f"instance {i}") for i, M in enumerate(mats)]
    total = 0.0
    count = 0
    for i in range(len(units)):
        for j in range(i + 1, len(units)):
            total += float(units[i].sum(axis=0) @ units[j].sum(axis=0))
            count += units[i].shape[0] * units[j].shape[0]
    return total / count


def dimension_dominance(corpus, n_pairs: int = DEFAULT_PAIRS, seed: int = 42) -> np.ndarray:
    """Per-dimension share of the cross-instance cosine similarity.

    Entry ``j`` is the mean over sampled pairs of ``x_j y_j / (|x| |y|)``;
    the vector sums to :func:`anisotropy_baseline` evaluated with the same
    seed and pair count. A single dimension carrying most of the sum is the
    signature of a dominant rogue direction.
    """
    contrib = _pair_contributions(corpus, n_pairs, seed)
    return contrib.mean(axis=0)


def pc_variance_shares(X) -> np.ndarray:
    """Normalized squared singular values of ``X``, non-increasing.

    Shares close to uniform indicate an isotropic cloud; a leading share
    near 1 indicates a single dominant direction.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] < 2:
        raise TooFewRows(f"pc_variance_shares needs >= 2 rows, got {X.shape[0]}")
    sigma = exact_svd(X).sigma
    energy = sigma * sigma
    total = energy.sum()
    if total <= 0.0:
        raise ZeroMatrix("pc_variance_shares of an all-zero matrix")
    return energy / total


def isotropy_report(corpus, n_pairs: int = DEFAULT_PAIRS, seed: int = 42) -> IsotropyReport:
    """Full corpus diagnostic: intra/cross similarity and both decompositions."""
    mats = _check_corpus(corpus)
    unadjusted = float(np.mean([intra_set_similarity(M) for M in mats]))
    dominance = dimension_dominance(mats, n_pairs, seed)
    baseline = anisotropy_baseline(mats, n_pairs, seed)
    return IsotropyReport(
        unadjusted=unadjusted,
        anisotropy_estimate=baseline,
        adjusted=unadjusted - baseline,
        pc_variance_shares=pc_variance_shares(np.concatenate(mats, axis=0)),
        dim_dominance=dominance,
    )
