"""Randomized SVD: Gaussian sketch, stabilized subspace iteration, and the
small-matrix lift.

The sketch draws ``r`` Gaussian random vectors (the basis width equals the
vector count), so the only randomness is in the range finder; the lift is
deterministic given the basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, RankDeficient, ValidationError, ZeroMatrix
from .linalg import SvdResult, exact_svd, gaussian_matrix, orthonormal_basis

ZERO_NORM_TOL = 1e-30
SKETCH_COLLAPSE_TOL = 1e-12


@dataclass(frozen=True)
class RsvdConfig:
    """Sketch width, subspace-iteration count, output rank, and seed.

    ``sketch_width_r`` is the number of Gaussian random vectors;
    ``target_rank_t`` (<= r) is how many factors the decomposition returns.
    ``power_iters_q`` extra passes sharpen the basis toward the top singular
    directions at the cost of 2q more matrix products.
    """

    sketch_width_r: int = 8
    power_iters_q: int = 2
    target_rank_t: int = 1
    seed: int = 42

    def validate_for(self, rows: int, cols: int) -> None:
        if self.sketch_width_r < 1:
            raise InvalidConfig("sketch_width_r must be >= 1")
        if self.power_iters_q < 0:
            raise InvalidConfig("power_iters_q must be >= 0")
        if self.target_rank_t < 1:
            raise InvalidConfig("target_rank_t must be >= 1")
        if self.target_rank_t > self.sketch_width_r:
            raise InvalidConfig(
                f"target_rank_t={self.target_rank_t} exceeds sketch_width_r={self.sketch_width_r}"
            )
        if self.sketch_width_r > min(rows, cols):
            raise InvalidConfig(
                f"sketch_width_r={self.sketch_width_r} exceeds min(rows, cols)={min(rows, cols)}"
            )


def randomized_range_finder(A, cfg: RsvdConfig, *stream: int) -> np.ndarray:
    """Orthonormal basis Q (rows x r) approximating the range of ``A``.

    Sketches ``Y = A @ Omega`` with a seeded Gaussian ``Omega`` (cols x r),
    then runs ``power_iters_q`` rounds of subspace iteration,
    re-orthonormalizing after every half-step product. Always satisfies
    ``|A - Q Q^T A|_F <= |A|_F``; the residual is ~0 when rank(A) <= r.

    Raises RankDeficient if the sketch collapses (every sketched column below
    1e-12), which for a Gaussian Omega only happens when ``A`` itself is
    numerically zero.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValidationError("randomized_range_finder expects a 2-D array")
    rows, cols = A.shape
    cfg.validate_for(rows, cols)
    omega = gaussian_matrix(cols, cfg.sketch_width_r, cfg.seed, *stream)
    Y = A @ omega
    if np.linalg.norm(Y, axis=0).max(initial=0.0) < SKETCH_COLLAPSE_TOL:
        raise RankDeficient("sketch collapsed: every sketched column is numerically zero")
    Q = orthonormal_basis(Y)
    for _ in range(cfg.power_iters_q):
        Z = orthonormal_basis(A.T @ Q)
        Q = orthonormal_basis(A @ Z)
    return Q


def rsvd(A, cfg: RsvdConfig, *stream: int) -> SvdResult:
    """Randomized thin SVD truncated to ``cfg.target_rank_t`` factors.

    Lifts through ``B = Q^T A``: an exact SVD of the small ``r x cols``
    matrix gives ``B = Ub S V^T`` and ``U = Q Ub``. Deterministic for fixed
    ``(A, cfg, stream)``.

    Raises ZeroMatrix when ``|A|_F <= 1e-30`` and InvalidConfig when the
    sketch width exceeds ``min(rows, cols)``.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValidationError("rsvd expects a 2-D array")
    if np.linalg.norm(A) <= ZERO_NORM_TOL:
        raise ZeroMatrix("rsvd input has (near-)zero Frobenius norm")
    cfg.validate_for(*A.shape)
    Q = randomized_range_finder(A, cfg, *stream)
    B = Q.T @ A
    small = exact_svd(B)
    t = cfg.target_rank_t
    return SvdResult(U=Q @ small.U[:, :t], sigma=small.sigma[:t], V=small.V[:, :t])
