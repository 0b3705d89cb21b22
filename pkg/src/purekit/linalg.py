"""Dense float64 primitives: Householder QR, a one-sided Jacobi SVD, and
seeded Gaussian sampling.

All matrices are 2-D ``numpy.ndarray`` of float64. External data is widened
to 64-bit and checked for finiteness at the boundary (:func:`as_matrix`);
internal routines assume clean inputs.

Randomness comes from numpy's PCG64 (O'Neill's permuted congruential
generator, XSL-RR 128/64 variant) seeded through ``SeedSequence``. The same
seed produces the same stream on every platform; derived streams are keyed by
``(seed, *stream)`` spawn keys, so batch items can be sampled independently
of execution order. Frozen test vectors live in ``tests/test_linalg.py``.

The Jacobi SVD is deliberately self-contained (no LAPACK) so it can serve as
the exact oracle that the randomized decomposition and the component-removal
code are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NonFinite, RankDeficient, ValidationError

JACOBI_TOL = 1e-14          # relative off-diagonal threshold, |c| <= tol*sqrt(a*b)
JACOBI_MAX_SWEEPS = 60
QR_RANK_TOL = 1e-12         # column-norm floor during factorization


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD factors: ``U @ diag(sigma) @ V.T`` reconstructs the input.

    ``sigma`` is non-negative and non-increasing; columns of ``U`` and ``V``
    are orthonormal. Each column of ``V`` is sign-fixed so its
    largest-magnitude entry is positive (``U`` flipped to match), which makes
    factor comparisons deterministic.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        """Numerical rank: count of sigma above ``max(m, n) * eps * sigma[0]``."""
        return int(np.count_nonzero(self.sigma > self._rank_cutoff()))

    def _rank_cutoff(self) -> float:
        if self.sigma.size == 0 or self.sigma[0] == 0.0:
            return 0.0
        m, n = self.U.shape[0], self.V.shape[0]
        return float(self.sigma[0]) * max(m, n) * np.finfo(np.float64).eps


def as_matrix(data, name: str = "matrix") -> np.ndarray:
    """Validate external input as a finite, non-empty 2-D float64 array.

    Raises ValidationError for wrong dimensionality or empty axes, NonFinite
    for NaN/Inf entries. Always returns a fresh C-contiguous array.
    """
    A = np.array(data, dtype=np.float64, order="C")
    if A.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got {A.ndim}-D")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValidationError(f"{name} must be non-empty, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise NonFinite(f"{name} contains NaN or Inf")
    return A


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator for ``(seed, *stream)``.

    The extra ``stream`` integers form a spawn key, giving statistically
    independent streams for different keys under the same seed.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def gaussian_matrix(rows: int, cols: int, seed: int, *stream: int) -> np.ndarray:
    """Sample an i.i.d. standard-normal ``rows x cols`` matrix.

    Deterministic for a fixed ``(seed, *stream)`` key.
    """
    if rows < 1 or cols < 1:
        raise ValidationError(f"gaussian_matrix needs positive shape, got {rows}x{cols}")
    return make_rng(seed, *stream).standard_normal((rows, cols))


def _householder_basis(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder QR returning (Q, rdiag).

    Q (m x n) always has orthonormal columns, even when A is rank deficient:
    reflectors for numerically-zero pivot columns are skipped, which leaves
    the corresponding basis direction as the transformed canonical vector.
    rdiag[k] is the residual norm of column k at elimination time, i.e.
    |R[k, k]|; callers use it to detect rank deficiency.
    """
    m, n = A.shape
    R = A.astype(np.float64, copy=True)
    reflectors: list[np.ndarray | None] = []
    rdiag = np.empty(n)
    for k in range(n):
        x = R[k:, k]
        norm_x = float(np.linalg.norm(x))
        rdiag[k] = norm_x
        if norm_x == 0.0:
            reflectors.append(None)
            continue
        v = x.copy()
        v[0] += np.copysign(norm_x, x[0])
        v /= np.linalg.norm(v)
        reflectors.append(v)
        R[k:, k:] -= 2.0 * np.outer(v, v @ R[k:, k:])
    Q = np.eye(m, n)
    for k in range(n - 1, -1, -1):
        v = reflectors[k]
        if v is not None:
            Q[k:, :] -= 2.0 * np.outer(v, v @ Q[k:, :])
    return Q, rdiag


def qr_orthonormalize(A) -> np.ndarray:
    """Orthonormalize the columns of a full-column-rank matrix.

    Returns Q with the same shape and column span as ``A`` and
    ``Q.T @ Q = I`` to machine precision. Raises RankDeficient if any
    residual column norm falls below 1e-12 during factorization.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValidationError("qr_orthonormalize expects a 2-D array")
    m, n = A.shape
    if m < n:
        raise ValidationError(f"need rows >= cols, got {m}x{n}")
    Q, rdiag = _householder_basis(A)
    if (rdiag < QR_RANK_TOL).any():
        k = int(np.argmax(rdiag < QR_RANK_TOL))
        raise RankDeficient(
            f"column {k} has residual norm {rdiag[k]:.3e} < {QR_RANK_TOL:g}"
        )
    return Q


def orthonormal_basis(A) -> np.ndarray:
    """Like :func:`qr_orthonormalize` but completes the basis instead of
    failing when columns are dependent.

    Used by the randomized range finder, whose sketch is rank deficient by
    construction whenever the target matrix has rank below the sketch width.
    """
    A = np.asarray(A, dtype=np.float64)
    Q, _ = _householder_basis(A)
    return Q


def _round_robin_rounds(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # Tournament schedule: n-1 rounds of disjoint column pairs covering all
    # n*(n-1)/2 pairs once per sweep. Disjointness lets rotations within a
    # round be applied simultaneously.
    players: list[int | None] = list(range(n))
    if n % 2:
        players.append(None)
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        lo, hi = [], []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a is None or b is None:
                continue
            lo.append(min(a, b))
            hi.append(max(a, b))
        rounds.append((np.asarray(lo, dtype=np.intp), np.asarray(hi, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _jacobi_tall(A: np.ndarray, tol: float, max_sweeps: int):
    """One-sided Jacobi on A (m x n, m >= n): returns (W, V, sweeps) with
    A @ V = W and W having pairwise-orthogonal columns."""
    m, n = A.shape
    # Work on transposed buffers so each "column" is a contiguous row. The
    # explicit copy matters: rotations must never write through to the input.
    WT = A.T.copy()
    VT = np.eye(n)
    rounds = _round_robin_rounds(n)
    for sweep in range(max_sweeps):
        off = 0.0
        for i, j in rounds:
            Wi, Wj = WT[i], WT[j]
            a = np.einsum("ij,ij->i", Wi, Wi)
            b = np.einsum("ij,ij->i", Wj, Wj)
            c = np.einsum("ij,ij->i", Wi, Wj)
            denom = np.sqrt(a * b)
            rel = np.where(denom > 0.0, np.abs(c) / np.where(denom == 0.0, 1.0, denom), 0.0)
            off = max(off, float(rel.max(initial=0.0)))
            rotate = rel > tol
            if not rotate.any():
                continue
            ii, jj = i[rotate], j[rotate]
            aa, bb, cc = a[rotate], b[rotate], c[rotate]
            # Rotation angle zeroing the (i, j) Gram entry; tau == 0 (equal
            # column norms) needs the explicit 45-degree branch.
            tau = (bb - aa) / (2.0 * cc)
            t = np.sign(tau) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            t = np.where(tau == 0.0, 1.0, t)
            cs = (1.0 / np.sqrt(1.0 + t * t))[:, None]
            sn = cs * t[:, None]
            Wi, Wj = WT[ii], WT[jj]
            WT[ii] = cs * Wi - sn * Wj
            WT[jj] = sn * Wi + cs * Wj
            Vi, Vj = VT[ii], VT[jj]
            VT[ii] = cs * Vi - sn * Vj
            VT[jj] = sn * Vi + cs * Vj
        if off <= tol:
            return WT.T, VT.T, sweep + 1
    raise NoConvergence(
        f"one-sided Jacobi did not reach off-diagonal {tol:g} in {max_sweeps} sweeps"
    )


def _complete_basis(U: np.ndarray, cols: list[int]) -> None:
    # Fill the listed columns with unit vectors orthogonal to every other
    # column, picked deterministically from the canonical basis.
    m = U.shape[0]
    for k in cols:
        for cand in range(m):
            v = np.zeros(m)
            v[cand] = 1.0
            for _ in range(2):
                v -= U @ (U.T @ v)
            norm_v = np.linalg.norm(v)
            if norm_v > 0.5:
                U[:, k] = v / norm_v
                break


def exact_svd(A, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> SvdResult:
    """Thin SVD by one-sided Jacobi rotations, to near machine precision.

    Factors ``A`` (m x n) as ``U @ diag(sigma) @ V.T`` with
    ``t = min(m, n)`` columns. Convergence requires every scaled Gram
    off-diagonal ``|w_i . w_j| / (|w_i| |w_j|)`` to drop below ``tol``;
    exceeding ``max_sweeps`` raises NoConvergence. Zero singular values get
    orthonormal filler columns in ``U`` so the factor stays orthonormal.

    Column pairs follow a fixed round-robin schedule, so the result is
    deterministic for a given input.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValidationError("exact_svd expects a non-empty 2-D array")
    if not np.isfinite(A).all():
        raise NonFinite("exact_svd input contains NaN or Inf")
    m, n = A.shape
    if m < n:
        res = exact_svd(A.T, tol=tol, max_sweeps=max_sweeps)
        return SvdResult(U=res.V, sigma=res.sigma, V=res.U)

    W, V, _ = _jacobi_tall(A, tol, max_sweeps)
    sigma = np.linalg.norm(W, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    W = W[:, order]
    V = V[:, order]

    U = np.zeros((m, n))
    cutoff = sigma[0] * max(m, n) * np.finfo(np.float64).eps if sigma[0] > 0 else 0.0
    dead = []
    for k in range(n):
        if sigma[k] > cutoff:
            U[:, k] = W[:, k] / sigma[k]
        else:
            dead.append(k)
    _complete_basis(U, dead)

    # Sign convention: largest-|entry| of each V column made positive.
    flip = V[np.argmax(np.abs(V), axis=0), np.arange(n)] < 0
    V[:, flip] *= -1.0
    U[:, flip] *= -1.0
    return SvdResult(U=U, sigma=sigma, V=V)
