import numpy as np
import pytest

from purekit.errors import InvalidConfig, RankDeficient, ZeroMatrix
from purekit.linalg import exact_svd, make_rng, qr_orthonormalize
from purekit.rsvd import RsvdConfig, randomized_range_finder, rsvd


def planted_spectrum_matrix(m, n, spectrum, seed):
    """A = U diag(spectrum) V^T with seeded random orthonormal factors."""
    k = len(spectrum)
    rng = make_rng(seed)
    U = qr_orthonormalize(rng.standard_normal((m, k)))
    V = qr_orthonormalize(rng.standard_normal((n, k)))
    return U @ np.diag(spectrum) @ V.T


class TestRangeFinder:
    def test_exact_rank_capture(self):
        rng = make_rng(77)
        A = rng.standard_normal((20, 3)) @ rng.standard_normal((3, 12))
        cfg = RsvdConfig(sketch_width_r=8, power_iters_q=0, target_rank_t=3, seed=5)
        Q = randomized_range_finder(A, cfg)
        assert Q.shape == (20, 8)
        assert np.abs(Q.T @ Q - np.eye(8)).max() < 1e-10
        resid = np.linalg.norm(A - Q @ (Q.T @ A)) / np.linalg.norm(A)
        assert resid < 1e-10

    def test_residual_never_exceeds_norm(self):
        for seed in range(10):
            A = make_rng(seed).standard_normal((15, 11))
            cfg = RsvdConfig(sketch_width_r=4, power_iters_q=1, target_rank_t=2, seed=seed)
            Q = randomized_range_finder(A, cfg)
            assert np.linalg.norm(A - Q @ (Q.T @ A)) <= np.linalg.norm(A) + 1e-12

    def test_deterministic(self):
        A = make_rng(3).standard_normal((10, 9))
        cfg = RsvdConfig(sketch_width_r=4, power_iters_q=2, target_rank_t=2, seed=11)
        Q1 = randomized_range_finder(A, cfg)
        Q2 = randomized_range_finder(A, cfg)
        assert Q1.tobytes() == Q2.tobytes()

    def test_sketch_collapse_surfaced(self):
        A = np.full((6, 5), 1e-300)
        cfg = RsvdConfig(sketch_width_r=2, power_iters_q=0, target_rank_t=1, seed=0)
        with pytest.raises(RankDeficient):
            randomized_range_finder(A, cfg)

    def test_oversized_sketch_rejected(self):
        A = np.eye(4)
        cfg = RsvdConfig(sketch_width_r=5, power_iters_q=0, target_rank_t=1, seed=0)
        with pytest.raises(InvalidConfig):
            randomized_range_finder(A, cfg)


class TestRsvd:
    def test_rank1_axis_aligned(self):
        A = np.zeros((4, 3))
        A[0, 0] = 5.0
        cfg = RsvdConfig(sketch_width_r=2, power_iters_q=0, target_rank_t=1, seed=1)
        res = rsvd(A, cfg)
        assert abs(res.sigma[0] - 5.0) < 1e-10
        v1 = res.V[:, 0]
        np.testing.assert_allclose(np.abs(v1), [1.0, 0.0, 0.0], atol=1e-10)

    def test_planted_spectrum_recovered(self):
        spectrum = [1.0, 0.5, 0.25, 0.125]
        A = planted_spectrum_matrix(16, 10, spectrum, seed=9)
        cfg = RsvdConfig(sketch_width_r=4, power_iters_q=2, target_rank_t=4, seed=21)
        res = rsvd(A, cfg)
        np.testing.assert_allclose(res.sigma, spectrum, rtol=1e-8)

    def test_dense_full_rank_top_sigma(self):
        A = make_rng(2025).standard_normal((24, 16))
        cfg = RsvdConfig(sketch_width_r=8, power_iters_q=2, target_rank_t=1, seed=6)
        approx = rsvd(A, cfg).sigma[0]
        exact = exact_svd(A).sigma[0]
        assert abs(approx - exact) / exact < 2e-2

    def test_factor_orthonormality(self):
        A = make_rng(8).standard_normal((18, 12))
        cfg = RsvdConfig(sketch_width_r=6, power_iters_q=1, target_rank_t=6, seed=3)
        res = rsvd(A, cfg)
        assert np.abs(res.U.T @ res.U - np.eye(6)).max() < 1e-8
        assert np.abs(res.V.T @ res.V - np.eye(6)).max() < 1e-8

    def test_sigma_never_exceeds_exact(self):
        # Randomized estimates are Rayleigh quotients of a projected matrix;
        # they can only undershoot the true singular values.
        for seed in range(20):
            A = make_rng(500 + seed).standard_normal((14, 10))
            exact = exact_svd(A).sigma
            cfg = RsvdConfig(sketch_width_r=5, power_iters_q=1, target_rank_t=5, seed=seed)
            approx = rsvd(A, cfg).sigma
            assert (approx <= exact[:5] + 1e-8).all()

    def test_power_iterations_help_on_average(self):
        A = make_rng(314).standard_normal((30, 20))
        top = exact_svd(A).sigma[0]
        errs = {q: [] for q in (0, 2)}
        for q in (0, 2):
            for seed in range(20):
                cfg = RsvdConfig(sketch_width_r=6, power_iters_q=q, target_rank_t=1, seed=seed)
                errs[q].append(abs(rsvd(A, cfg).sigma[0] - top) / top)
        assert np.mean(errs[2]) <= np.mean(errs[0])

    def test_zero_matrix_rejected(self):
        cfg = RsvdConfig(sketch_width_r=2, power_iters_q=0, target_rank_t=1, seed=0)
        with pytest.raises(ZeroMatrix):
            rsvd(np.zeros((5, 4)), cfg)

    def test_determinism_across_calls(self):
        A = make_rng(1).standard_normal((12, 9))
        cfg = RsvdConfig(sketch_width_r=4, power_iters_q=2, target_rank_t=3, seed=77)
        r1, r2 = rsvd(A, cfg), rsvd(A, cfg)
        assert r1.U.tobytes() == r2.U.tobytes()
        assert r1.sigma.tobytes() == r2.sigma.tobytes()
        assert r1.V.tobytes() == r2.V.tobytes()

    def test_stream_key_changes_draws(self):
        A = make_rng(4).standard_normal((12, 9))
        cfg = RsvdConfig(sketch_width_r=4, power_iters_q=0, target_rank_t=3, seed=77)
        assert rsvd(A, cfg, 0).V.tobytes() != rsvd(A, cfg, 1).V.tobytes()

    def test_invalid_target_rank(self):
        with pytest.raises(InvalidConfig):
            RsvdConfig(sketch_width_r=2, power_iters_q=0, target_rank_t=3, seed=0).validate_for(9, 9)
