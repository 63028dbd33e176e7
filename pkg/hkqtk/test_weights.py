"""Tests for the weights submodule."""

import numpy as np
import pytest

from .energy import default_bandwidth, weighted_gaussian_energy
from .weights import *
from .geometry import ManifoldSpec


T1 = ManifoldSpec.torus(1)
T2 = ManifoldSpec.torus(2)
T3 = ManifoldSpec.torus(3)


def image_sum(u: np.ndarray, t: float, images: int = 8) -> np.ndarray:
	return sum(np.exp(-(u + n) ** 2 / (4 * t)) for n in range(-images, images + 1))


def brute_force_weights(points: list[float], t: float, min_image: bool = False) -> np.ndarray:
	x = np.asarray(points)
	diff = x[:, None] - x[None, :]
	if min_image:
		dist = np.minimum(np.abs(diff), 1 - np.abs(diff))
		C = np.exp(-dist**2 / (4 * t))
	else:
		C = image_sum(diff, t)
	y = np.linalg.solve(C, np.ones(len(points)))
	return y / y.sum()


class TestKernelMatrix:
	def test_single(self):
		km = kernel_matrix(PointSet(T1, [[0.3]]), 0.1)
		assert km.entries[0, 0] == pytest.approx(image_sum(0.0, 0.1), rel=1e-14)
		assert km.entries[0, 0] > 1

	def test_single_min_image(self):
		assert np.array_equal(kernel_matrix(PointSet(T1, [[0.3]]), 0.1, TorusKernel.MIN_IMAGE).entries, [[1.0]])

	def test_coincident(self):
		km = kernel_matrix(PointSet(T1, [[0.3], [0.3]]), 0.1)
		assert np.all(km.entries == km.entries[0, 0])

	def test_half_period(self):
		km = kernel_matrix(PointSet(T1, [[0.0], [0.5]]), 0.25)
		assert km.entries[0, 1] == pytest.approx(image_sum(0.5, 0.25), rel=1e-14)
		assert km.entries[1, 0] == km.entries[0, 1]
		assert km.n == 2
		assert km.torus_kernel == TorusKernel.WRAPPED

	def test_half_period_min_image(self):
		km = kernel_matrix(PointSet(T1, [[0.0], [0.5]]), 0.25, TorusKernel.MIN_IMAGE)
		assert km.entries[0, 1] == pytest.approx(np.exp(-0.25), rel=1e-15)

	def test_sphere_ignores_torus_kernel(self):
		normals = np.random.default_rng(5).standard_normal((6, 3))
		ps = PointSet(ManifoldSpec.sphere(), normals / np.linalg.norm(normals, axis=1, keepdims=True))
		np.testing.assert_array_equal(kernel_matrix(ps, 0.1).entries, kernel_matrix(ps, 0.1, TorusKernel.MIN_IMAGE).entries)

	@pytest.mark.parametrize(("n", "m"), [(20, T2), (55, T2), (89, T2)])
	def test_wrapped_is_positive_definite_at_default_bandwidth(self, n: int, m: ManifoldSpec):
		ps = PointSet(m, np.random.default_rng(n).random((n, m.dim)))
		km = kernel_matrix(ps, default_bandwidth(n, m.dim))
		assert np.linalg.eigvalsh(km.entries).min() > 0

	def test_bad_bandwidth(self):
		with pytest.raises(EnergyError):
			kernel_matrix(PointSet(T1, [[0.3]]), -1.0)


class TestSolveWeights:
	def test_single(self):
		assert np.array_equal(solve_weights(PointSet(T1, [[0.4]]), 0.1), [1.0])

	@pytest.mark.parametrize("t", [0.001, 0.01, 0.02, 1 / 64, 0.5])
	def test_equispaced_symmetry(self, t: float):
		ps = PointSet(T1, np.arange(4)[:, None] / 4)
		np.testing.assert_allclose(solve_weights(ps, t), 0.25, rtol=1e-12)

	@pytest.mark.parametrize("n", range(2, 13))
	def test_equispaced_default_bandwidth(self, n: int):
		report = solve_weights_report(PointSet(T1, np.arange(n)[:, None] / n), default_bandwidth(n, 1))
		assert report.solver == Solver.CHOLESKY
		np.testing.assert_allclose(report.weights, 1 / n, rtol=1e-10)

	def test_three_point_oracle(self):
		ps = PointSet(T1, [[0.0], [0.25], [0.6]])
		np.testing.assert_allclose(solve_weights(ps, 0.1), brute_force_weights([0.0, 0.25, 0.6], 0.1), rtol=1e-10)

	def test_three_point_oracle_min_image(self):
		ps = PointSet(T1, [[0.0], [0.25], [0.6]])
		expected = brute_force_weights([0.0, 0.25, 0.6], 0.1, min_image=True)
		np.testing.assert_allclose(solve_weights(ps, 0.1, TorusKernel.MIN_IMAGE), expected, rtol=1e-12)

	@pytest.mark.parametrize("seed", range(100))
	def test_sum_and_kkt(self, seed: int):
		ps = PointSet(T2, np.random.default_rng(seed).random((30, 2)))
		report = solve_weights_report(ps, 0.005)
		assert report.weights.sum() == pytest.approx(1.0, abs=1e-12)
		assert report.kkt_spread <= 1e-9
		assert report.jitter == 0
		assert report.condition >= 1

	def test_permutation_equivariance(self):
		x = np.random.default_rng(2).random((12, 2))
		perm = np.random.default_rng(3).permutation(12)
		a = solve_weights(PointSet(T2, x), 0.005)
		b = solve_weights(PointSet(T2, x[perm]), 0.005)
		np.testing.assert_allclose(b, a[perm], rtol=1e-10)

	@pytest.mark.parametrize("seed", range(100))
	def test_beats_uniform_weights(self, seed: int):
		ps = PointSet(T2, np.random.default_rng(seed).random((25, 2)))
		a = solve_weights(ps, 0.005)
		assert weighted_gaussian_energy(ps, 0.005, a) <= weighted_gaussian_energy(ps, 0.005, np.full(25, 1 / 25)) + 1e-15

	@pytest.mark.parametrize(("n", "m", "seed"), [(20, T2, 0), (55, T2, 1), (89, T2, 2), (55, T3, 3)])
	def test_minimizer_at_default_bandwidth(self, n: int, m: ManifoldSpec, seed: int):
		ps = PointSet(m, np.random.default_rng(seed).random((n, m.dim)))
		t = default_bandwidth(n, m.dim)
		report = solve_weights_report(ps, t)
		assert report.solver in (Solver.CHOLESKY, Solver.CHOLESKY_JITTER)
		uniform = weighted_gaussian_energy(ps, t, np.full(n, 1 / n))
		assert weighted_gaussian_energy(ps, t, report.weights) <= uniform * (1 + 1e-9)

	@pytest.mark.parametrize("seed", range(5))
	def test_perturbing_the_minimizer_raises_the_energy(self, seed: int):
		rng = np.random.default_rng(seed)
		ps = PointSet(T2, rng.random((30, 2)))
		t = default_bandwidth(30, 2)
		a = solve_weights(ps, t)
		# directions orthogonal to 𝟙 keep Σa fixed
		v = rng.standard_normal(30)
		v -= v.mean()
		best = weighted_gaussian_energy(ps, t, a)
		for scale in (1e-3, 1e-1):
			assert weighted_gaussian_energy(ps, t, a + scale * v) >= best

	def test_sphere(self):
		normals = np.random.default_rng(4).standard_normal((20, 3))
		ps = PointSet(ManifoldSpec.sphere(), normals / np.linalg.norm(normals, axis=1, keepdims=True))
		assert solve_weights(ps, 0.05).sum() == pytest.approx(1.0, abs=1e-12)

	def test_coincident_points_use_jitter(self):
		report = solve_weights_report(PointSet(T1, [[0.3], [0.3]]), 0.1)
		assert report.solver == Solver.CHOLESKY_JITTER
		assert report.jitter == JITTER
		np.testing.assert_allclose(report.weights, [0.5, 0.5], rtol=1e-12)

	def test_wrapped_kernel_needs_no_fallback(self):
		report = solve_weights_report(PointSet(T1, np.arange(8)[:, None] / 8), 1 / 64)
		assert report.solver == Solver.CHOLESKY
		np.testing.assert_allclose(report.weights, 0.125, rtol=1e-10)

	def test_indefinite_kernel_falls_back(self):
		# the min-image kernel of 8 equispaced points is indefinite at t = 1/64
		report = solve_weights_report(PointSet(T1, np.arange(8)[:, None] / 8), 1 / 64, TorusKernel.MIN_IMAGE)
		assert report.solver == Solver.SYMMETRIC
		np.testing.assert_allclose(report.weights, 0.125, rtol=1e-10)
		assert report.kkt_spread <= 1e-9

	def test_singular_failure(self, monkeypatch: pytest.MonkeyPatch):
		def failing(*args, **kwargs):
			raise np.linalg.LinAlgError("singular")

		monkeypatch.setattr(scipy.linalg, "cho_factor", failing)
		monkeypatch.setattr(scipy.linalg, "solve", failing)
		with pytest.raises(WeightSolveError):
			solve_weights(PointSet(T1, [[0.1], [0.6]]), 0.1)


class TestWeightSolution:
	def test_meta(self):
		report = solve_weights_report(PointSet(T1, np.arange(8)[:, None] / 8), 0.01)
		meta = report.as_meta()
		assert meta["weights_negative"] == "no"
		assert meta["weights_solver"] == "cholesky"
		assert float(meta["weights_min"]) == report.min_weight
		assert not report.negative
