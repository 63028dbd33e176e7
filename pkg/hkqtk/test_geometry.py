"""Tests for the geometry submodule."""

from hypothesis import given
from hypothesis import strategies as st
import numpy as np
import pytest

from .geometry import *


def random_surface_points(m: ManifoldSpec, n: int, seed: int) -> FloatArray:
	rng = np.random.default_rng(seed)
	normals = rng.standard_normal((n, 3))
	sphere = normals / np.linalg.norm(normals, axis=1, keepdims=True)
	match m.kind:
		case ManifoldKind.SPHERE:
			return sphere
		case ManifoldKind.DENTED_SPHERE:
			return dented_sphere_lift(sphere, m.alpha)
		case _:
			radius = m.r * np.sqrt(rng.random(n))
			angle = 2 * np.pi * rng.random(n)
			return disk_to_hyperboloid(np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1))


SURFACES = [ManifoldSpec.sphere(), ManifoldSpec.dented_sphere(0.1), ManifoldSpec.hyperboloid(0.8)]

coordinate = st.floats(min_value=0, max_value=1, exclude_max=True, allow_nan=False)


class TestManifoldSpec:
	def test_valid(self):
		assert ManifoldSpec.torus(3).ambient_dim == 3
		assert ManifoldSpec.sphere().ambient_dim == 3
		assert ManifoldSpec.hyperboloid(0.8).is_embedded
		assert not ManifoldSpec.torus(2).is_embedded

	@pytest.mark.parametrize("args", [
		dict(kind=ManifoldKind.TORUS, dim=0),
		dict(kind=ManifoldKind.SPHERE, dim=3),
		dict(kind=ManifoldKind.DENTED_SPHERE),
		dict(kind=ManifoldKind.DENTED_SPHERE, alpha=-1.0),
		dict(kind=ManifoldKind.COMPACT_HYPERBOLOID, r=1.0),
		dict(kind=ManifoldKind.COMPACT_HYPERBOLOID, r=0.0),
		dict(kind=ManifoldKind.SPHERE, alpha=0.1),
		dict(kind=ManifoldKind.TORUS, r=0.5),
	])
	def test_invalid(self, args):
		with pytest.raises(GeometryError):
			ManifoldSpec(**args)

	def test_wall_threshold(self):
		assert ManifoldSpec.hyperboloid(0.8).wall_threshold == pytest.approx(41 / 9, rel=1e-15)
		with pytest.raises(GeometryError):
			ManifoldSpec.sphere().wall_threshold

	@pytest.mark.parametrize("m", [ManifoldSpec.torus(3), *SURFACES])
	def test_meta_roundtrip(self, m: ManifoldSpec):
		assert ManifoldSpec.from_meta(m.as_meta()) == m

	def test_meta_missing_kind(self):
		with pytest.raises(GeometryError):
			ManifoldSpec.from_meta({"d": "2"})


class TestTorusDistance:
	def test_wraparound(self):
		assert torus_distance(0.1, 0.9, 1) == pytest.approx(0.2, abs=1e-15)

	def test_corner(self):
		assert torus_distance([0, 0], [0.5, 0.5], 2) == pytest.approx(np.sqrt(0.5), abs=1e-15)

	def test_identity(self):
		assert torus_distance([0.3, 0.7], [0.3, 0.7]) == 0

	def test_dimension_mismatch(self):
		with pytest.raises(GeometryError):
			torus_distance([0.1, 0.2], [0.1, 0.2, 0.3])
		with pytest.raises(GeometryError):
			torus_distance([0.1, 0.2], [0.1, 0.2], d=3)

	@given(st.lists(coordinate, min_size=9, max_size=9))
	def test_metric(self, values: list[float]):
		x, y, z = np.array(values[0:3]), np.array(values[3:6]), np.array(values[6:9])
		assert torus_distance(x, y) == pytest.approx(torus_distance(y, x), abs=1e-15)
		assert torus_distance(x, z) <= torus_distance(x, y) + torus_distance(y, z) + 1e-12

	@pytest.mark.parametrize("d", [1, 2, 3])
	def test_displacement_norm_matches_distance(self, d: int):
		rng = np.random.default_rng(d)
		x, y = rng.random((1000, d)), rng.random((1000, d))
		delta = min_image_displacement(x, y)
		assert np.all(np.abs(delta) <= 0.5)
		for i in range(0, 1000, 37):
			assert np.linalg.norm(delta[i]) == pytest.approx(torus_distance(x[i], y[i]), abs=1e-15)


class TestMinImageDisplacement:
	def test_direction(self):
		assert min_image_displacement(0.1, 0.9)[0] == pytest.approx(0.2, abs=1e-15)
		assert min_image_displacement(0.9, 0.1)[0] == pytest.approx(-0.2, abs=1e-15)

	def test_identity(self):
		assert np.all(min_image_displacement([0.4, 0.2], [0.4, 0.2]) == 0)


class TestAmbientDistance:
	def test_examples(self):
		assert ambient_distance([0, 0, 1], [0, 0, -1]) == 2
		assert ambient_distance([1, 0, 0], [1, 0, 0]) == 0
		assert ambient_distance([1, 0, 0], [0, 1, 0]) == pytest.approx(np.sqrt(2), abs=1e-15)

	def test_mismatch(self):
		with pytest.raises(GeometryError):
			ambient_distance([1, 0, 0], [1, 0])


class TestWrapTorus:
	def test_range(self):
		wrapped = wrap_torus(np.array([-1e-17, 1.0, 2.25, -0.75]))
		assert np.all((wrapped >= 0) & (wrapped < 1))
		assert wrapped[2] == 0.25
		assert wrapped[3] == 0.25


class TestConstraint:
	def test_examples(self):
		sphere, hyper = ManifoldSpec.sphere(), ManifoldSpec.hyperboloid(0.8)
		assert constraint(sphere, [1, 0, 0]) == 0
		assert constraint(sphere, [2, 0, 0]) == 3
		assert constraint(hyper, [0, 0, 1]) == 0

	def test_torus_rejected(self):
		with pytest.raises(GeometryError):
			constraint(ManifoldSpec.torus(2), [0.1, 0.2])
		with pytest.raises(GeometryError):
			constraint_grad(ManifoldSpec.torus(2), [0.1, 0.2])

	def test_grad_examples(self):
		assert np.array_equal(constraint_grad(ManifoldSpec.sphere(), [0, 0, 1]), [0, 0, 2])
		assert np.array_equal(constraint_grad(ManifoldSpec.hyperboloid(0.8), [0, 0, 1]), [0, 0, -2])
		assert constraint_grad(ManifoldSpec.dented_sphere(0.1), [0, 0.3, 0])[1] == pytest.approx(6.0, rel=1e-14)

	@pytest.mark.parametrize("m", SURFACES)
	def test_grad_finite_differences(self, m: ManifoldSpec):
		h = 1e-5
		points = random_surface_points(m, 100, seed=3)
		analytic = constraint_grad(m, points)
		numeric = np.zeros_like(points)
		for k in range(3):
			step = np.zeros(3)
			step[k] = h
			numeric[:, k] = (constraint(m, points + step) - constraint(m, points - step)) / (2 * h)
		scale = np.linalg.norm(analytic, axis=1)
		assert np.all(np.linalg.norm(analytic - numeric, axis=1) <= 1e-6 * scale)

	def test_vectorized_matches_scalar(self):
		m = ManifoldSpec.dented_sphere(0.1)
		points = random_surface_points(m, 5, seed=1) * 1.1
		batch = constraint(m, points)
		for i in range(5):
			assert batch[i] == constraint(m, points[i])


class TestHyperboloidMaps:
	def test_apex(self):
		assert np.array_equal(hyperboloid_to_disk([0, 0, 1]), [0, 0])
		assert np.array_equal(disk_to_hyperboloid([0, 0]), [0, 0, 1])

	def test_projection_example(self):
		root = np.sqrt(26)
		np.testing.assert_allclose(hyperboloid_to_disk([3, 4, root]), [3 / (1 + root), 4 / (1 + root)], rtol=1e-15)

	def test_wall_maps_to_disk_radius(self):
		c = 41 / 9
		rho = np.sqrt(c * c - 1)
		for angle in np.linspace(0, 2 * np.pi, 7):
			u = hyperboloid_to_disk([rho * np.cos(angle), rho * np.sin(angle), c])
			assert np.linalg.norm(u) == pytest.approx(0.8, abs=1e-12)

	def test_lift_example(self):
		np.testing.assert_allclose(disk_to_hyperboloid([0.8, 0]), [40 / 9, 0, 41 / 9], rtol=1e-14)

	def test_roundtrip(self):
		rng = np.random.default_rng(11)
		radius = 0.8 * np.sqrt(rng.random(500))
		angle = 2 * np.pi * rng.random(500)
		u = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)
		np.testing.assert_allclose(hyperboloid_to_disk(disk_to_hyperboloid(u)), u, atol=1e-12)

	def test_domain_errors(self):
		with pytest.raises(GeometryError):
			hyperboloid_to_disk([0, 0, -1])
		with pytest.raises(GeometryError):
			disk_to_hyperboloid([0.6, 0.8])


class TestDentedLift:
	def test_pole_fixed(self):
		assert np.array_equal(dented_sphere_lift([0, 0, 1], 0.1), [0, 0, 1])

	def test_equator_example(self):
		np.testing.assert_allclose(dented_sphere_lift([0, 1, 0], 0.1), [0, np.sqrt(0.1), 0], rtol=1e-15)

	def test_sign_preserved(self):
		assert dented_sphere_lift([0.6, -0.8, 0], 0.1)[1] < 0

	def test_lands_on_surface(self):
		m = ManifoldSpec.dented_sphere(0.1)
		points = random_surface_points(m, 1000, seed=5)
		assert np.max(np.abs(constraint(m, points))) <= 1e-12


class TestPairwise:
	def test_torus_min_image(self):
		m = ManifoldSpec.torus(1)
		diff = pairwise_displacements(m, np.array([[0.05], [0.95], [0.5]]))
		assert diff[0, 1, 0] == pytest.approx(0.1, abs=1e-15)
		assert diff[1, 0, 0] == pytest.approx(-0.1, abs=1e-15)
		assert diff[0, 2, 0] == pytest.approx(-0.45, abs=1e-15)
		assert np.all(diff[np.arange(3), np.arange(3)] == 0)

	def test_chordal(self):
		diff = pairwise_displacements(ManifoldSpec.sphere(), np.array([[0, 0, 1.0], [0, 0, -1.0]]))
		np.testing.assert_array_equal(diff[0, 1], [0, 0, 2])


def test_vol_normalizer():
	assert vol_normalizer(ManifoldSpec.torus(2)) == 1
	assert vol_normalizer(ManifoldSpec.sphere()) == 1
	assert vol_normalizer(ManifoldSpec.hyperboloid(0.8)) == 1
