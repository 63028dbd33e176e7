"""Tests for the annealer submodule."""

import math

import numpy as np
import pytest

from .annealer import *
from .constants import CONSTRAINT_TOL, TANGENT_TOL
from .energy import build_potential, EnergySpec
from .errors import AnnealError, ProjectionError, UsageError
from .geometry import constraint, constraint_grad, ManifoldSpec
from .pointset import PointSet
from .rng import particle_stream, ParticleNoise


T1 = ManifoldSpec.torus(1)
T2 = ManifoldSpec.torus(2)
S2 = ManifoldSpec.sphere()


def zero_grad(x):
	return np.zeros_like(x)


class TestCoolingSchedule:
	def test_start(self):
		assert cooling_schedule(2.5, 0.0) == 2.5

	def test_half(self):
		assert cooling_schedule(3.0, math.e - 1) == pytest.approx(1.5, rel=1e-15)

	def test_decreasing(self):
		values = [cooling_schedule(1.0, t) for t in np.linspace(0, 1e6, 50)]
		assert all(a > b for a, b in zip(values, values[1:]))
		assert values[-1] < 0.1

	def test_negative_time(self):
		with pytest.raises(UsageError):
			cooling_schedule(1.0, -1.0)


class TestAnnealConfig:
	@pytest.mark.parametrize("args", [
		dict(dt=0.0),
		dict(cool_C=-1.0),
		dict(steps=0),
		dict(gamma=0.0),
		dict(trace_every=0),
		dict(seed=-1),
		dict(seed=2**64),
	])
	def test_invalid(self, args):
		with pytest.raises(UsageError):
			AnnealConfig(**args)

	def test_resolve_defaults(self):
		cfg = AnnealConfig().resolve(T2, 89, initial_energy=-178.0)
		assert cfg.dt == pytest.approx(0.05 / math.sqrt(89), rel=1e-15)
		assert cfg.cool_C == pytest.approx(0.2, rel=1e-15)
		assert cfg.init == InitKind.HALTON

	def test_resolve_keeps_explicit(self):
		cfg = AnnealConfig(dt=0.01, cool_C=3.0, init=InitKind.FROM_FILE).resolve(S2, 10, initial_energy=1.0)
		assert (cfg.dt, cfg.cool_C, cfg.init) == (0.01, 3.0, InitKind.FROM_FILE)


class TestBaoabStep:
	def test_fixed_point(self):
		state = PhaseState(np.array([[0.25, 0.5]]), np.zeros((1, 2)))
		rng = np.random.default_rng(0)
		out = baoab_step(state, 0.1, 1.0, 0.0, zero_grad, rng, manifold=T2)
		assert np.array_equal(out.x, state.x)
		assert np.array_equal(out.p, state.p)

	def test_free_drift_wraps(self):
		state = PhaseState(np.array([[0.95]]), np.array([[1.0]]))
		out = baoab_step(state, 0.1, 1.0, 0.0, zero_grad, np.random.default_rng(0), manifold=T1)
		alpha = math.exp(-0.1)
		assert out.x[0, 0] == pytest.approx((0.95 + 0.05 + 0.05 * alpha) % 1.0, abs=1e-15)
		assert out.p[0, 0] == pytest.approx(alpha, rel=1e-15)

	def test_verlet_limit_conserves_energy(self):
		# harmonic potential U = x²/2 with friction switched off
		grad = lambda x: x
		state = PhaseState(np.array([[1.0]]), np.array([[0.0]]))
		rng = np.random.default_rng(0)
		dt = 0.01
		h0 = 0.5
		drift = 0.0
		for _ in range(2000):
			state = baoab_step(state, dt, 1e-300, 1.0, grad, rng)
			drift = max(drift, abs(0.5 * state.x[0, 0]**2 + 0.5 * state.p[0, 0]**2 - h0))
		assert drift <= dt**2

	def test_matches_velocity_verlet_without_friction(self):
		# U = ½ xᵀAx for every particle; γ = 0 and β⁻¹ = 0 reduce BAOAB to velocity Verlet
		A = np.array([[2.0, 0.3], [0.3, 1.0]])
		grad = lambda x: x @ A
		rng = np.random.default_rng(7)
		x, p = rng.standard_normal((3, 2)), rng.standard_normal((3, 2))
		state = PhaseState(x.copy(), p.copy())
		noise = ParticleNoise(7, 3)
		dt = 0.01
		for _ in range(1000):
			p_half = p - dt / 2 * grad(x)
			x = x + dt * p_half
			p = p_half - dt / 2 * grad(x)
			state = baoab_step(state, dt, 0.0, 0.0, grad, noise)
			np.testing.assert_allclose(state.x, x, rtol=0, atol=1e-12)
			np.testing.assert_allclose(state.p, p, rtol=0, atol=1e-12)

	def test_draws_one_normal_per_coordinate(self):
		state = PhaseState(np.random.default_rng(1).random((7, 2)), np.zeros((7, 2)))
		rng, reference = np.random.default_rng(42), np.random.default_rng(42)
		baoab_step(state, 0.01, 1.0, 0.5, zero_grad, rng, manifold=T2)
		reference.standard_normal((7, 2))
		assert rng.random() == reference.random()

	def test_non_finite_gradient(self):
		state = PhaseState(np.array([[0.5]]), np.zeros((1, 1)))
		with pytest.raises(AnnealError):
			baoab_step(state, 0.1, 1.0, 0.0, lambda x: np.full_like(x, np.nan), np.random.default_rng(0))


class TestProjections:
	def test_shake_on_surface_unchanged(self):
		x = np.array([[0.6, 0.0, 0.8]])
		np.testing.assert_allclose(shake_project(x, x, S2), x, atol=1e-15)

	def test_shake_radial(self):
		out = shake_project(np.array([[0.0, 0.0, 1.1]]), np.array([[0.0, 0.0, 1.0]]), S2)
		np.testing.assert_allclose(out, [[0, 0, 1]], atol=1e-10)

	def test_shake_non_convergence(self):
		with pytest.raises(ProjectionError):
			shake_project(np.array([[0.0, 0.0, 1.5]]), np.array([[0.0, 0.0, 1.0]]), S2, max_iter=0)

	def test_rattle_examples(self):
		pole = np.array([[0.0, 0.0, 1.0]])
		np.testing.assert_allclose(rattle_project(np.array([[0.0, 0.0, 5.0]]), pole, S2), [[0, 0, 0]], atol=1e-15)
		np.testing.assert_allclose(rattle_project(np.array([[1.0, 2.0, 3.0]]), pole, S2), [[1, 2, 0]], atol=1e-15)
		assert np.array_equal(rattle_project(np.array([[1.0, 2.0, 0.0]]), pole, S2), [[1, 2, 0]])

	def test_rattle_singular(self):
		with pytest.raises(ProjectionError):
			rattle_project(np.array([[1.0, 0.0, 0.0]]), np.zeros((1, 3)), S2)


class TestGbaoabStep:
	def test_fixed_point(self):
		state = PhaseState(np.array([[0.0, 0.0, 1.0]]), np.zeros((1, 3)))
		out = gbaoab_step(state, 0.1, 1.0, 0.0, zero_grad, S2, np.random.default_rng(0))
		np.testing.assert_allclose(out.x, state.x, atol=1e-15)
		np.testing.assert_allclose(out.p, 0, atol=1e-15)

	@pytest.mark.parametrize("m", [S2, ManifoldSpec.dented_sphere(0.1)])
	def test_stays_on_surface(self, m: ManifoldSpec):
		x = initial_configuration(m, 12, AnnealConfig())
		state = PhaseState(x, np.zeros_like(x))
		rng = np.random.default_rng(3)
		for _ in range(50):
			state = gbaoab_step(state, 0.02, 1.0, 0.5, zero_grad, m, rng)
		assert np.max(np.abs(constraint(m, state.x))) <= CONSTRAINT_TOL
		normals = constraint_grad(m, state.x)
		assert np.max(np.abs(np.einsum("ij,ij->i", normals, state.p))) <= TANGENT_TOL * np.max(np.linalg.norm(normals, axis=1))

	def test_long_run_with_gaussian_energy(self):
		potential = build_potential(S2, EnergySpec.gaussian(0.1))
		x = initial_configuration(S2, 12, AnnealConfig())
		state = PhaseState(x, np.zeros_like(x))
		noise = ParticleNoise(11, 12)
		residual = tangency = 0.0
		for _ in range(10_000):
			state = gbaoab_step(state, 0.01, 1.0, 0.01, potential.grad, S2, noise)
			residual = max(residual, float(np.max(np.abs(constraint(S2, state.x)))))
			normals = constraint_grad(S2, state.x)
			cos = np.abs(np.einsum("ij,ij->i", normals, state.p)) / np.linalg.norm(normals, axis=1)
			tangency = max(tangency, float(np.max(cos)))
		assert residual <= CONSTRAINT_TOL
		assert tangency <= TANGENT_TOL


class TestInitialConfiguration:
	def test_defaults(self):
		assert initial_configuration(T2, 5, AnnealConfig()).shape == (5, 2)
		hyper = ManifoldSpec.hyperboloid(0.8)
		x = initial_configuration(hyper, 40, AnnealConfig(seed=3))
		assert np.max(np.abs(constraint(hyper, x))) <= 1e-8
		assert np.max(x[:, 2]) <= hyper.wall_threshold

	def test_disk_lift_is_seeded(self):
		hyper = ManifoldSpec.hyperboloid(0.8)
		a = initial_configuration(hyper, 10, AnnealConfig(seed=1))
		b = initial_configuration(hyper, 10, AnnealConfig(seed=1))
		c = initial_configuration(hyper, 10, AnnealConfig(seed=2))
		assert np.array_equal(a, b)
		assert not np.array_equal(a, c)

	def test_mismatched_init(self):
		with pytest.raises(UsageError):
			initial_configuration(S2, 5, AnnealConfig(init=InitKind.HALTON))

	def test_from_file(self):
		initial = PointSet(T1, [[0.1], [0.2]])
		cfg = AnnealConfig(init=InitKind.FROM_FILE)
		assert np.array_equal(initial_configuration(T1, 2, cfg, initial), [[0.1], [0.2]])
		with pytest.raises(UsageError):
			initial_configuration(T1, 3, cfg, initial)
		with pytest.raises(UsageError):
			initial_configuration(T1, 2, cfg, None)
		with pytest.raises(UsageError):
			initial_configuration(T2, 2, cfg, initial)


class TestAnneal:
	def test_too_few_points(self):
		with pytest.raises(UsageError):
			anneal(T2, 1, EnergySpec.gaussian(0.1), AnnealConfig(steps=10))

	def test_deterministic(self):
		cfg = AnnealConfig(steps=300, seed=11)
		a = anneal(S2, 10, EnergySpec.gaussian(0.1), cfg)
		b = anneal(S2, 10, EnergySpec.gaussian(0.1), cfg)
		assert np.array_equal(a.best.points, b.best.points)
		assert a.best_energy == b.best_energy
		assert a.trace == b.trace
		assert a.best.meta == b.best.meta

	def test_seed_changes_trajectory(self):
		a = anneal(T2, 8, EnergySpec.gaussian(0.1), AnnealConfig(steps=200, seed=1))
		b = anneal(T2, 8, EnergySpec.gaussian(0.1), AnnealConfig(steps=200, seed=2))
		assert a.trace[0] == b.trace[0]
		assert a.trace[-1].energy != b.trace[-1].energy

	def test_trace_schedule(self):
		records = list()
		result = anneal(T2, 6, EnergySpec.gaussian(0.1), AnnealConfig(steps=250, trace_every=100),
			on_record=lambda step, energy: records.append(step))
		assert [tp.step for tp in result.trace] == [0, 100, 200, 250]
		assert records == [100, 200, 250]
		assert result.best_energy == min(tp.energy for tp in result.trace)
		assert result.best.meta["best_step"] == str(result.accepted_step)
		assert result.settle >= 0

	def test_spreads_clustered_start(self):
		rng = np.random.default_rng(4)
		initial = PointSet(T2, 0.4 + 0.1 * rng.random((16, 2)))
		result = anneal(T2, 16, EnergySpec.gaussian(0.01), AnnealConfig(steps=2000, init=InitKind.FROM_FILE), initial)
		assert result.best_energy < 0.5 * result.trace[0].energy
		assert np.all((result.best.points >= 0) & (result.best.points < 1))

	def test_riesz_on_sphere(self):
		result = anneal(S2, 12, EnergySpec.riesz(2.0), AnnealConfig(steps=400))
		assert np.max(np.abs(constraint(S2, result.best.points))) <= 1e-8
		assert result.best.meta["energy"] == "riesz"

	def test_hyperboloid_wall(self):
		hyper = ManifoldSpec.hyperboloid(0.8)
		result = anneal(hyper, 20, EnergySpec.gaussian(0.05), AnnealConfig(steps=300, seed=5))
		assert np.max(np.abs(constraint(hyper, result.best.points))) <= 1e-8

	def test_meta_records_resolved_config(self):
		result = anneal(T2, 9, EnergySpec.gaussian(1 / 9), AnnealConfig(steps=50, seed=7))
		meta = result.best.meta
		assert float(meta["dt"]) == result.config.dt
		assert float(meta["cool_C"]) == result.config.cool_C
		assert meta["init"] == "halton"
		assert meta["seed"] == "7"


def test_trace_csv():
	result = anneal(T2, 4, EnergySpec.gaussian(0.25), AnnealConfig(steps=20, trace_every=10))
	lines = trace_csv(result).splitlines()
	assert lines[0] == "step,time,beta_inv,energy"
	assert len(lines) == 4
	assert lines[1].startswith("0,0.0,")
