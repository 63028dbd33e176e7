"""Underdamped Langevin simulated annealing (BAOAB on the torus, constrained g-BAOAB on surfaces)."""

from __future__ import annotations

from typing import Callable

import csv
import enum
import io
import math

import attrs
import numpy as np

from hkqtk import baselines
from hkqtk.constants import CONSTRAINT_TOL
from hkqtk.energy import build_potential, EnergySpec
from hkqtk.errors import AnnealError, ProjectionError, UsageError
from hkqtk.geometry import (constraint, constraint_grad, dented_sphere_lift, disk_to_hyperboloid, FloatArray, ManifoldKind,
                            ManifoldSpec, wrap_torus)
from hkqtk.pointset import format_float, PointSet
from hkqtk.rng import INIT_STREAM, NormalSource, ParticleNoise, substream


GradFn = Callable[[FloatArray], FloatArray]

SHAKE_TOL = 1e-10
SHAKE_MAX_ITER = 50

# fraction of the run over which the settle diagnostic is measured
SETTLE_WINDOW = 0.1


class InitKind(enum.Enum):
	"""How the initial configuration is produced."""
	HALTON = "halton"
	SPHERICAL_FIBONACCI = "spherical-fibonacci"
	DENTED_LIFT = "dented-lift"
	DISK_UNIFORM_LIFT = "disk-uniform-lift"
	FROM_FILE = "from-file"


DEFAULT_INIT = {
	ManifoldKind.TORUS: InitKind.HALTON,
	ManifoldKind.SPHERE: InitKind.SPHERICAL_FIBONACCI,
	ManifoldKind.DENTED_SPHERE: InitKind.DENTED_LIFT,
	ManifoldKind.COMPACT_HYPERBOLOID: InitKind.DISK_UNIFORM_LIFT,
}


def _optional_positive(_inst, attribute: attrs.Attribute, value: float | None):
	if value is not None and not value > 0:
		raise UsageError(f"{attribute.name} must be positive, got {value}")


@attrs.define(frozen=True)
class AnnealConfig:
	"""Annealing parameters; `None` entries are resolved from the problem size by `resolve`."""

	# step size Δt (default 0.05·N^(-1/d))
	dt: float | None = attrs.field(default=None, validator=_optional_positive)
	steps: int = 200_000
	# friction γ
	gamma: float = 1.0
	# cooling constant C (default: 0.1 × initial energy per particle)
	cool_C: float | None = attrs.field(default=None, validator=_optional_positive)
	seed: int = 0
	# energy-recording stride
	trace_every: int = 100
	init: InitKind | None = None

	def __attrs_post_init__(self):
		if self.steps < 1:
			raise UsageError(f"steps must be at least 1, got {self.steps}")
		if not self.gamma > 0:
			raise UsageError(f"gamma must be positive, got {self.gamma}")
		if self.trace_every < 1:
			raise UsageError(f"trace_every must be at least 1, got {self.trace_every}")
		if not 0 <= self.seed < 2**64:
			raise UsageError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

	def resolve(self, m: ManifoldSpec, n: int, initial_energy: float) -> AnnealConfig:
		"""Fill in problem-dependent defaults."""
		return attrs.evolve(
			self,
			dt = self.dt if self.dt is not None else 0.05 * n ** (-1.0 / m.dim),
			cool_C = self.cool_C if self.cool_C is not None else 0.1 * abs(initial_energy) / n,
			init = self.init if self.init is not None else DEFAULT_INIT[m.kind],
		)


@attrs.define(frozen=True)
class TracePoint:
	step: int
	time: float
	beta_inv: float
	energy: float


@attrs.define(eq=False)
class PhaseState:
	"""Positions and momenta (both N×dim); `grad` caches ∇U at `x` between steps."""
	x: FloatArray
	p: FloatArray
	grad: FloatArray | None = None


@attrs.define(eq=False)
class AnnealResult:
	best: PointSet
	best_energy: float
	trace: list[TracePoint]
	# step at which `best` was recorded
	accepted_step: int
	# relative energy change over the last tenth of the run
	settle: float
	config: AnnealConfig


def cooling_schedule(C: float, time: float) -> float:
	"""Inverse temperature β⁻¹(t) = C / (1 + log(1 + t)), well defined from t = 0."""
	if time < 0:
		raise UsageError(f"time must be non-negative, got {time}")
	return C / (1 + math.log1p(time))


def _checked_grad(grad_fn: GradFn, x: FloatArray) -> FloatArray:
	g = grad_fn(x)
	if not np.all(np.isfinite(g)):
		bad = np.argwhere(~np.isfinite(g))[0][0]
		raise AnnealError(f"Non-finite energy gradient at particle {bad}; try a smaller dt")
	return g


def baoab_step(
	state: PhaseState,
	dt: float,
	gamma: float,
	beta_inv: float,
	grad_fn: GradFn,
	rng: NormalSource,
	manifold: ManifoldSpec | None = None,
) -> PhaseState:
	"""One BAOAB step of underdamped Langevin dynamics.

	Positions are re-wrapped into [0,1)^d after each drift when `manifold` is a torus.
	One standard normal is drawn per coordinate per step, as a single (N, dim) request to `rng`.
	"""

	wrap = manifold is not None and manifold.kind == ManifoldKind.TORUS
	h = dt / 2

	g = state.grad if state.grad is not None else _checked_grad(grad_fn, state.x)

	# B
	p = state.p - h * g
	# A
	x = state.x + h * p
	if wrap:
		x = wrap_torus(x)
	# O
	alpha = math.exp(-dt * gamma)
	noise = rng.standard_normal(p.shape)
	p = alpha * p + math.sqrt((1 - alpha**2) * beta_inv) * noise
	# A
	x = x + h * p
	if wrap:
		x = wrap_torus(x)
	# B
	g = _checked_grad(grad_fn, x)
	p = p - h * g

	return PhaseState(x, p, g)


def shake_project(
	x_new: FloatArray,
	x_ref: FloatArray,
	m: ManifoldSpec,
	tol: float = SHAKE_TOL,
	max_iter: int = SHAKE_MAX_ITER,
) -> FloatArray:
	"""Project drift proposals back onto the surface along the reference normals.

	Solves g(x_new_i + λ_i ∇g(x_ref_i)) = 0 for every particle by Newton iteration.

	Raises:
		ProjectionError: If the residual does not drop below `tol` within `max_iter` iterations.
	"""

	xn = np.atleast_2d(np.asarray(x_new, dtype=np.float64))
	normals = np.atleast_2d(constraint_grad(m, x_ref))
	lam = np.zeros(xn.shape[0])

	for iteration in range(max_iter + 1):
		y = xn + lam[:, None] * normals
		g = constraint(m, y)
		if np.max(np.abs(g)) <= tol:
			return y.reshape(np.shape(x_new))
		if iteration == max_iter:
			break
		slope = np.einsum("ij,ij->i", constraint_grad(m, y), normals)
		if np.any(np.abs(slope) < 1e-300):
			raise ProjectionError("Constraint projection hit a singular normal direction; reduce the step size dt")
		lam -= g / slope

	raise ProjectionError(f"Constraint projection did not converge in {max_iter} iterations "
		f"(max |g| = {np.max(np.abs(g)):.3g}); reduce the step size dt")


def rattle_project(p: FloatArray, x: FloatArray, m: ManifoldSpec) -> FloatArray:
	"""Remove the normal component of each particle's momentum."""
	pa = np.atleast_2d(np.asarray(p, dtype=np.float64))
	normals = np.atleast_2d(constraint_grad(m, x))
	nn = np.einsum("ij,ij->i", normals, normals)
	if np.any(nn <= np.finfo(np.float64).tiny):
		raise ProjectionError("Constraint gradient vanishes (singular surface point)")
	coef = np.einsum("ij,ij->i", normals, pa) / nn
	return (pa - coef[:, None] * normals).reshape(np.shape(p))


def _constrained_drift(x: FloatArray, p: FloatArray, h: float, m: ManifoldSpec) -> tuple[FloatArray, FloatArray]:
	x_new = shake_project(x + h * p, x, m)
	# momentum consistent with the constrained displacement
	p_new = (x_new - x) / h
	return x_new, rattle_project(p_new, x_new, m)


def gbaoab_step(
	state: PhaseState,
	dt: float,
	gamma: float,
	beta_inv: float,
	grad_fn: GradFn,
	m: ManifoldSpec,
	rng: NormalSource,
) -> PhaseState:
	"""One constrained BAOAB step keeping every particle on the surface g = 0 with tangent momentum."""

	h = dt / 2
	x = state.x
	g = state.grad if state.grad is not None else _checked_grad(grad_fn, x)

	# B
	p = rattle_project(state.p - h * g, x, m)
	# A
	x, p = _constrained_drift(x, p, h, m)
	# O
	alpha = math.exp(-dt * gamma)
	noise = rng.standard_normal(p.shape)
	p = rattle_project(alpha * p + math.sqrt((1 - alpha**2) * beta_inv) * noise, x, m)
	# A
	x, p = _constrained_drift(x, p, h, m)
	# B
	g = _checked_grad(grad_fn, x)
	p = rattle_project(p - h * g, x, m)

	return PhaseState(x, p, g)


def initial_configuration(m: ManifoldSpec, n: int, cfg: AnnealConfig, initial: PointSet | None = None) -> FloatArray:
	"""Produce the starting positions prescribed by `cfg.init` (or the manifold default)."""

	init = cfg.init if cfg.init is not None else DEFAULT_INIT[m.kind]

	allowed = {
		InitKind.HALTON: ManifoldKind.TORUS,
		InitKind.SPHERICAL_FIBONACCI: ManifoldKind.SPHERE,
		InitKind.DENTED_LIFT: ManifoldKind.DENTED_SPHERE,
		InitKind.DISK_UNIFORM_LIFT: ManifoldKind.COMPACT_HYPERBOLOID,
	}
	if init in allowed and allowed[init] != m.kind:
		raise UsageError(f"Initializer {init.value!r} cannot be used on the {m.kind.value} manifold")

	match init:
		case InitKind.HALTON:
			return baselines.halton(n, m.dim).points
		case InitKind.SPHERICAL_FIBONACCI:
			return baselines.spherical_fibonacci(n).points
		case InitKind.DENTED_LIFT:
			return dented_sphere_lift(baselines.spherical_fibonacci(n).points, m.alpha)  # type: ignore[arg-type]
		case InitKind.DISK_UNIFORM_LIFT:
			rng = substream(cfg.seed, INIT_STREAM)
			radius = m.r * np.sqrt(rng.random(n))  # type: ignore[operator]
			angle = 2 * np.pi * rng.random(n)
			return disk_to_hyperboloid(np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1))
		case InitKind.FROM_FILE:
			if initial is None:
				raise UsageError("Initializer 'from-file' requires an initial point set")
			if initial.manifold != m:
				raise UsageError(f"Initial point set lives on {initial.manifold}, expected {m}")
			if initial.n != n:
				raise UsageError(f"Initial point set has {initial.n} points, expected {n}")
			return initial.points.copy()

	raise UsageError(f"Unknown initializer {init!r}")


def _settle(trace: list[TracePoint], steps: int) -> float:
	window = [tp for tp in trace if tp.step >= (1 - SETTLE_WINDOW) * steps]
	if len(window) < 2:
		window = trace[-2:]
	first, last = window[0].energy, window[-1].energy
	if last == 0:
		return abs(last - first)
	return abs(last - first) / abs(last)


def anneal(
	m: ManifoldSpec,
	n: int,
	espec: EnergySpec,
	cfg: AnnealConfig,
	initial: PointSet | None = None,
	on_record: Callable[[int, float], None] | None = None,
) -> AnnealResult:
	"""Minimize an interaction energy over N-point configurations by Langevin simulated annealing.

	The run is fully determined by its arguments: identical inputs give bit-identical results.

	Args:
		m: The manifold to place points on.
		n: Number of points (at least 2).
		espec: The energy to minimize (the hyperboloid wall is added automatically).
		cfg: Annealing parameters; unset entries are resolved from the problem size.
		initial: Starting configuration for the `from-file` initializer.
		on_record: Called as `on_record(step, energy)` every time an energy is recorded.

	Returns:
		The lowest-energy recorded configuration, the energy trace and the resolved config.
	"""

	if n < 2:
		raise UsageError(f"Annealing needs at least 2 points, got {n}")

	potential = build_potential(m, espec)
	x0 = initial_configuration(m, n, cfg, initial)
	e0 = potential.energy(x0)
	cfg = cfg.resolve(m, n, e0)
	assert cfg.dt is not None and cfg.cool_C is not None

	rng = ParticleNoise(cfg.seed, n)
	state = PhaseState(x0, np.zeros_like(x0))

	trace = [TracePoint(0, 0.0, cooling_schedule(cfg.cool_C, 0.0), e0)]
	best_x, best_energy, best_step = x0.copy(), e0, 0

	for k in range(cfg.steps):
		beta_inv = cooling_schedule(cfg.cool_C, cfg.dt * k)
		if m.kind == ManifoldKind.TORUS:
			state = baoab_step(state, cfg.dt, cfg.gamma, beta_inv, potential.grad, rng, manifold=m)
		else:
			state = gbaoab_step(state, cfg.dt, cfg.gamma, beta_inv, potential.grad, m, rng)

		done = k + 1
		if done % cfg.trace_every != 0 and done != cfg.steps:
			continue

		energy = potential.energy(state.x)
		if not math.isfinite(energy):
			raise AnnealError(f"Energy became non-finite at step {done}; try a smaller dt")
		trace.append(TracePoint(done, cfg.dt * done, cooling_schedule(cfg.cool_C, cfg.dt * done), energy))

		if energy < best_energy:
			best_x, best_energy, best_step = state.x.copy(), energy, done

		if on_record is not None:
			on_record(done, energy)

	# surfaces: leave no residual above the point-set tolerance
	if m.is_embedded and np.max(np.abs(constraint(m, best_x))) > CONSTRAINT_TOL:
		raise ProjectionError("Best configuration drifted off the surface")

	meta = {
		**espec.as_meta(),
		"seed": str(cfg.seed),
		"dt": format_float(cfg.dt),
		"steps": str(cfg.steps),
		"gamma": format_float(cfg.gamma),
		"cool_C": format_float(cfg.cool_C),
		"trace_every": str(cfg.trace_every),
		"init": cfg.init.value,  # type: ignore[union-attr]
		"best_step": str(best_step),
		"best_energy": format_float(best_energy),
	}
	settle = _settle(trace, cfg.steps)
	meta["settle"] = format_float(settle)

	return AnnealResult(
		best = PointSet(m, best_x, None, meta),
		best_energy = best_energy,
		trace = trace,
		accepted_step = best_step,
		settle = settle,
		config = cfg,
	)


def trace_csv(result: AnnealResult) -> str:
	"""Render the energy trace as CSV (`step,time,beta_inv,energy`)."""
	buf = io.StringIO()
	writer = csv.writer(buf, lineterminator="\n")
	writer.writerow(["step", "time", "beta_inv", "energy"])
	for tp in result.trace:
		writer.writerow([tp.step, format_float(tp.time), format_float(tp.beta_inv), format_float(tp.energy)])
	return buf.getvalue()
