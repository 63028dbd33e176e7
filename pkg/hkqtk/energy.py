"""Interaction energies (Gaussian heat-kernel surrogate and Riesz), their gradients and the hyperboloid wall."""

from __future__ import annotations

import enum
import math

import attrs
import numpy as np
from numpy.typing import ArrayLike

from hkqtk.errors import EnergyError
from hkqtk.geometry import FloatArray, ManifoldKind, ManifoldSpec, pairwise_displacements
from hkqtk.pointset import PointSet


DEFAULT_WALL_KAPPA = 1e4
DEFAULT_WALL_EXPONENT = 4.0

# relative size of the first periodic image left out of the wrapped torus kernel
IMAGE_CUTOFF = 1e-17


class EnergyKind(enum.Enum):
	GAUSSIAN = "gaussian"
	RIESZ = "riesz"


class TorusKernel(enum.Enum):
	"""How the Gaussian kernel treats the periodicity of the torus."""
	# Σ_n exp(-|δ+n|²/4t) over integer image shifts n; positive definite for distinct points
	WRAPPED = "wrapped"
	# exp(-d(x,y)²/4t) with the minimum-image distance; indefinite once t is wide against the half period
	MIN_IMAGE = "min-image"


@attrs.define(frozen=True)
class WallPenalty:
	"""Soft wall κ(x₃ - c)^α keeping hyperboloid points below the height c."""

	c: float
	kappa: float = DEFAULT_WALL_KAPPA
	alpha_exp: float = DEFAULT_WALL_EXPONENT

	def __attrs_post_init__(self):
		if not self.kappa > 0:
			raise EnergyError(f"Wall stiffness kappa must be positive, got {self.kappa}")
		if not self.alpha_exp > 1:
			raise EnergyError(f"Wall exponent must exceed 1, got {self.alpha_exp}")

	@classmethod
	def for_manifold(cls, m: ManifoldSpec, kappa: float = DEFAULT_WALL_KAPPA, alpha_exp: float = DEFAULT_WALL_EXPONENT) -> WallPenalty:
		return cls(m.wall_threshold, kappa, alpha_exp)


@attrs.define(frozen=True)
class EnergySpec:
	"""Which interaction energy to minimize."""

	kind: EnergyKind
	# Gaussian bandwidth (squared-distance units)
	t: float | None = None
	# Riesz exponent
	s: float | None = None
	wall: WallPenalty | None = None
	# only consulted for the Gaussian energy on the torus
	torus_kernel: TorusKernel = TorusKernel.WRAPPED

	def __attrs_post_init__(self):
		if self.kind == EnergyKind.GAUSSIAN and (self.t is None or not self.t > 0):
			raise EnergyError(f"Gaussian energy requires a bandwidth t > 0, got {self.t}")
		if self.kind == EnergyKind.RIESZ and (self.s is None or not self.s > 0):
			raise EnergyError(f"Riesz energy requires an exponent s > 0, got {self.s}")

	@classmethod
	def gaussian(cls, t: float, wall: WallPenalty | None = None, torus_kernel: TorusKernel = TorusKernel.WRAPPED) -> EnergySpec:
		return cls(EnergyKind.GAUSSIAN, t=t, wall=wall, torus_kernel=torus_kernel)

	@classmethod
	def riesz(cls, s: float, wall: WallPenalty | None = None) -> EnergySpec:
		return cls(EnergyKind.RIESZ, s=s, wall=wall)

	def as_meta(self) -> dict[str, str]:
		meta = {"energy": self.kind.value}
		if self.t is not None:
			meta["t"] = repr(float(self.t))
			meta["torus_kernel"] = self.torus_kernel.value
		if self.s is not None:
			meta["s"] = repr(float(self.s))
		if self.wall is not None:
			meta["wall_kappa"] = repr(float(self.wall.kappa))
			meta["wall_alpha"] = repr(float(self.wall.alpha_exp))
		return meta


def default_bandwidth(n: int, d: int, theta: float = 1.0) -> float:
	"""Bandwidth θ·N^(-2/d), resolving roughly the first N Laplacian eigenfunctions."""
	if n < 1 or d < 1:
		raise EnergyError(f"Bandwidth needs N >= 1 and d >= 1, got N={n}, d={d}")
	if not theta > 0:
		raise EnergyError(f"Bandwidth constant theta must be positive, got {theta}")
	return theta * n ** (-2.0 / d)


def gaussian_kernel(sq_dist: FloatArray, t: float) -> FloatArray:
	return np.exp(-sq_dist / (4 * t))


def image_count(t: float) -> int:
	"""Largest image shift M per axis kept by the wrapped kernel at bandwidth t."""
	# displacements lie in [-1/2, 1/2], so every image left out is at distance >= M + 1/2
	return max(0, math.ceil(math.sqrt(-4 * t * math.log(IMAGE_CUTOFF)) - 0.5))


def wrapped_axis_sums(diff: FloatArray, t: float) -> tuple[FloatArray, FloatArray]:
	"""Per-axis image sums w(δ) = Σ_n exp(-(δ+n)²/4t) and their derivatives w'(δ), both shaped like `diff`."""
	shifts = np.arange(-image_count(t), image_count(t) + 1, dtype=np.float64)
	shifted = diff[..., None] + shifts
	terms = np.exp(-shifted**2 / (4 * t))
	return terms.sum(axis=-1), -(shifted * terms).sum(axis=-1) / (2 * t)


# array-level kernels (used directly by the annealer and the weight solver)

def gaussian_kernel_terms(
	m: ManifoldSpec,
	x: FloatArray,
	t: float,
	torus_kernel: TorusKernel = TorusKernel.WRAPPED,
) -> tuple[FloatArray, FloatArray]:
	"""Kernel matrix K_ij = K(x_i - x_j) and the displacement gradients ∇K(x_i - x_j), shape (N, N, dim).

	On the torus the wrapped kernel is the product over axes of `wrapped_axis_sums`; elsewhere (and for
	the min-image torus kernel) K(δ) = exp(-|δ|²/4t).
	"""

	diff = pairwise_displacements(m, x)
	if m.kind != ManifoldKind.TORUS or torus_kernel == TorusKernel.MIN_IMAGE:
		kern = gaussian_kernel(np.einsum("ijk,ijk->ij", diff, diff), t)
		return kern, -kern[..., None] * diff / (2 * t)

	w, dw = wrapped_axis_sums(diff, t)
	kern = np.prod(w, axis=-1)
	dkern = np.empty_like(diff)
	for axis in range(diff.shape[-1]):
		dkern[..., axis] = dw[..., axis] * np.prod(np.delete(w, axis, axis=-1), axis=-1)
	return kern, dkern


def gaussian_energy_array(m: ManifoldSpec, x: FloatArray, t: float, torus_kernel: TorusKernel = TorusKernel.WRAPPED) -> float:
	kern, _ = gaussian_kernel_terms(m, x, t, torus_kernel)
	return float(np.sum(kern))


def gaussian_grad_array(m: ManifoldSpec, x: FloatArray, t: float, torus_kernel: TorusKernel = TorusKernel.WRAPPED) -> FloatArray:
	_, dkern = gaussian_kernel_terms(m, x, t, torus_kernel)
	# K is even, so the orderings (i,j) and (j,i) contribute equally
	return 2 * dkern.sum(axis=1)


def _riesz_terms(m: ManifoldSpec, x: FloatArray) -> tuple[FloatArray, FloatArray]:
	diff = pairwise_displacements(m, x)
	sq = np.einsum("ijk,ijk->ij", diff, diff)
	np.fill_diagonal(sq, np.inf)
	if np.any(sq == 0):
		i, j = np.argwhere(sq == 0)[0]
		raise EnergyError(f"Riesz energy is infinite: points {i} and {j} coincide")
	return diff, sq


def riesz_energy_array(m: ManifoldSpec, x: FloatArray, s: float) -> float:
	_, sq = _riesz_terms(m, x)
	# the diagonal holds +inf, contributing inf^(-s/2) = 0
	return float(np.sum(sq ** (-s / 2)))


def riesz_grad_array(m: ManifoldSpec, x: FloatArray, s: float) -> FloatArray:
	diff, sq = _riesz_terms(m, x)
	coef = -2 * s * sq ** (-s / 2 - 1)
	return np.einsum("ij,ijk->ik", coef, diff)


def wall_penalty_array(x: FloatArray, w: WallPenalty) -> tuple[float, FloatArray]:
	"""Total wall energy and its gradient for an (N, 3) array of hyperboloid points."""
	excess = np.maximum(x[:, 2] - w.c, 0.0)
	grad = np.zeros_like(x)
	grad[:, 2] = w.kappa * w.alpha_exp * excess ** (w.alpha_exp - 1)
	return float(np.sum(w.kappa * excess**w.alpha_exp)), grad


# point-set level operations

def _require_nonempty(ps: PointSet):
	if ps.n < 1:
		raise EnergyError("Energy of an empty point set is undefined")


def gaussian_energy(ps: PointSet, t: float, torus_kernel: TorusKernel = TorusKernel.WRAPPED) -> float:
	"""Gaussian energy Σ_{i,j} K(x_i - x_j), diagonal terms included.

	K(δ) = exp(-|δ|²/4t), summed over periodic images on the torus unless `torus_kernel` asks for the
	minimum-image distance.
	"""
	_require_nonempty(ps)
	if not t > 0:
		raise EnergyError(f"Bandwidth must be positive, got {t}")
	return gaussian_energy_array(ps.manifold, ps.points, t, torus_kernel)


def weighted_gaussian_energy(
	ps: PointSet,
	t: float,
	weights: ArrayLike | None = None,
	torus_kernel: TorusKernel = TorusKernel.WRAPPED,
) -> float:
	"""Quadratic form aᵀCa of the weights with the Gaussian kernel matrix.

	Args:
		ps: The point set; its own weights are used unless `weights` is given.
		t: Kernel bandwidth.
		weights: Arbitrary (possibly signed, unnormalized) coefficients overriding the set's weights.
		torus_kernel: Periodic treatment of the kernel on the torus.
	"""

	if weights is None:
		weights = ps.weights
	if weights is None:
		raise EnergyError("Weighted energy requires a weighted point set")
	a = np.asarray(weights, dtype=np.float64).reshape(-1)
	if a.shape != (ps.n,):
		raise EnergyError(f"Expected {ps.n} weights, got {a.shape[0]}")
	if not t > 0:
		raise EnergyError(f"Bandwidth must be positive, got {t}")
	kern, _ = gaussian_kernel_terms(ps.manifold, ps.points, t, torus_kernel)
	return float(a @ kern @ a)


def riesz_energy(ps: PointSet, s: float) -> float:
	"""Riesz energy Σ_{i≠j} d(x_i,x_j)^(-s) over ordered off-diagonal pairs."""
	_require_nonempty(ps)
	if not s > 0:
		raise EnergyError(f"Riesz exponent must be positive, got {s}")
	return riesz_energy_array(ps.manifold, ps.points, s)


def gaussian_energy_grad(ps: PointSet, t: float, torus_kernel: TorusKernel = TorusKernel.WRAPPED) -> FloatArray:
	"""Gradient of `gaussian_energy` with respect to every point, shape (N, dim)."""
	_require_nonempty(ps)
	if not t > 0:
		raise EnergyError(f"Bandwidth must be positive, got {t}")
	return gaussian_grad_array(ps.manifold, ps.points, t, torus_kernel)


def riesz_energy_grad(ps: PointSet, s: float) -> FloatArray:
	"""Gradient of `riesz_energy` with respect to every point, shape (N, dim)."""
	_require_nonempty(ps)
	if not s > 0:
		raise EnergyError(f"Riesz exponent must be positive, got {s}")
	return riesz_grad_array(ps.manifold, ps.points, s)


def wall_penalty(x: FloatArray, w: WallPenalty) -> tuple[float, FloatArray]:
	"""Wall energy of a single ambient point and its gradient (zero below the threshold)."""
	value, grad = wall_penalty_array(np.asarray(x, dtype=np.float64).reshape(1, 3), w)
	return value, grad[0]


@attrs.define(frozen=True)
class Potential:
	"""The annealer's objective U on raw (N, dim) coordinate arrays, wall term included."""

	manifold: ManifoldSpec
	spec: EnergySpec

	def energy(self, x: FloatArray) -> float:
		if self.spec.kind == EnergyKind.GAUSSIAN:
			value = gaussian_energy_array(self.manifold, x, self.spec.t, self.spec.torus_kernel)  # type: ignore[arg-type]
		else:
			value = riesz_energy_array(self.manifold, x, self.spec.s)  # type: ignore[arg-type]
		if self.spec.wall is not None:
			value += wall_penalty_array(x, self.spec.wall)[0]
		return value

	def grad(self, x: FloatArray) -> FloatArray:
		if self.spec.kind == EnergyKind.GAUSSIAN:
			g = gaussian_grad_array(self.manifold, x, self.spec.t, self.spec.torus_kernel)  # type: ignore[arg-type]
		else:
			g = riesz_grad_array(self.manifold, x, self.spec.s)  # type: ignore[arg-type]
		if self.spec.wall is not None:
			g = g + wall_penalty_array(x, self.spec.wall)[1]
		return g


def build_potential(m: ManifoldSpec, spec: EnergySpec) -> Potential:
	"""Bind an energy to a manifold, adding the default wall on the compact hyperboloid."""
	if m.kind == ManifoldKind.COMPACT_HYPERBOLOID and spec.wall is None:
		spec = attrs.evolve(spec, wall=WallPenalty.for_manifold(m))
	elif m.kind != ManifoldKind.COMPACT_HYPERBOLOID and spec.wall is not None:
		raise EnergyError("A wall penalty only applies to the compact hyperboloid")
	return Potential(m, spec)
