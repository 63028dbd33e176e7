"""Optimal quadrature weights from the Gaussian kernel matrix."""

from __future__ import annotations

import enum
import warnings

import attrs
import numpy as np
import scipy.linalg

from hkqtk.energy import gaussian_kernel_terms, TorusKernel
from hkqtk.errors import EnergyError, WeightSolveError
from hkqtk.geometry import FloatArray, vol_normalizer
from hkqtk.pointset import format_float, PointSet


JITTER = 1e-12


class Solver(enum.Enum):
	"""Which factorization produced the weights."""
	CHOLESKY = "cholesky"
	CHOLESKY_JITTER = "cholesky+jitter"
	# LDL^T; the min-image kernel is indefinite once the bandwidth is wide against the half period
	SYMMETRIC = "symmetric-indefinite"


@attrs.define(frozen=True, eq=False)
class KernelMatrix:
	"""C_ij = K(x_i - x_j) for one point set, with the same kernel the Gaussian energy uses."""
	entries: FloatArray
	t: float
	torus_kernel: TorusKernel = TorusKernel.WRAPPED

	@property
	def n(self) -> int:
		return self.entries.shape[0]


@attrs.define(frozen=True, eq=False)
class WeightSolution:
	weights: FloatArray
	solver: Solver
	# diagonal jitter that made the factorization succeed (0 when none was needed)
	jitter: float
	condition: float
	min_weight: float
	# (max - min) / |mean| of C·a, zero when the first-order conditions hold exactly
	kkt_spread: float

	@property
	def negative(self) -> bool:
		return self.min_weight < 0

	def as_meta(self) -> dict[str, str]:
		return {
			"weights_solver": self.solver.value,
			"weights_jitter": format_float(self.jitter),
			"weights_condition": format_float(self.condition),
			"weights_min": format_float(self.min_weight),
			"weights_kkt": format_float(self.kkt_spread),
			"weights_negative": "yes" if self.negative else "no",
		}


def kernel_matrix(ps: PointSet, t: float, torus_kernel: TorusKernel = TorusKernel.WRAPPED) -> KernelMatrix:
	if not t > 0:
		raise EnergyError(f"Bandwidth must be positive, got {t}")
	entries, _ = gaussian_kernel_terms(ps.manifold, ps.points, t, torus_kernel)
	return KernelMatrix(entries, t, torus_kernel)


def _solve_ones(C: FloatArray) -> tuple[FloatArray, Solver, float]:
	"""Solve Cy = 𝟙, trying Cholesky, then Cholesky with jitter, then a symmetric-indefinite solve."""

	ones = np.ones(C.shape[0])
	try:
		factor = scipy.linalg.cho_factor(C, lower=True, check_finite=False)
		return scipy.linalg.cho_solve(factor, ones, check_finite=False), Solver.CHOLESKY, 0.0
	except np.linalg.LinAlgError:
		pass

	# near-coincident points: retry once with a tiny diagonal shift
	shifted = C + JITTER * np.eye(C.shape[0])
	try:
		factor = scipy.linalg.cho_factor(shifted, lower=True, check_finite=False)
		return scipy.linalg.cho_solve(factor, ones, check_finite=False), Solver.CHOLESKY_JITTER, JITTER
	except np.linalg.LinAlgError:
		pass

	try:
		with warnings.catch_warnings():
			warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
			y = scipy.linalg.solve(C, ones, assume_a="sym", check_finite=False)
	except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
		raise WeightSolveError("Kernel matrix is singular, even with diagonal jitter; "
			"the point set likely contains coincident points") from None
	return y, Solver.SYMMETRIC, 0.0


def solve_weights_report(ps: PointSet, t: float, torus_kernel: TorusKernel = TorusKernel.WRAPPED) -> WeightSolution:
	"""Minimize aᵀCa subject to Σa = vol, returning the weights with solver diagnostics.

	The stationary point is a = vol · y / Σy with Cy = 𝟙. It is the minimizer whenever C is
	positive definite, which always holds for the wrapped torus kernel and on the sphere. The
	min-image torus kernel can be indefinite; `solver` then reports the LDLᵀ fallback and the result is
	a saddle point of the constrained energy.
	"""

	km = kernel_matrix(ps, t, torus_kernel)
	y, solver, jitter = _solve_ones(km.entries)

	total = float(np.sum(y))
	if not np.isfinite(total) or total == 0:
		raise WeightSolveError("Weight system is degenerate (Σ C⁻¹𝟙 is zero or non-finite)")
	a = vol_normalizer(ps.manifold) * y / total

	ca = km.entries @ a
	mean = float(np.mean(ca))
	spread = float(np.max(ca) - np.min(ca)) / abs(mean) if mean != 0 else float("inf")

	return WeightSolution(
		weights = a,
		solver = solver,
		jitter = jitter,
		condition = float(np.linalg.cond(km.entries)),
		min_weight = float(np.min(a)),
		kkt_spread = spread,
	)


def solve_weights(ps: PointSet, t: float, torus_kernel: TorusKernel = TorusKernel.WRAPPED) -> FloatArray:
	"""Closed-form optimal weights a = C⁻¹𝟙 / (𝟙ᵀC⁻¹𝟙), scaled to sum to the manifold's volume normalizer."""
	return solve_weights_report(ps, t, torus_kernel).weights
