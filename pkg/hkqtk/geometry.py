"""Supported manifolds: coordinates, distances, constraints and the maps between models."""

from __future__ import annotations

import enum

import attrs
import numpy as np
from numpy.typing import ArrayLike, NDArray

from hkqtk.errors import GeometryError


FloatArray = NDArray[np.float64]


class ManifoldKind(enum.Enum):
	"""Which manifold a point set lives on."""
	TORUS = "torus"
	SPHERE = "sphere"
	DENTED_SPHERE = "dented-sphere"
	COMPACT_HYPERBOLOID = "hyperboloid"


# manifolds realized as level sets g(x) = 0 in 3-space
EMBEDDED_KINDS = frozenset({ManifoldKind.SPHERE, ManifoldKind.DENTED_SPHERE, ManifoldKind.COMPACT_HYPERBOLOID})


@attrs.define(frozen=True)
class ManifoldSpec:
	"""Identifies a manifold and its parameters."""

	kind: ManifoldKind
	# intrinsic dimension (free for the torus, always 2 for the embedded surfaces)
	dim: int = 2
	# dent strength (dented sphere only)
	alpha: float | None = None
	# Poincaré disk radius (compact hyperboloid only)
	r: float | None = None

	def __attrs_post_init__(self):
		if self.kind == ManifoldKind.TORUS:
			if self.dim < 1:
				raise GeometryError(f"Torus dimension must be at least 1, got {self.dim}")
		elif self.dim != 2:
			raise GeometryError(f"The {self.kind.value} manifold is two-dimensional (got d={self.dim})")

		if self.kind == ManifoldKind.DENTED_SPHERE:
			if self.alpha is None or not self.alpha > 0:
				raise GeometryError(f"Dented sphere requires alpha > 0, got {self.alpha}")
		elif self.alpha is not None:
			raise GeometryError("alpha is only meaningful for the dented sphere")

		if self.kind == ManifoldKind.COMPACT_HYPERBOLOID:
			if self.r is None or not 0 < self.r < 1:
				raise GeometryError(f"Compact hyperboloid requires a disk radius r in (0, 1), got {self.r}")
		elif self.r is not None:
			raise GeometryError("r is only meaningful for the compact hyperboloid")

	@classmethod
	def torus(cls, d: int) -> ManifoldSpec:
		return cls(ManifoldKind.TORUS, d)

	@classmethod
	def sphere(cls) -> ManifoldSpec:
		return cls(ManifoldKind.SPHERE)

	@classmethod
	def dented_sphere(cls, alpha: float) -> ManifoldSpec:
		return cls(ManifoldKind.DENTED_SPHERE, alpha=alpha)

	@classmethod
	def hyperboloid(cls, r: float) -> ManifoldSpec:
		return cls(ManifoldKind.COMPACT_HYPERBOLOID, r=r)

	@property
	def ambient_dim(self) -> int:
		"""Number of coordinates stored per point."""
		return self.dim if self.kind == ManifoldKind.TORUS else 3

	@property
	def is_embedded(self) -> bool:
		return self.kind in EMBEDDED_KINDS

	@property
	def wall_threshold(self) -> float:
		"""Height c = (1+r²)/(1-r²) above which a hyperboloid point leaves the compactified region."""
		if self.r is None:
			raise GeometryError("Only the compact hyperboloid has a wall threshold")
		return (1 + self.r**2) / (1 - self.r**2)

	def as_meta(self) -> dict[str, str]:
		"""Header metadata describing this manifold."""
		meta = {"manifold": self.kind.value, "d": str(self.dim)}
		if self.alpha is not None:
			meta["alpha"] = repr(float(self.alpha))
		if self.r is not None:
			meta["r"] = repr(float(self.r))
		return meta

	@classmethod
	def from_meta(cls, meta: dict[str, str]) -> ManifoldSpec:
		"""Rebuild a manifold from header metadata (the inverse of `as_meta`)."""
		try:
			kind = ManifoldKind(meta["manifold"])
			dim = int(meta.get("d", "2"))
			alpha = float(meta["alpha"]) if "alpha" in meta else None
			r = float(meta["r"]) if "r" in meta else None
		except KeyError as exc:
			raise GeometryError(f"Missing manifold metadata key: {exc}") from None
		except ValueError as exc:
			raise GeometryError(f"Invalid manifold metadata: {exc}") from None
		return cls(kind, dim, alpha=alpha, r=r)


def _as_points(x: ArrayLike, width: int | None = None) -> FloatArray:
	arr = np.asarray(x, dtype=np.float64)
	if arr.ndim == 0:
		arr = arr.reshape(1)
	if width is not None and arr.shape[-1] != width:
		raise GeometryError(f"Expected {width} coordinates per point, got {arr.shape[-1]}")
	return arr


def _require_embedded(m: ManifoldSpec):
	if not m.is_embedded:
		raise GeometryError(f"The {m.kind.value} manifold is not a constrained surface")


def wrap_torus(x: ArrayLike) -> FloatArray:
	"""Map coordinates to their canonical representatives in [0,1)."""
	out = np.mod(np.asarray(x, dtype=np.float64), 1.0)
	# tiny negative values round up to exactly 1.0 under mod
	out[out >= 1.0] = 0.0
	return out


def min_image_displacement(x: ArrayLike, y: ArrayLike) -> FloatArray:
	"""Signed displacement δ from y to x on the unit torus, with |δ_i| ≤ 1/2 and x - δ ≡ y (mod 1)."""
	xa, ya = _as_points(x), _as_points(y)
	if xa.shape[-1] != ya.shape[-1]:
		raise GeometryError(f"Dimension mismatch: {xa.shape[-1]} != {ya.shape[-1]}")
	delta = xa - ya
	return delta - np.round(delta)


def torus_distance(x: ArrayLike, y: ArrayLike, d: int | None = None) -> float:
	"""Flat-torus (minimum image) distance between two points of [0,1)^d."""
	xa, ya = _as_points(x, d), _as_points(y, d)
	return float(np.linalg.norm(min_image_displacement(xa, ya), axis=-1))


def ambient_distance(x: ArrayLike, y: ArrayLike) -> float:
	"""Euclidean distance of two embedded points in ambient 3-space."""
	xa, ya = _as_points(x), _as_points(y)
	if xa.shape != ya.shape:
		raise GeometryError(f"Dimension mismatch: {xa.shape} != {ya.shape}")
	return float(np.linalg.norm(xa - ya, axis=-1))


def pairwise_displacements(m: ManifoldSpec, points: FloatArray) -> FloatArray:
	"""Return the (N, N, dim) array of displacements x_i - x_j in the manifold's configured metric."""
	diff = points[:, None, :] - points[None, :, :]
	if m.kind == ManifoldKind.TORUS:
		diff -= np.round(diff)
	return diff


def constraint(m: ManifoldSpec, x: ArrayLike) -> FloatArray | float:
	"""Evaluate the surface constraint g(x), which is zero exactly on the surface.

	Accepts a single ambient point or an (N, 3) array, returning a float or an (N,) array.
	"""

	_require_embedded(m)
	xa = _as_points(x, 3)
	x1, x2, x3 = xa[..., 0], xa[..., 1], xa[..., 2]

	match m.kind:
		case ManifoldKind.SPHERE:
			g = x1**2 + x2**2 + x3**2 - 1
		case ManifoldKind.DENTED_SPHERE:
			g = x1**2 + x2**2 / (m.alpha + x1**2) + x3**2 - 1
		case ManifoldKind.COMPACT_HYPERBOLOID:
			g = x1**2 + x2**2 - x3**2 + 1
		case _:
			raise GeometryError(f"No constraint for {m.kind.value}")

	return float(g) if xa.ndim == 1 else g


def constraint_grad(m: ManifoldSpec, x: ArrayLike) -> FloatArray:
	"""Analytic gradient of the surface constraint, same shape as `x`."""

	_require_embedded(m)
	xa = _as_points(x, 3)
	x1, x2, x3 = xa[..., 0], xa[..., 1], xa[..., 2]

	match m.kind:
		case ManifoldKind.SPHERE:
			return 2 * xa
		case ManifoldKind.DENTED_SPHERE:
			denom = m.alpha + x1**2
			return np.stack([
				2 * x1 - x2**2 * 2 * x1 / denom**2,
				2 * x2 / denom,
				2 * x3,
			], axis=-1)
		case ManifoldKind.COMPACT_HYPERBOLOID:
			return np.stack([2 * x1, 2 * x2, -2 * x3], axis=-1)
		case _:
			raise GeometryError(f"No constraint for {m.kind.value}")


def hyperboloid_to_disk(x: ArrayLike) -> FloatArray:
	"""Central projection of the upper hyperboloid sheet onto the Poincaré disk."""
	xa = _as_points(x, 3)
	if np.any(xa[..., 2] <= -1):
		raise GeometryError("Points on the lower hyperboloid sheet cannot be projected onto the disk")
	return xa[..., :2] / (1 + xa[..., 2:3])


def disk_to_hyperboloid(u: ArrayLike) -> FloatArray:
	"""Inverse of `hyperboloid_to_disk`: lift Poincaré disk points onto the upper sheet."""
	ua = _as_points(u, 2)
	rho2 = np.sum(ua**2, axis=-1, keepdims=True)
	if np.any(rho2 >= 1):
		raise GeometryError("Disk points must satisfy |u| < 1")
	scale = 1 / (1 - rho2)
	return np.concatenate([2 * ua * scale, (1 + rho2) * scale], axis=-1)


def dented_sphere_lift(x: ArrayLike, alpha: float) -> FloatArray:
	"""Map unit-sphere points onto the dented sphere with the given dent strength."""
	xa = _as_points(x, 3)
	x1, x2, x3 = xa[..., 0], xa[..., 1], xa[..., 2]
	y2 = np.sign(x2) * np.sqrt((alpha + x1**2) * x2**2)
	return np.stack([x1, y2, x3], axis=-1)


def vol_normalizer(m: ManifoldSpec) -> float:
	"""Total weight every quadrature rule sums to.

	Weights approximate the normalized integral (1/|M|)∫f, so this is 1 on every manifold.
	"""
	return 1.0
