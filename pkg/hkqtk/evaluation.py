"""Integration errors against Laplacian eigenfunctions on the torus and the sphere."""

from __future__ import annotations

from typing import Any, Sequence

import itertools
import math

import attrs
import numpy as np
from numpy.typing import ArrayLike, NDArray

from hkqtk.errors import GeometryError, QualitativeOnlyError, UsageError
from hkqtk.geometry import FloatArray, ManifoldKind
from hkqtk.pointset import format_float, PointSet


ComplexArray = NDArray[np.complex128]

# field order of the per-eigenvalue error table
ERROR_FIELDS = ("index", "lambda", "l_or_k", "m_or_blank", "E_lambda", "E_cum")
STAT_FIELDS = ("quantity", "index", "lambda", "median", "min", "max")


@attrs.define(frozen=True)
class EigenLabel:
	"""One Laplacian eigenfunction: a torus frequency k (one per ±k pair) or a sphere mode (l, m)."""

	kind: ManifoldKind
	# eigenvalue label: ‖k‖² on the torus, l(l+1) on the sphere
	lam: float
	k: tuple[int, ...] | None = None
	l: int | None = None
	m: int | None = None

	@classmethod
	def torus(cls, k: Sequence[int]) -> EigenLabel:
		k = tuple(int(v) for v in k)
		return cls(ManifoldKind.TORUS, float(sum(v * v for v in k)), k=k)

	@classmethod
	def sphere(cls, l: int, m: int) -> EigenLabel:
		return cls(ManifoldKind.SPHERE, float(l * (l + 1)), l=l, m=m)

	def columns(self) -> tuple[str, str]:
		"""The `l_or_k` and `m_or_blank` table cells."""
		if self.k is not None:
			return ";".join(str(v) for v in self.k), ""
		return str(self.l), str(self.m)


@attrs.define(frozen=True, eq=False)
class ErrorSpectrum:
	labels: list[EigenLabel]
	e_lambda: FloatArray
	e_cum: FloatArray

	@classmethod
	def from_errors(cls, labels: list[EigenLabel], e_lambda: ArrayLike) -> ErrorSpectrum:
		values = np.asarray(e_lambda, dtype=np.float64).reshape(-1)
		if values.shape[0] != len(labels):
			raise UsageError(f"{len(labels)} labels but {values.shape[0]} error values")
		return cls(list(labels), values, np.cumsum(values))

	def __len__(self) -> int:
		return len(self.labels)

	def cumulative_at(self, s: int) -> float:
		"""E_≤s, the summed error over the first `s` eigenfunctions."""
		if not 1 <= s <= len(self):
			raise UsageError(f"s must lie in [1, {len(self)}], got {s}")
		return float(self.e_cum[s - 1])

	def records(self) -> list[dict[str, Any]]:
		"""Rows of the error table (see `ERROR_FIELDS`)."""
		rows = list()
		for i, label in enumerate(self.labels):
			l_or_k, m_or_blank = label.columns()
			rows.append({
				"index": i + 1,
				"lambda": format_float(label.lam),
				"l_or_k": l_or_k,
				"m_or_blank": m_or_blank,
				"E_lambda": format_float(self.e_lambda[i]),
				"E_cum": format_float(self.e_cum[i]),
			})
		return rows


# eigenfunction enumeration

def torus_eigen_enumeration(d: int, count: int) -> list[EigenLabel]:
	"""First `count` nonzero frequencies of T^d, one per ±k pair, ordered by ‖k‖² then lexicographically.

	The representative of each pair is the vector whose first nonzero component is positive.
	"""

	if d < 1:
		raise UsageError(f"Torus dimension must be at least 1, got {d}")
	if count < 1:
		raise UsageError(f"count must be at least 1, got {count}")

	radius = 1
	while True:
		box = np.array(list(itertools.product(range(-radius, radius + 1), repeat=d)), dtype=np.int64)
		nonzero = box != 0
		has_nonzero = nonzero.any(axis=1)
		first = np.argmax(nonzero, axis=1)
		canonical = has_nonzero & (box[np.arange(len(box)), first] > 0)
		ks = box[canonical]
		norms = np.einsum("ij,ij->i", ks, ks)

		# the box holds every frequency with ‖k‖ ≤ radius
		complete = norms <= radius * radius
		if np.count_nonzero(complete) >= count:
			ks, norms = ks[complete], norms[complete]
			order = np.lexsort(tuple(ks[:, j] for j in reversed(range(d))) + (norms,))
			return [EigenLabel.torus(ks[i]) for i in order[:count]]
		radius *= 2


def sphere_eigen_enumeration(count: int) -> list[EigenLabel]:
	"""First `count` spherical-harmonic modes with l ≥ 1, ordered by degree then order."""
	if count < 1:
		raise UsageError(f"count must be at least 1, got {count}")
	labels = list()
	l = 1
	while len(labels) < count:
		labels.extend(EigenLabel.sphere(l, m) for m in range(-l, l + 1))
		l += 1
	return labels[:count]


# torus

def _torus_weights(ps: PointSet) -> FloatArray:
	if ps.manifold.kind != ManifoldKind.TORUS:
		raise GeometryError(f"Expected a torus point set, got {ps.manifold.kind.value}")
	return ps.effective_weights()


def torus_errors(ps: PointSet, ks: ArrayLike) -> FloatArray:
	"""E_λ = |Σ_j a_j exp(2πi k·x_j)|² for every row of `ks`."""
	a = _torus_weights(ps)
	K = np.atleast_2d(np.asarray(ks, dtype=np.float64))
	if K.shape[1] != ps.manifold.dim:
		raise GeometryError(f"Frequency has {K.shape[1]} components, point set is {ps.manifold.dim}-dimensional")
	# reduce phases mod 1 before scaling by 2π
	phases = np.mod(ps.points @ K.T, 1.0)
	sums = a @ np.exp(2j * np.pi * phases)
	return np.abs(sums)**2


def torus_error(ps: PointSet, k: Sequence[int]) -> float:
	"""Squared integration error of the point set on the torus eigenfunction exp(2πi k·x)."""
	return float(torus_errors(ps, np.asarray(k).reshape(1, -1))[0])


# sphere

class SphericalHarmonics:
	"""Complex orthonormal spherical harmonics up to degree `lmax`, Condon-Shortley phase included.

	The normalized associated Legendre functions are built with the standard three-term
	recurrence in l for every fixed m, which stays finite well past degree 100.
	Modes are laid out l ascending, m ascending, so mode (l, m) sits at column l² + l + m.
	"""

	def __init__(self, lmax: int):
		if lmax < 0:
			raise UsageError(f"lmax must be non-negative, got {lmax}")
		self.lmax = lmax
		self.a, self.b = self._compute_ab(lmax)

	@staticmethod
	def index(l: int, m: int) -> int:
		return l * l + l + m

	@staticmethod
	def _compute_ab(lmax: int) -> tuple[FloatArray, FloatArray]:
		a = np.zeros((lmax + 1, lmax + 1))
		b = np.zeros((lmax + 1, lmax + 1))
		for m in range(lmax + 1):
			for l in range(m + 1, lmax + 1):
				a[l, m] = math.sqrt((4 * l * l - 1) / (l * l - m * m))
				b[l, m] = math.sqrt(((l - 1)**2 - m * m) / (4 * (l - 1)**2 - 1))
		return a, b

	def legendre(self, z: FloatArray, s: FloatArray) -> FloatArray:
		"""Normalized P̄_l^m(cos θ) for m ≥ 0, shape (lmax+1, lmax+1, N); z = cos θ, s = sin θ."""
		L = self.lmax
		P = np.zeros((L + 1, L + 1, z.shape[0]))
		P[0, 0] = 1 / math.sqrt(4 * math.pi)
		for m in range(1, L + 1):
			P[m, m] = -math.sqrt((2 * m + 1) / (2 * m)) * s * P[m - 1, m - 1]
		for m in range(L):
			P[m + 1, m] = math.sqrt(2 * m + 3) * z * P[m, m]
			for l in range(m + 2, L + 1):
				P[l, m] = self.a[l, m] * (z * P[l - 1, m] - self.b[l, m] * P[l - 2, m])
		return P

	def evaluate(self, points: ArrayLike) -> ComplexArray:
		"""Evaluate every mode at unit vectors, returning an (N, (lmax+1)²) complex array."""
		x = np.atleast_2d(np.asarray(points, dtype=np.float64))
		if x.shape[1] != 3:
			raise GeometryError(f"Expected 3 coordinates per point, got {x.shape[1]}")
		norms = np.linalg.norm(x, axis=1)
		if np.any(np.abs(norms - 1) > 1e-8):
			raise GeometryError(f"Spherical harmonics need unit vectors (max |‖x‖-1| = {np.max(np.abs(norms - 1)):.3g})")

		z = np.clip(x[:, 2], -1.0, 1.0)
		s = np.hypot(x[:, 0], x[:, 1])
		phi = np.arctan2(x[:, 1], x[:, 0])
		P = self.legendre(z, s)

		out = np.zeros((x.shape[0], (self.lmax + 1)**2), dtype=np.complex128)
		for l in range(self.lmax + 1):
			for m in range(l + 1):
				y = P[l, m] * np.exp(1j * m * phi)
				out[:, self.index(l, m)] = y
				if m > 0:
					out[:, self.index(l, -m)] = (-1)**m * np.conj(y)
		return out


def sph_harm(l: int, m: int, x: ArrayLike) -> complex:
	"""Orthonormal complex spherical harmonic Y_l^m at a unit vector."""
	if l < 0 or abs(m) > l:
		raise UsageError(f"Spherical harmonic needs l >= 0 and |m| <= l, got l={l}, m={m}")
	return complex(SphericalHarmonics(l).evaluate(np.asarray(x).reshape(1, 3))[0, SphericalHarmonics.index(l, m)])


def _require_sphere(ps: PointSet):
	kind = ps.manifold.kind
	if kind in (ManifoldKind.DENTED_SPHERE, ManifoldKind.COMPACT_HYPERBOLOID):
		raise QualitativeOnlyError(f"The {kind.value} manifold has no closed-form eigenbasis; "
			"only qualitative results are available")
	if kind != ManifoldKind.SPHERE:
		raise GeometryError(f"Expected a sphere point set, got {kind.value}")


def sphere_errors(ps: PointSet, labels: Sequence[EigenLabel]) -> FloatArray:
	"""E_λ = |Σ_j a_j Y_l^m(x_j)|² for every sphere label."""
	_require_sphere(ps)
	if not labels:
		return np.zeros(0)
	lmax = max(label.l for label in labels)  # type: ignore[type-var]
	Y = SphericalHarmonics(lmax).evaluate(ps.points)
	columns = [SphericalHarmonics.index(label.l, label.m) for label in labels]  # type: ignore[arg-type]
	sums = ps.effective_weights() @ Y[:, columns]
	return np.abs(sums)**2


def sphere_error(ps: PointSet, l: int, m: int) -> float:
	"""Squared integration error of the point set on Y_l^m (weights default to uniform 1/N)."""
	if l < 1 or abs(m) > l:
		raise UsageError(f"Sphere error needs l >= 1 and |m| <= l, got l={l}, m={m}")
	return float(sphere_errors(ps, [EigenLabel.sphere(l, m)])[0])


# spectra

def cumulative_error(spectrum: ErrorSpectrum) -> ErrorSpectrum:
	"""Recompute the running sums E_≤s of a spectrum."""
	return ErrorSpectrum.from_errors(spectrum.labels, spectrum.e_lambda)


def error_spectrum(ps: PointSet, count: int) -> ErrorSpectrum:
	"""Per-eigenfunction and cumulative errors over the first `count` eigenfunctions of the set's manifold."""
	match ps.manifold.kind:
		case ManifoldKind.TORUS:
			labels = torus_eigen_enumeration(ps.manifold.dim, count)
			values = torus_errors(ps, [label.k for label in labels])
		case ManifoldKind.SPHERE:
			labels = sphere_eigen_enumeration(count)
			values = sphere_errors(ps, labels)
		case _:
			_require_sphere(ps)
	return ErrorSpectrum.from_errors(labels, values)


def exactness_degree(ps: PointSet, lmax: int, tol: float = 1e-18) -> int:
	"""Largest degree L ≤ lmax such that every E_{l,m} with 1 ≤ l ≤ L is at most `tol` (0 if none)."""
	if lmax < 1:
		raise UsageError(f"lmax must be at least 1, got {lmax}")
	labels = sphere_eigen_enumeration((lmax + 1)**2 - 1)
	values = sphere_errors(ps, labels)
	degrees = np.array([label.l for label in labels])
	for l in range(1, lmax + 1):
		if np.any(values[degrees == l] > tol):
			return l - 1
	return lmax


@attrs.define(frozen=True, eq=False)
class LabelStats:
	label: EigenLabel
	median: float
	min: float
	max: float
	values: FloatArray


def ensemble_stats(spectra: Sequence[ErrorSpectrum], quantity: str = "e_lambda") -> list[LabelStats]:
	"""Per-eigenfunction order statistics over an ensemble of spectra.

	Args:
		spectra: One spectrum per run, all over the same labels.
		quantity: `e_lambda` or `e_cum`.

	The median of an even-sized ensemble is the mean of its two middle values.
	"""

	if not spectra:
		raise UsageError("Ensemble statistics need at least one spectrum")
	if quantity not in ("e_lambda", "e_cum"):
		raise UsageError(f"Unknown spectrum quantity {quantity!r}")
	labels = spectra[0].labels
	for spectrum in spectra[1:]:
		if spectrum.labels != labels:
			raise UsageError("Ensemble spectra are over different eigenfunction labels")

	table = np.stack([getattr(spectrum, quantity) for spectrum in spectra])
	return [
		LabelStats(label, float(np.median(table[:, i])), float(np.min(table[:, i])), float(np.max(table[:, i])), table[:, i].copy())
		for i, label in enumerate(labels)
	]


def stats_records(stats: Sequence[LabelStats], quantity: str) -> list[dict[str, Any]]:
	"""Rows of the ensemble statistics table (see `STAT_FIELDS`)."""
	return [{
		"quantity": quantity,
		"index": i + 1,
		"lambda": format_float(st.label.lam),
		"median": format_float(st.median),
		"min": format_float(st.min),
		"max": format_float(st.max),
	} for i, st in enumerate(stats)]
