"""Point sets and the shared point-set file format.

The format is UTF-8 text. Header lines start with `#` and hold one `key=value` pair each
(`manifold`, `d`, `N`, `method`, `seed`, `t`, ...). Data lines hold whitespace-separated
coordinates, followed by the quadrature weight when the set is weighted. Files without a
header (such as published spherical-design tables) are read with a caller-supplied manifold.
"""

from __future__ import annotations

from pathlib import Path

import attrs
import numpy as np
from numpy.typing import ArrayLike

from hkqtk.constants import CONSTRAINT_TOL, WEIGHT_SUM_TOL
from hkqtk.errors import GeometryError, PointSetFormatError
from hkqtk.geometry import constraint, FloatArray, ManifoldKind, ManifoldSpec, vol_normalizer
from hkqtk.util import atomic_write_text


# header keys owned by the writer (regenerated from the point set itself)
RESERVED_META_KEYS = ("manifold", "d", "alpha", "r", "N")


def format_float(value: float) -> str:
	"""Shortest decimal representation that round-trips bit-exactly."""
	return repr(float(value))


@attrs.define(eq=False)
class PointSet:
	"""N points on a manifold, optional quadrature weights and provenance metadata."""

	manifold: ManifoldSpec
	points: FloatArray = attrs.field(converter=lambda a: np.array(a, dtype=np.float64, ndmin=2))
	weights: FloatArray | None = attrs.field(default=None,
		converter=attrs.converters.optional(lambda a: np.array(a, dtype=np.float64).reshape(-1)))
	meta: dict[str, str] = attrs.field(factory=dict)

	def __attrs_post_init__(self):
		n, width = self.points.shape
		if n < 1:
			raise GeometryError("A point set needs at least one point")
		if width != self.manifold.ambient_dim:
			raise GeometryError(f"Expected {self.manifold.ambient_dim} coordinates per point, got {width}")
		if not np.all(np.isfinite(self.points)):
			raise GeometryError("Point coordinates must be finite")

		if self.manifold.kind == ManifoldKind.TORUS:
			if np.any(self.points < 0) or np.any(self.points >= 1):
				raise GeometryError("Torus coordinates must lie in [0, 1)")
		else:
			residual = np.max(np.abs(constraint(self.manifold, self.points)))
			if residual > CONSTRAINT_TOL:
				raise GeometryError(f"Points are off the {self.manifold.kind.value} surface (max |g| = {residual:.3g})")

		if self.weights is not None:
			if self.weights.shape != (n,):
				raise GeometryError(f"Expected {n} weights, got {self.weights.shape[0]}")
			total = float(np.sum(self.weights))
			if abs(total - vol_normalizer(self.manifold)) > WEIGHT_SUM_TOL:
				raise GeometryError(f"Weights must sum to {vol_normalizer(self.manifold)}, got {total!r}")

	def __len__(self) -> int:
		return self.points.shape[0]

	@property
	def n(self) -> int:
		return self.points.shape[0]

	def effective_weights(self) -> FloatArray:
		"""Return the weights, or uniform weights when the set is unweighted."""
		if self.weights is not None:
			return self.weights
		return np.full(self.n, vol_normalizer(self.manifold) / self.n)

	def with_weights(self, weights: ArrayLike | None, **meta: str) -> PointSet:
		"""Return a copy carrying the given weights (or none) and extra metadata."""
		return PointSet(self.manifold, self.points.copy(), weights, {**self.meta, **meta})

	def with_meta(self, **meta: str) -> PointSet:
		return PointSet(self.manifold, self.points.copy(), self.weights, {**self.meta, **meta})

	def header(self) -> dict[str, str]:
		"""All header entries, in output order."""
		head = {**self.manifold.as_meta(), "N": str(self.n)}
		head.update((k, v) for k, v in self.meta.items() if k not in RESERVED_META_KEYS)
		return head

	def dumps(self) -> str:
		"""Serialize to the point-set file format."""
		lines = [f"# {key}={value}" for key, value in self.header().items()]
		for i, row in enumerate(self.points):
			fields = [format_float(v) for v in row]
			if self.weights is not None:
				fields.append(format_float(self.weights[i]))
			lines.append(" ".join(fields))
		return "\n".join(lines) + "\n"

	def write(self, path: Path):
		"""Write atomically to `path`."""
		atomic_write_text(path, self.dumps())


def parse_header_line(line: str) -> tuple[str, str] | None:
	"""Extract a `key=value` pair from a comment line (or None for plain comments)."""
	body = line.lstrip("#").strip()
	key, sep, value = body.partition("=")
	if not sep or not key or " " in key.strip():
		return None
	return key.strip(), value.strip()


def parse_rows(text: str) -> tuple[dict[str, str], FloatArray]:
	"""Split point-set text into its header entries and its numeric data block.

	Raises:
		PointSetFormatError: On non-numeric, ragged or missing data rows.
	"""

	meta: dict[str, str] = dict()
	rows: list[list[float]] = list()

	for lineno, raw in enumerate(text.splitlines(), start=1):
		line = raw.strip()
		if not line:
			continue
		if line.startswith("#"):
			pair = parse_header_line(line)
			if pair is not None:
				meta[pair[0]] = pair[1]
			continue
		try:
			rows.append([float(tok) for tok in line.split()])
		except ValueError:
			raise PointSetFormatError(f"line {lineno}: non-numeric value in {line!r}") from None

	if not rows:
		raise PointSetFormatError("no data rows found")

	widths = {len(row) for row in rows}
	if len(widths) != 1:
		raise PointSetFormatError(f"rows have inconsistent column counts: {sorted(widths)}")

	return meta, np.array(rows, dtype=np.float64)


def loads_pointset(text: str, manifold: ManifoldSpec | None = None) -> PointSet:
	"""Parse the point-set file format.

	Args:
		text: The file contents.
		manifold: The manifold to assume when the header does not name one.

	Raises:
		PointSetFormatError: On malformed rows or missing manifold information.
	"""

	meta, data = parse_rows(text)

	# determine the manifold (header wins over the caller's default)
	if "manifold" in meta:
		try:
			manifold = ManifoldSpec.from_meta(meta)
		except GeometryError as exc:
			raise PointSetFormatError(str(exc)) from None
	elif manifold is None:
		raise PointSetFormatError("file has no `manifold` header and no manifold was supplied")

	width = manifold.ambient_dim
	ncols = data.shape[1]
	if ncols not in (width, width + 1):
		raise PointSetFormatError(f"expected {width} or {width + 1} columns for {manifold.kind.value}, got {ncols}")

	weights = data[:, width] if ncols == width + 1 else None

	if "N" in meta and meta["N"] != str(data.shape[0]):
		raise PointSetFormatError(f"header declares N={meta['N']} but {data.shape[0]} rows were read")

	extra = {k: v for k, v in meta.items() if k not in RESERVED_META_KEYS}
	try:
		return PointSet(manifold, data[:, :width], weights, extra)
	except GeometryError as exc:
		raise PointSetFormatError(str(exc)) from None


def read_pointset(path: Path, manifold: ManifoldSpec | None = None) -> PointSet:
	"""Read a point-set file from disk (see `loads_pointset`)."""
	try:
		text = path.read_text(encoding="utf-8")
	except OSError as exc:
		raise PointSetFormatError(f"cannot read {str(path)!r}: {exc.strerror}") from None
	return loads_pointset(text, manifold)
