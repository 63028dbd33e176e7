"""Comparison point sets: low-discrepancy sequences, lattices, random samples and spherical designs."""

from __future__ import annotations

from pathlib import Path
import enum
import math
import warnings

import attrs
import numpy as np
from scipy.stats import qmc

from hkqtk.errors import GeneratorError, PointSetFormatError
from hkqtk.geometry import FloatArray, ManifoldKind, ManifoldSpec
from hkqtk.pointset import format_float, parse_rows, PointSet
from hkqtk.rng import SAMPLING_STREAM, substream


# highest dimension served by the sequence generators
MAX_DIM = 16
PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)

GOLDEN_FRACTION = (math.sqrt(5) - 1) / 2

DESIGN_NORM_TOL = 1e-6
DESIGN_NORM_LIMIT = 1e-3


class GeneratorMethod(enum.Enum):
	HALTON = "halton"
	SOBOL = "sobol"
	FIBONACCI_LATTICE = "fibonacci"
	KOROBOV_LATTICE = "korobov"
	LHS = "lhs"
	UNIFORM_RANDOM = "uniform"
	SPHERICAL_FIBONACCI = "spherical-fibonacci"
	SPHERICAL_DESIGN_FILE = "design"

	@property
	def stochastic(self) -> bool:
		return self in (GeneratorMethod.LHS, GeneratorMethod.UNIFORM_RANDOM)


SPHERE_ONLY = frozenset({GeneratorMethod.SPHERICAL_FIBONACCI, GeneratorMethod.SPHERICAL_DESIGN_FILE})


@attrs.define(frozen=True)
class GeneratorSpec:
	"""A request for one baseline point set."""

	method: GeneratorMethod
	n: int
	manifold: ManifoldSpec
	seed: int = 0
	path: Path | None = None
	korobov_a: int | None = None
	# Sobol scramble seed (unscrambled when absent)
	scramble: int | None = None

	def __attrs_post_init__(self):
		kind = self.manifold.kind
		if self.method in SPHERE_ONLY and kind != ManifoldKind.SPHERE:
			raise GeneratorError(f"Method {self.method.value!r} requires the sphere, not {kind.value}")
		if self.method not in SPHERE_ONLY and self.method != GeneratorMethod.UNIFORM_RANDOM and kind != ManifoldKind.TORUS:
			raise GeneratorError(f"Method {self.method.value!r} requires the torus, not {kind.value}")
		if self.method == GeneratorMethod.UNIFORM_RANDOM and kind not in (ManifoldKind.TORUS, ManifoldKind.SPHERE):
			raise GeneratorError(f"Uniform sampling is only available on the torus and the sphere, not {kind.value}")
		if self.method == GeneratorMethod.FIBONACCI_LATTICE and self.manifold.dim != 2:
			raise GeneratorError("Fibonacci lattices live on the two-dimensional torus")
		if self.method == GeneratorMethod.SPHERICAL_DESIGN_FILE and self.path is None:
			raise GeneratorError("Loading a spherical design requires a file path")
		if self.method != GeneratorMethod.SPHERICAL_DESIGN_FILE and self.n < 1:
			raise GeneratorError(f"N must be at least 1, got {self.n}")


def _check_dim(d: int):
	if not 1 <= d <= MAX_DIM:
		raise GeneratorError(f"Dimension must lie in [1, {MAX_DIM}], got {d}")


def _check_n(n: int):
	if n < 1:
		raise GeneratorError(f"N must be at least 1, got {n}")


def radical_inverse(i: int, base: int) -> float:
	"""Reflect the base-`base` digits of `i` about the radix point."""
	f, r = 1.0, 0.0
	while i > 0:
		i, digit = divmod(i, base)
		f /= base
		r += f * digit
	return r


def halton(n: int, d: int) -> PointSet:
	"""Halton points i = 1..N (the origin is skipped), coordinate j in the j-th prime base."""
	_check_n(n)
	_check_dim(d)
	points = np.array([[radical_inverse(i, PRIMES[j]) for j in range(d)] for i in range(1, n + 1)])
	return PointSet(ManifoldSpec.torus(d), points, None, {"method": GeneratorMethod.HALTON.value, "start_index": "1"})


def sobol(n: int, d: int, scramble_seed: int | None = None) -> PointSet:
	"""The first N Sobol points, origin included; Owen-scrambled when a seed is given."""
	_check_n(n)
	_check_dim(d)
	if scramble_seed is None:
		engine = qmc.Sobol(d, scramble=False)
	else:
		engine = qmc.Sobol(d, scramble=True, seed=substream(scramble_seed, SAMPLING_STREAM))
	with warnings.catch_warnings():
		# balance properties need N = 2^m; any N is allowed here
		warnings.simplefilter("ignore", UserWarning)
		points = engine.random(n)

	meta = {"method": GeneratorMethod.SOBOL.value, "start_index": "0"}
	if scramble_seed is not None:
		meta["scramble"] = str(scramble_seed)
	return PointSet(ManifoldSpec.torus(d), points, None, meta)


def fibonacci_numbers(m: int) -> list[int]:
	"""[F_0, F_1, ..., F_m] with F_1 = F_2 = 1."""
	fib = [0, 1]
	while len(fib) <= m:
		fib.append(fib[-1] + fib[-2])
	return fib[:m + 1]


def fibonacci_index(n: int) -> int:
	"""The index m ≥ 3 with F_m = n."""
	if n < 2:
		raise GeneratorError(f"Fibonacci lattices need N >= 2, got {n}")
	fib = [1, 1]
	while fib[-1] < n:
		fib.append(fib[-1] + fib[-2])
	if fib[-1] != n:
		raise GeneratorError(f"N = {n} is not a Fibonacci number (nearest are {fib[-2]} and {fib[-1]})")
	return len(fib)


def fibonacci_lattice(m: int) -> PointSet:
	"""The rank-1 lattice x_j = (j/F_m, {j F_{m-1}/F_m}), j = 0..F_m-1."""
	if m < 3:
		raise GeneratorError(f"Fibonacci index must be at least 3 (F_3 = 2), got {m}")
	fib = fibonacci_numbers(m)
	n, g = fib[m], fib[m - 1]
	j = np.arange(n)
	points = np.stack([j / n, (j * g % n) / n], axis=-1)
	return PointSet(ManifoldSpec.torus(2), points, None, {
		"method": GeneratorMethod.FIBONACCI_LATTICE.value,
		"fibonacci_index": str(m),
		"generator": f"1;{g}",
	})


def _korobov_points(n: int, d: int, a: int) -> FloatArray:
	powers = [pow(a, e, n) for e in range(d)]
	j = np.arange(n)
	return np.stack([(j * p % n) / n for p in powers], axis=-1)


def korobov_lattice(n: int, d: int, a: int | None = None) -> PointSet:
	"""Korobov lattice x_j = ({j/N}, {ja/N}, ..., {ja^(d-1)/N}).

	When `a` is omitted, every admissible generator in [2, N-1] is tried and the one with the
	smallest cumulative error over the first N torus eigenfunctions (uniform weights) is kept;
	ties go to the smallest generator.
	"""

	_check_dim(d)
	if n < 2:
		raise GeneratorError(f"Korobov lattices need N >= 2, got {n}")

	if a is not None:
		if math.gcd(a, n) != 1:
			raise GeneratorError(f"Korobov generator a={a} is not coprime to N={n}")
		searched = False
	else:
		# avoid an import cycle: evaluation is only needed for the search
		from hkqtk.evaluation import torus_eigen_enumeration, torus_errors

		candidates = [c for c in range(2, n) if math.gcd(c, n) == 1] or [1]
		ks = np.array([label.k for label in torus_eigen_enumeration(d, n)])
		best_a, best_err = candidates[0], math.inf
		for c in candidates:
			err = float(np.sum(torus_errors(PointSet(ManifoldSpec.torus(d), _korobov_points(n, d, c)), ks)))
			if err < best_err:
				best_a, best_err = c, err
		a = best_a
		searched = True

	meta = {"method": GeneratorMethod.KOROBOV_LATTICE.value, "korobov_a": str(a)}
	if searched:
		meta["korobov_search"] = "min-E_cum"
	return PointSet(ManifoldSpec.torus(d), _korobov_points(n, d, a), None, meta)


def lhs(n: int, d: int, seed: int) -> PointSet:
	"""Latin hypercube sample: one point per axis stratum [k/N, (k+1)/N) in every dimension."""
	_check_n(n)
	_check_dim(d)
	rng = substream(seed, SAMPLING_STREAM)
	columns = list()
	for _ in range(d):
		perm = rng.permutation(n)
		jitter = rng.random(n)
		columns.append((perm + jitter) / n)
	points = np.minimum(np.stack(columns, axis=-1), np.nextafter(1.0, 0.0))
	return PointSet(ManifoldSpec.torus(d), points, None, {"method": GeneratorMethod.LHS.value, "seed": str(seed)})


def uniform_random(n: int, m: ManifoldSpec, seed: int) -> PointSet:
	"""I.i.d. uniform points on the torus or the sphere."""
	_check_n(n)
	rng = substream(seed, SAMPLING_STREAM)
	match m.kind:
		case ManifoldKind.TORUS:
			points = rng.random((n, m.dim))
		case ManifoldKind.SPHERE:
			normals = rng.standard_normal((n, 3))
			points = normals / np.linalg.norm(normals, axis=1, keepdims=True)
		case _:
			raise GeneratorError(f"Uniform sampling is only available on the torus and the sphere, not {m.kind.value}")
	return PointSet(m, points, None, {"method": GeneratorMethod.UNIFORM_RANDOM.value, "seed": str(seed)})


def spherical_fibonacci(n: int) -> PointSet:
	"""Golden-angle spiral: z_j = 1 - (2j+1)/N, φ_j = 2π j φ_g."""
	_check_n(n)
	j = np.arange(n)
	z = 1 - (2 * j + 1) / n
	phi = 2 * np.pi * np.mod(j * GOLDEN_FRACTION, 1.0)
	rho = np.sqrt(1 - z * z)
	points = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)
	return PointSet(ManifoldSpec.sphere(), points, None, {
		"method": GeneratorMethod.SPHERICAL_FIBONACCI.value,
		"variant": "offset",
	})


def load_spherical_design(path: Path) -> PointSet:
	"""Read a spherical design table (one `x y z` row per point) and attach uniform weights 1/N.

	Rows within 1e-3 of unit length are renormalized; the largest deviation is recorded in
	the `max_norm_deviation` header entry.

	Raises:
		PointSetFormatError: On unreadable or malformed files, or rows far from the unit sphere.
	"""

	try:
		text = path.read_text(encoding="utf-8")
	except OSError as exc:
		raise PointSetFormatError(f"cannot read {str(path)!r}: {exc.strerror}") from None

	_, data = parse_rows(text)
	if data.shape[1] != 3:
		raise PointSetFormatError(f"expected 3 columns (x y z) in a spherical design, got {data.shape[1]}")

	norms = np.linalg.norm(data, axis=1)
	deviation = float(np.max(np.abs(norms - 1)))
	if deviation > DESIGN_NORM_LIMIT:
		row = int(np.argmax(np.abs(norms - 1)))
		raise PointSetFormatError(f"row {row + 1} has norm {norms[row]!r}, too far from the unit sphere")

	n = data.shape[0]
	return PointSet(ManifoldSpec.sphere(), data / norms[:, None], np.full(n, 1 / n), {
		"method": GeneratorMethod.SPHERICAL_DESIGN_FILE.value,
		"source": path.name,
		"max_norm_deviation": format_float(deviation),
		"renormalized": "yes" if deviation > DESIGN_NORM_TOL else "no",
	})


def generate(spec: GeneratorSpec) -> PointSet:
	"""Produce the point set a `GeneratorSpec` describes."""
	d = spec.manifold.dim
	match spec.method:
		case GeneratorMethod.HALTON:
			return halton(spec.n, d)
		case GeneratorMethod.SOBOL:
			return sobol(spec.n, d, spec.scramble)
		case GeneratorMethod.FIBONACCI_LATTICE:
			return fibonacci_lattice(fibonacci_index(spec.n))
		case GeneratorMethod.KOROBOV_LATTICE:
			return korobov_lattice(spec.n, d, spec.korobov_a)
		case GeneratorMethod.LHS:
			return lhs(spec.n, d, spec.seed)
		case GeneratorMethod.UNIFORM_RANDOM:
			return uniform_random(spec.n, spec.manifold, spec.seed)
		case GeneratorMethod.SPHERICAL_FIBONACCI:
			return spherical_fibonacci(spec.n)
		case GeneratorMethod.SPHERICAL_DESIGN_FILE:
			return load_spherical_design(spec.path)  # type: ignore[arg-type]
	raise GeneratorError(f"Unknown generator {spec.method!r}")
