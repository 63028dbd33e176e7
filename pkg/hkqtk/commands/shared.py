"""Shared code for resolving options, building point sets and writing output."""

from __future__ import annotations

from typing import Any, Callable, Sequence

from pathlib import Path
import csv
import io
import json

import asyncclick as click
import attrs
from rich import box
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table
from rich.text import Text

from hkqtk.annealer import anneal, AnnealConfig, AnnealResult, InitKind
from hkqtk.baselines import generate, GeneratorMethod, GeneratorSpec
from hkqtk.config import AnnealFields, config_json, EnergyFields, ManifoldFields
from hkqtk.constants import CONFIG_HEADER_KEY, TOOLKIT_VERSION
from hkqtk.diagnostics import DiagnosticBook
from hkqtk.energy import default_bandwidth, EnergySpec, TorusKernel
from hkqtk.errors import UsageError
from hkqtk.geometry import ManifoldKind, ManifoldSpec
from hkqtk.pointset import PointSet, read_pointset
from hkqtk.rt import CONSOLE
from hkqtk.types import OutputFormat
from hkqtk.util import atomic_write_text


DEFAULT_ALPHA = 0.1
DEFAULT_DISK_RADIUS = 0.8

ANNEAL_METHODS = {
	"gaussian-anneal": "gaussian",
	"riesz-anneal": "riesz",
}

# methods whose output depends on the seed
STOCHASTIC_METHODS = frozenset({"lhs", "uniform", *ANNEAL_METHODS})

WEIGHTS_SUFFIX = "+weights"


def known_methods() -> list[str]:
	"""Every point-set method name accepted by `generate` and `bench`."""
	return [m.value for m in GeneratorMethod if m != GeneratorMethod.SPHERICAL_DESIGN_FILE] + list(ANNEAL_METHODS)


def split_method(name: str) -> tuple[str, bool]:
	"""Split an optional `+weights` suffix off a method name."""
	if name.endswith(WEIGHTS_SUFFIX):
		return name[:-len(WEIGHTS_SUFFIX)], True
	return name, False


def manifold_from_config(cfg: ManifoldFields) -> ManifoldSpec:
	try:
		kind = ManifoldKind(cfg.manifold)
	except ValueError:
		raise UsageError(f"Unknown manifold {cfg.manifold!r}") from None
	match kind:
		case ManifoldKind.TORUS:
			return ManifoldSpec.torus(cfg.d)
		case ManifoldKind.SPHERE:
			m = ManifoldSpec.sphere()
		case ManifoldKind.DENTED_SPHERE:
			m = ManifoldSpec.dented_sphere(cfg.alpha if cfg.alpha is not None else DEFAULT_ALPHA)
		case ManifoldKind.COMPACT_HYPERBOLOID:
			m = ManifoldSpec.hyperboloid(cfg.r if cfg.r is not None else DEFAULT_DISK_RADIUS)
	if cfg.d != 2:
		raise UsageError(f"The {kind.value} manifold is two-dimensional; --d must be 2")
	return m


def resolve_bandwidth(cfg: EnergyFields, n: int, m: ManifoldSpec) -> float:
	return cfg.t if cfg.t is not None else default_bandwidth(n, m.dim, cfg.theta)


def torus_kernel_from_config(cfg: EnergyFields) -> TorusKernel:
	try:
		return TorusKernel(cfg.torus_kernel)
	except ValueError:
		raise UsageError(f"Unknown torus kernel {cfg.torus_kernel!r}") from None


def energy_for_method(method: str, cfg: EnergyFields, n: int, m: ManifoldSpec) -> EnergySpec:
	if ANNEAL_METHODS[method] == "gaussian":
		return EnergySpec.gaussian(resolve_bandwidth(cfg, n, m), torus_kernel=torus_kernel_from_config(cfg))
	return EnergySpec.riesz(cfg.s if cfg.s is not None else float(m.dim))


def anneal_config(cfg: AnnealFields, seed: int, init: str | None = None) -> AnnealConfig:
	try:
		init_kind = InitKind(init) if init is not None else None
	except ValueError:
		raise UsageError(f"Unknown initializer {init!r}") from None
	return AnnealConfig(
		dt = cfg.dt,
		steps = cfg.steps,
		gamma = cfg.gamma,
		cool_C = cfg.cool_c,
		seed = seed,
		trace_every = cfg.trace_every,
		init = init_kind,
	)


@attrs.define
class BuiltPointSet:
	pointset: PointSet
	anneal: AnnealResult | None = None


def build_pointset(
	cfg: Any,
	method: str,
	n: int,
	seed: int,
	init: str | None = None,
	init_file: str | None = None,
	on_record: Callable[[int, float], None] | None = None,
) -> BuiltPointSet:
	"""Produce one (unweighted) point set with a baseline generator or by annealing.

	`cfg` supplies the manifold, energy and annealing fields.
	"""

	m = manifold_from_config(cfg)

	if method in ANNEAL_METHODS:
		espec = energy_for_method(method, cfg, n, m)
		initial = read_pointset(Path(init_file), m) if init_file is not None else None
		if initial is not None and init is None:
			init = InitKind.FROM_FILE.value
		result = anneal(m, n, espec, anneal_config(cfg, seed, init), initial=initial, on_record=on_record)
		return BuiltPointSet(result.best.with_meta(method=method), result)

	try:
		gen = GeneratorMethod(method)
	except ValueError:
		raise UsageError(f"Unknown method {method!r} (expected one of: {', '.join(known_methods())})") from None
	if gen == GeneratorMethod.SPHERICAL_DESIGN_FILE:
		raise UsageError("Spherical designs are read with `hkqtk designs import`")

	spec = GeneratorSpec(gen, n, m, seed=seed, korobov_a=getattr(cfg, "korobov_a", None), scramble=getattr(cfg, "scramble", None))
	return BuiltPointSet(generate(spec))


def stamp(ps: PointSet, cfg: Any) -> PointSet:
	"""Attach the resolved run configuration and toolkit version to a point set's header."""
	return ps.with_meta(**{CONFIG_HEADER_KEY: config_json(cfg), "hkqtk_version": TOOLKIT_VERSION})


def render_records(
	records: Sequence[dict[str, Any]],
	fields: Sequence[str],
	fmt: OutputFormat,
	meta: dict[str, str] | None = None,
) -> str:
	"""Render table rows as CSV (header line first) or as a JSON array of objects.

	With `meta`, CSV output starts with `# key=value` lines and JSON output becomes
	`{"meta": {...}, "rows": [...]}`.
	"""

	if fmt == OutputFormat.JSON:
		rows = [{k: row[k] for k in fields} for row in records]
		return json.dumps(rows if meta is None else {"meta": meta, "rows": rows}, indent=1) + "\n"
	buf = io.StringIO()
	for key, value in (meta or {}).items():
		buf.write(f"# {key}={value}\n")
	writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n", extrasaction="ignore")
	writer.writeheader()
	writer.writerows(records)
	return buf.getvalue()


def emit(text: str, out: Path | None):
	"""Write command output atomically to `out`, or to stdout when no path was given."""
	if out is None:
		click.echo(text, nl=False)
	else:
		atomic_write_text(out, text)


def make_progress() -> Progress:
	return Progress(
		SpinnerColumn(),
		TextColumn("[progress.description]{task.description}"),
		BarColumn(),
		TimeElapsedColumn(),
		console = CONSOLE,
	)


def print_parameters(title: str, params: dict[str, Any]):
	"""Print resolved parameters (verbose mode)."""
	grid = Table.grid(padding=(0, 2))
	for key, value in params.items():
		grid.add_row(Text(key, "param.name"), Text(str(value), "param.value"))
	CONSOLE.print(Text(title, style="cyan underline"), grid, style="dim")


def print_issue_summary(book: DiagnosticBook, title: str = "Run Summary"):
	"""Print the diagnostic summary panel if anything was recorded."""
	if not book.get_issues():
		return
	table = book.rich_issue_summary(Table(title=Text("Diagnostics", "orange3 underline"), title_justify="left", box=box.MINIMAL))
	CONSOLE.print("", Panel(table, title=title, expand=False, border_style="cyan"))


# option bundles shared by `generate` and `bench`

def manifold_options(func):
	for option in reversed([
		click.option("--manifold", type=click.Choice([k.value for k in ManifoldKind]), default=None, help="Manifold to place points on."),
		click.option("--d", type=click.IntRange(min=1), default=None, help="Torus dimension."),
		click.option("--alpha", type=float, default=None, help="Dent strength of the dented sphere."),
		click.option("--r", type=float, default=None, help="Disk radius of the compact hyperboloid."),
		click.option("--n", type=click.IntRange(min=1), default=None, help="Number of points."),
	]):
		func = option(func)
	return func


torus_kernel_option = click.option("--torus-kernel", type=click.Choice([k.value for k in TorusKernel]), default=None,
	help="Periodic treatment of the Gaussian kernel on the torus (default: wrapped).")


def energy_options(func):
	for option in reversed([
		click.option("--t", type=float, default=None, help="Gaussian bandwidth (default: theta * N^(-2/d))."),
		click.option("--theta", type=float, default=None, help="Bandwidth constant used when --t is not given."),
		click.option("--s", type=float, default=None, help="Riesz exponent (default: d)."),
		torus_kernel_option,
	]):
		func = option(func)
	return func


def anneal_options(func):
	for option in reversed([
		click.option("--dt", type=float, default=None, help="Langevin step size (default: 0.05 * N^(-1/d))."),
		click.option("--steps", type=click.IntRange(min=1), default=None, help="Number of annealing steps."),
		click.option("--gamma", type=float, default=None, help="Friction coefficient."),
		click.option("--cool-c", type=float, default=None, help="Cooling constant (default: 0.1 * initial energy / N)."),
		click.option("--trace-every", type=click.IntRange(min=1), default=None, help="Energy recording stride."),
	]):
		func = option(func)
	return func


def lattice_options(func):
	for option in reversed([
		click.option("--korobov-a", type=click.IntRange(min=1), default=None, help="Korobov generator (default: searched)."),
		click.option("--scramble", type=click.IntRange(0, 2**64 - 1), default=None, help="Scramble seed for Sobol points."),
	]):
		func = option(func)
	return func
