from __future__ import annotations

from typing import Callable

from pathlib import Path

import asyncclick as click
import attrs

from hkqtk.annealer import trace_csv
from hkqtk.commands import root
from hkqtk.commands.shared import (anneal_options, ANNEAL_METHODS, build_pointset, BuiltPointSet, emit, energy_options,
                                   known_methods, lattice_options, make_progress, manifold_options,
                                   print_issue_summary, print_parameters, stamp)
from hkqtk.config import GenerateConfig, resolve_config
from hkqtk.diagnostics import DiagnosticBook
from hkqtk.errors import UsageError
from hkqtk.pointset import PointSet
from hkqtk.rt import CONSOLE
from hkqtk.types import AppConfig
from hkqtk.util import atomic_write_text


# relative energy change over the last tenth of a run above which a notice is raised
SETTLE_NOTICE_THRESHOLD = 1e-3


def run_generate(
	cfg: GenerateConfig,
	book: DiagnosticBook,
	on_record: Callable[[int, float], None] | None = None,
) -> tuple[PointSet, BuiltPointSet, GenerateConfig]:
	"""Build the requested point set and stamp it with its fully resolved configuration."""

	if cfg.n is None:
		raise UsageError("The number of points (--n) is required")

	built = build_pointset(cfg, cfg.method, cfg.n, cfg.seed, cfg.init, cfg.init_file, on_record)

	if built.anneal is not None:
		result = built.anneal
		espec_meta = built.pointset.meta
		cfg = attrs.evolve(
			cfg,
			dt = result.config.dt,
			cool_c = result.config.cool_C,
			init = result.config.init.value if result.config.init is not None else None,
			t = float(espec_meta["t"]) if "t" in espec_meta else cfg.t,
			s = float(espec_meta["s"]) if "s" in espec_meta else cfg.s,
		)
		if result.settle > SETTLE_NOTICE_THRESHOLD:
			book.bind(cfg.method).notice("anneal-not-settled",
				f"Energy still changed by {result.settle:.2e} (relative) over the last tenth of the run; "
				"consider more --steps")

	return stamp(built.pointset, cfg), built, cfg


@root.command()
@manifold_options
@click.option("--method", type=click.Choice(known_methods()), default=None, help="Point-set construction method.")
@energy_options
@anneal_options
@click.option("--init", type=click.Choice(["halton", "spherical-fibonacci", "dented-lift", "disk-uniform-lift", "from-file"]),
	default=None, help="Annealing initializer (default depends on the manifold).")
@click.option("--init-file", type=click.Path(exists=True, dir_okay=False), default=None, help="Point-set file to start annealing from.")
@lattice_options
@click.option("--trace", type=click.Path(dir_okay=False), default=None, help="Write the annealing energy trace (CSV) to this file.")
@click.pass_context
def generate(ctx: click.Context, **options):
	"""Generate a point set with a baseline construction or by Langevin annealing."""

	app_cfg: AppConfig = ctx.ensure_object(AppConfig)
	cfg = resolve_config(GenerateConfig, app_cfg.file_values, {**options, "seed": app_cfg.seed})
	book = DiagnosticBook()

	if app_cfg.verbose:
		print_parameters("Resolved options", attrs.asdict(cfg))

	if cfg.method in ANNEAL_METHODS:
		with make_progress() as progress:
			tid = progress.add_task(f"Annealing {cfg.n} points ({cfg.method})", total=cfg.steps)
			ps, built, cfg = run_generate(cfg, book, lambda step, energy: progress.update(tid, completed=step))
		if app_cfg.verbose and built.anneal is not None:
			CONSOLE.print(f"Best energy {built.anneal.best_energy!r} at step {built.anneal.accepted_step}", style="dim")
	else:
		ps, built, cfg = run_generate(cfg, book)

	emit(ps.dumps(), app_cfg.out)
	if cfg.trace is not None and built.anneal is not None:
		atomic_write_text(Path(cfg.trace), trace_csv(built.anneal))

	print_issue_summary(book, "Generate Summary")
