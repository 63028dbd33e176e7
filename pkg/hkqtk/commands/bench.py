from __future__ import annotations

from typing import Any

from pathlib import Path
import functools
import os

import anyio
import asyncclick as click
import attrs
from rich import box
from rich.panel import Panel
from rich.progress import Progress
from rich.table import Table
from rich.text import Text

from hkqtk.commands import root
from hkqtk.commands.shared import (anneal_options, ANNEAL_METHODS, build_pointset, energy_options, known_methods,
                                   lattice_options, make_progress, manifold_from_config, manifold_options,
                                   print_issue_summary, render_records, resolve_bandwidth, split_method,
                                   STOCHASTIC_METHODS, torus_kernel_from_config)
from hkqtk.config import BenchConfig, config_json, resolve_config
from hkqtk.diagnostics import DiagnosticBook, Severity
from hkqtk.errors import QualitativeOnlyError, UsageError
from hkqtk.evaluation import ensemble_stats, ERROR_FIELDS, error_spectrum, ErrorSpectrum, STAT_FIELDS, stats_records
from hkqtk.geometry import ManifoldKind
from hkqtk.pointset import format_float
from hkqtk.rt import CONSOLE
from hkqtk.types import AppConfig, OutputFormat
from hkqtk.util import atomic_write_text
from hkqtk.weights import solve_weights_report


ENSEMBLE_FIELDS = ("method", "run_id", "seed", *ERROR_FIELDS)
BENCH_STAT_FIELDS = ("method", "runs", *STAT_FIELDS)
RUN_FIELDS = ("method", "run_id", "seed", "status", "min_weight", "message")

QUANTITIES = {"E_lambda": "e_lambda", "E_cum": "e_cum"}


@attrs.define
class RunOutcome:
	method: str
	run_id: int
	seed: int
	spectrum: ErrorSpectrum | None = None
	min_weight: float | None = None
	error: str | None = None

	@property
	def ok(self) -> bool:
		return self.spectrum is not None


@attrs.define
class BenchReport:
	config: BenchConfig
	outcomes: dict[str, list[RunOutcome]]

	def successful(self, method: str) -> list[RunOutcome]:
		return [o for o in self.outcomes[method] if o.ok]

	def failed_methods(self) -> list[str]:
		return [method for method in self.outcomes if not self.successful(method)]

	def ensemble_records(self) -> list[dict[str, Any]]:
		rows = list()
		for method, outcomes in self.outcomes.items():
			for outcome in outcomes:
				if outcome.spectrum is None:
					continue
				for row in outcome.spectrum.records():
					rows.append({"method": method, "run_id": outcome.run_id, "seed": outcome.seed, **row})
		return rows

	def stat_records(self) -> list[dict[str, Any]]:
		rows = list()
		for method in self.outcomes:
			spectra = [o.spectrum for o in self.successful(method)]
			if not spectra:
				continue
			for quantity, attr in QUANTITIES.items():
				for row in stats_records(ensemble_stats(spectra, attr), quantity):  # type: ignore[arg-type]
					rows.append({"method": method, "runs": len(spectra), **row})
		return rows

	def run_records(self) -> list[dict[str, Any]]:
		return [{
			"method": method,
			"run_id": o.run_id,
			"seed": o.seed,
			"status": "ok" if o.ok else "failed",
			"min_weight": "" if o.min_weight is None else format_float(o.min_weight),
			"message": o.error or "",
		} for method, outcomes in self.outcomes.items() for o in outcomes]

	def median_cumulative(self, method: str, s: int) -> float:
		"""Median E_≤s over the successful runs of a method."""
		stats = ensemble_stats([o.spectrum for o in self.successful(method)], "e_cum")  # type: ignore[misc]
		return stats[s - 1].median


def _single_run(cfg: BenchConfig, method: str, run_id: int, seed: int) -> RunOutcome:
	"""One ensemble member (runs in a worker thread)."""

	base, weighted = split_method(method)
	outcome = RunOutcome(method, run_id, seed)
	try:
		assert cfg.n is not None
		ps = build_pointset(cfg, base, cfg.n, seed).pointset
		if weighted:
			solution = solve_weights_report(ps, resolve_bandwidth(cfg, ps.n, ps.manifold), torus_kernel_from_config(cfg))
			ps = ps.with_weights(solution.weights)
			outcome.min_weight = solution.min_weight
		outcome.spectrum = error_spectrum(ps, cfg.count)
	# any failure (toolkit, numpy or scipy) is recorded against this run only
	except Exception as exc:
		outcome.error = f"{type(exc).__name__}: {exc}"
	return outcome


def plan_runs(cfg: BenchConfig) -> list[tuple[str, int, int]]:
	"""(method, run_id, seed) for every ensemble member; deterministic methods run once."""
	plan = list()
	for method in cfg.methods:
		base, _ = split_method(method)
		runs = cfg.runs if base in STOCHASTIC_METHODS else 1
		plan.extend((method, run_id, cfg.seed + run_id) for run_id in range(runs))
	return plan


def _validate(cfg: BenchConfig):
	if cfg.n is None:
		raise UsageError("The number of points (--n) is required")
	if not cfg.methods:
		raise UsageError("At least one method is required")
	if len(set(cfg.methods)) != len(cfg.methods):
		raise UsageError("Methods must be unique")
	for method in cfg.methods:
		base, _ = split_method(method)
		if base not in known_methods():
			raise UsageError(f"Unknown method {method!r} (expected one of: {', '.join(known_methods())}, optionally with '+weights')")
	kind = manifold_from_config(cfg).kind
	if kind not in (ManifoldKind.TORUS, ManifoldKind.SPHERE):
		raise QualitativeOnlyError(f"The {kind.value} manifold has no closed-form eigenbasis to benchmark against")


async def run_bench(cfg: BenchConfig, book: DiagnosticBook, progress: Progress | None = None) -> BenchReport:
	"""Run every (method, run) pair on a worker pool and collect their error spectra."""

	_validate(cfg)
	plan = plan_runs(cfg)
	limiter = anyio.CapacityLimiter(cfg.jobs or os.cpu_count() or 1)
	results: dict[tuple[str, int], RunOutcome] = dict()

	tid = progress.add_task(f"Running {len(plan)} benchmark runs", total=len(plan)) if progress is not None else None

	async def _worker(method: str, run_id: int, seed: int):
		outcome = await anyio.to_thread.run_sync(functools.partial(_single_run, cfg, method, run_id, seed), limiter=limiter)
		results[(method, run_id)] = outcome
		if progress is not None and tid is not None:
			progress.advance(tid)

	async with anyio.create_task_group() as tg:
		for method, run_id, seed in plan:
			tg.start_soon(_worker, method, run_id, seed)

	# reassemble in plan order so output never depends on scheduling
	outcomes: dict[str, list[RunOutcome]] = {method: list() for method in cfg.methods}
	for method, run_id, _ in plan:
		outcome = results[(method, run_id)]
		outcomes[method].append(outcome)
		pen = book.bind(method)
		if not outcome.ok:
			pen.warn("bench-run-failed", f"Run {run_id} (seed {outcome.seed}) failed: {outcome.error}")
		elif outcome.min_weight is not None and outcome.min_weight < 0:
			pen.warn("weights-negative", f"Run {run_id} (seed {outcome.seed}) produced negative weights (min {outcome.min_weight:.3e})")

	return BenchReport(cfg, outcomes)


def write_report(report: BenchReport, out_dir: Path, fmt: OutputFormat):
	"""Write the ensemble, statistics and run-status tables plus the resolved config into `out_dir`."""
	ext = fmt.value
	atomic_write_text(out_dir / f"ensemble.{ext}", render_records(report.ensemble_records(), ENSEMBLE_FIELDS, fmt))
	atomic_write_text(out_dir / f"stats.{ext}", render_records(report.stat_records(), BENCH_STAT_FIELDS, fmt))
	atomic_write_text(out_dir / f"runs.{ext}", render_records(report.run_records(), RUN_FIELDS, fmt))
	atomic_write_text(out_dir / "config.json", config_json(report.config) + "\n")


def check_failures(report: BenchReport, book: DiagnosticBook):
	"""Record a fatal diagnostic (ending the command with exit code 2) when every run of some method failed."""
	failed = report.failed_methods()
	if failed:
		book.issue(Severity.FATAL, None, "bench-method-failed", f"Every run failed for: {', '.join(failed)}")


def _summary_table(report: BenchReport) -> Table:
	table = Table(title=Text("Methods", "cyan underline"), title_justify="left", box=box.MINIMAL)
	for header in ["Method", "Runs", "Failed", f"Median E_<={report.config.count}"]:
		table.add_column(header)
	for method, outcomes in report.outcomes.items():
		base, _ = split_method(method)
		style = "method.anneal" if base in ANNEAL_METHODS else "method.stochastic" if base in STOCHASTIC_METHODS else "method.deterministic"
		ok = report.successful(method)
		median = format_float(report.median_cumulative(method, report.config.count)) if ok else "-"
		failed = len(outcomes) - len(ok)
		table.add_row(Text(method, style), str(len(outcomes)), Text(str(failed), "run.failed" if failed else "run.ok"), median)
	return table


@root.command()
@manifold_options
@click.option("--methods", default=None, help="Comma-separated methods, each optionally suffixed with '+weights'.")
@click.option("--runs", type=click.IntRange(min=1), default=None, help="Runs per stochastic method.")
@click.option("--count", type=click.IntRange(min=1), default=None, help="Number of eigenfunctions to evaluate.")
@click.option("--jobs", type=click.IntRange(min=1), default=None, help="Worker threads (default: one per CPU).")
@energy_options
@anneal_options
@lattice_options
@click.pass_context
async def bench(ctx: click.Context, methods: str | None, **options):
	"""Run ensembles of point-set methods and write error statistics into the --out directory."""

	app_cfg: AppConfig = ctx.ensure_object(AppConfig)
	method_list = [m.strip() for m in methods.split(",") if m.strip()] if methods is not None else None
	cfg = resolve_config(BenchConfig, app_cfg.file_values, {**options, "methods": method_list, "seed": app_cfg.seed})

	if app_cfg.out is None:
		raise UsageError("bench writes several files; pass an output directory with --out")

	book = DiagnosticBook()
	with make_progress() as progress:
		report = await run_bench(cfg, book, progress)

	write_report(report, app_cfg.out, app_cfg.format)

	CONSOLE.print("", Panel(_summary_table(report), title="Bench Summary", expand=False, border_style="cyan"))
	print_issue_summary(book, "Bench Diagnostics")

	check_failures(report, book)
