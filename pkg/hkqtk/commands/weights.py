from __future__ import annotations

from pathlib import Path

import asyncclick as click
import attrs

from hkqtk.commands import root
from hkqtk.commands.shared import (emit, print_issue_summary, print_parameters, resolve_bandwidth, stamp, torus_kernel_from_config,
	torus_kernel_option)
from hkqtk.config import resolve_config, WeightsConfig
from hkqtk.constants import CONFIG_HEADER_KEY
from hkqtk.diagnostics import DiagnosticBook
from hkqtk.errors import UsageError
from hkqtk.pointset import format_float, PointSet, read_pointset
from hkqtk.rt import CONSOLE
from hkqtk.types import AppConfig
from hkqtk.weights import solve_weights_report, Solver


def run_weights(cfg: WeightsConfig, book: DiagnosticBook) -> PointSet:
	"""Attach optimal Gaussian-kernel weights to the points of `cfg.input`."""

	if cfg.input is None:
		raise UsageError("An input point-set file is required")
	source = read_pointset(Path(cfg.input))
	pen = book.bind(Path(cfg.input).name)

	t = resolve_bandwidth(cfg, source.n, source.manifold)
	solution = solve_weights_report(source, t, torus_kernel_from_config(cfg))

	if solution.jitter > 0:
		pen.notice("weights-jitter", f"Kernel matrix needed a diagonal jitter of {solution.jitter:g} to factorize")
	if solution.solver == Solver.SYMMETRIC:
		pen.warn("weights-indefinite", f"Kernel matrix is not positive definite at t={t:g}; "
			"the weights are a saddle point of the energy, not its minimizer (use --torus-kernel wrapped)")
	if solution.negative:
		pen.warn("weights-negative", f"Solved weights include negative values (min {solution.min_weight:.3e})")

	meta = {**solution.as_meta(), "weights_t": format_float(t)}
	# keep the provenance of the input points
	if CONFIG_HEADER_KEY in source.meta:
		meta["input_config"] = source.meta[CONFIG_HEADER_KEY]

	cfg = attrs.evolve(cfg, t=t)
	return stamp(source.with_weights(solution.weights, **meta), cfg)


@root.command()
@click.argument("input", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--t", type=float, default=None, help="Gaussian bandwidth (default: theta * N^(-2/d)).")
@click.option("--theta", type=float, default=None, help="Bandwidth constant used when --t is not given.")
@torus_kernel_option
@click.pass_context
def weights(ctx: click.Context, input: str | None, t: float | None, theta: float | None, torus_kernel: str | None):
	"""Solve for optimal quadrature weights of the point set in INPUT."""

	app_cfg: AppConfig = ctx.ensure_object(AppConfig)
	cfg = resolve_config(WeightsConfig, app_cfg.file_values, {"input": input, "t": t, "theta": theta, "torus_kernel": torus_kernel})
	book = DiagnosticBook()

	with CONSOLE.status("Solving for weights"):
		ps = run_weights(cfg, book)

	if app_cfg.verbose:
		print_parameters("Weight solver", {k: v for k, v in ps.meta.items() if k.startswith("weights_")})

	emit(ps.dumps(), app_cfg.out)
	print_issue_summary(book, "Weights Summary")
