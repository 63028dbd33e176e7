from __future__ import annotations

from pathlib import Path
import hashlib

import asyncclick as click
import attrs

from hkqtk.commands import root
from hkqtk.commands.shared import emit, render_records
from hkqtk.config import config_json, EvalConfig, resolve_config
from hkqtk.constants import CONFIG_HEADER_KEY, TOOLKIT_VERSION
from hkqtk.errors import UsageError
from hkqtk.evaluation import ERROR_FIELDS, error_spectrum, ErrorSpectrum
from hkqtk.pointset import read_pointset
from hkqtk.rt import CONSOLE
from hkqtk.types import AppConfig, OutputFormat


@attrs.define(frozen=True, eq=False)
class EvalResult:
	spectrum: ErrorSpectrum
	# resolved config and input provenance, written ahead of the table
	meta: dict[str, str]


def run_eval(cfg: EvalConfig) -> EvalResult:
	"""Per-eigenfunction and cumulative integration errors of the point set in `cfg.input`."""

	if cfg.input is None:
		raise UsageError("An input point-set file is required")
	path = Path(cfg.input)
	source = read_pointset(path)
	spectrum = error_spectrum(source, cfg.count)

	meta = {
		CONFIG_HEADER_KEY: config_json(cfg),
		"hkqtk_version": TOOLKIT_VERSION,
		"input_sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
		"input_n": str(source.n),
		"input_weighted": "yes" if source.weights is not None else "no",
	}
	if CONFIG_HEADER_KEY in source.meta:
		meta["input_config"] = source.meta[CONFIG_HEADER_KEY]
	return EvalResult(spectrum, meta)


def render_spectrum(result: EvalResult, fmt: OutputFormat) -> str:
	return render_records(result.spectrum.records(), ERROR_FIELDS, fmt, meta=result.meta)


@root.command("eval")
@click.argument("input", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--count", type=click.IntRange(min=1), default=None, help="Number of eigenfunctions to evaluate.")
@click.pass_context
def evaluate(ctx: click.Context, input: str | None, count: int | None):
	"""Evaluate integration errors of the point set in INPUT against Laplacian eigenfunctions."""

	app_cfg: AppConfig = ctx.ensure_object(AppConfig)
	cfg = resolve_config(EvalConfig, app_cfg.file_values, {"input": input, "count": count})

	with CONSOLE.status(f"Evaluating {cfg.count} eigenfunctions"):
		result = run_eval(cfg)

	if app_cfg.verbose:
		spectrum = result.spectrum
		CONSOLE.print(f"E_<=s at s={len(spectrum)}: {spectrum.cumulative_at(len(spectrum))!r}", style="dim")

	emit(render_spectrum(result, app_cfg.format), app_cfg.out)
