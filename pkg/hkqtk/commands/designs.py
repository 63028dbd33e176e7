from __future__ import annotations

from pathlib import Path

import asyncclick as click
import attrs
from rich.text import Text

from hkqtk.baselines import load_spherical_design
from hkqtk.commands import root
from hkqtk.commands.shared import emit, print_issue_summary, stamp
from hkqtk.config import DesignImportConfig, resolve_config
from hkqtk.diagnostics import DiagnosticBook
from hkqtk.errors import UsageError
from hkqtk.evaluation import exactness_degree
from hkqtk.pointset import PointSet
from hkqtk.rt import CONSOLE
from hkqtk.types import AppConfig


@attrs.define(frozen=True)
class ImportedDesign:
	pointset: PointSet
	# largest degree integrated exactly (to the configured tolerance)
	degree: int


def run_design_import(cfg: DesignImportConfig, book: DiagnosticBook) -> ImportedDesign:
	"""Load a spherical design table and measure the degree it integrates exactly."""

	if cfg.input is None:
		raise UsageError("An input design file is required")
	path = Path(cfg.input)
	pen = book.bind(path.name)

	ps = load_spherical_design(path)
	if ps.meta.get("renormalized") == "yes":
		pen.notice("design-renormalized", f"Rows were renormalized (max norm deviation {ps.meta['max_norm_deviation']})")

	degree = exactness_degree(ps, cfg.lmax, cfg.tol)
	if degree == 0:
		pen.warn("design-not-exact", f"The file does not integrate even degree 1 exactly (tolerance {cfg.tol:g})")

	return ImportedDesign(stamp(ps.with_meta(exactness_degree=str(degree)), cfg), degree)


@root.group()
def designs():
	"""Work with published spherical designs."""


@designs.command("import")
@click.argument("input", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--lmax", type=click.IntRange(min=1), default=None, help="Highest degree checked for exactness.")
@click.option("--tol", type=float, default=None, help="Largest error still counted as exact.")
@click.pass_context
def import_(ctx: click.Context, input: str | None, lmax: int | None, tol: float | None):
	"""Import the spherical design in INPUT as a weighted point-set file."""

	app_cfg: AppConfig = ctx.ensure_object(AppConfig)
	cfg = resolve_config(DesignImportConfig, app_cfg.file_values, {"input": input, "lmax": lmax, "tol": tol})
	book = DiagnosticBook()

	imported = run_design_import(cfg, book)
	CONSOLE.print(Text.assemble(
		f"Imported {imported.pointset.n} points, exact up to degree ",
		(str(imported.degree), "method.deterministic"),
		f" (checked to {cfg.lmax})",
	))

	emit(imported.pointset.dumps(), app_cfg.out)
	print_issue_summary(book, "Import Summary")
