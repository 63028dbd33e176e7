"""Contains CLI commands exposed to the user."""

from pathlib import Path

import asyncclick as click

from hkqtk.config import load_config_file
from hkqtk.constants import TOOLKIT_DESCRIPTION
from hkqtk.diagnostics import DiagnosticBook
from hkqtk.types import AppConfig, OutputFormat


# define the "root" command group which contains all commands and subgroups
@click.group(
	# display application description
	help = TOOLKIT_DESCRIPTION,

	# global context settings for Click
	context_settings = dict(
		# allow using -h in addition to --help
		help_option_names = ["-h", "--help"],
	),
)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Base seed for every stochastic step.")
@click.option("-o", "--out", type=click.Path(dir_okay=True, path_type=Path), default=None,
	help="Output file (generate, weights, eval, designs import) or directory (bench). Defaults to stdout.")
@click.option("--format", "fmt", type=click.Choice([f.value for f in OutputFormat]), default=None,
	help="Table format for eval and bench output.")
@click.option("-c", "--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
	help="JSON or TOML file with option values (flat keys mirroring the long flag names).")
@click.option("-v", "--verbose", is_flag=True, help="Show more verbose information.")
@click.pass_context
def root(ctx: click.Context, seed: int | None, out: Path | None, fmt: str | None, config_path: Path | None, verbose: bool):
	# create app config object
	app_cfg = ctx.ensure_object(AppConfig)

	app_cfg.verbose = verbose
	app_cfg.seed = seed
	app_cfg.out = out

	if config_path is not None:
		app_cfg.file_values = load_config_file(DiagnosticBook(), config_path)

	if fmt is not None:
		app_cfg.format = OutputFormat(fmt)


# define submodules
__all__ = [
	"bench",
	"designs",
	"evaluate",
	"generate",
	"version",
	"weights",
]

# import submodules
from . import *
