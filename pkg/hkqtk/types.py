"""Data-centered types."""

from pathlib import Path
import enum

import attrs


class OutputFormat(enum.Enum):
	CSV = "csv"
	JSON = "json"


@attrs.define
class AppConfig:
	"""Holds application configuration (as set from Click)."""

	# Whether to output verbose messages
	verbose: bool = False

	# Base seed for every stochastic step
	seed: int | None = None

	# Output path (a file for generate/weights/eval, a directory for bench)
	out: Path | None = None

	# Table format for eval/bench output
	format: OutputFormat = OutputFormat.CSV

	# Values loaded from --config (flat keys, already schema-validated)
	file_values: dict = attrs.field(factory=dict)
