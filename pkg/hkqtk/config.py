"""Run configuration records, config-file loading and the flag > file > default merge."""

from __future__ import annotations

from typing import Any, TypeVar

from pathlib import Path
import json

import attrs
from cattrs.errors import BaseValidationError
from cattrs.preconf.json import make_converter
import marshmallow

from hkqtk import tomllib
from hkqtk.diagnostics import DiagnosticBook, Severity
from hkqtk.errors import UsageError
from hkqtk.schemas.config import RunConfigSchema
from hkqtk.schemas.formatting import format_config_errors


CONVERTER = make_converter()

C = TypeVar("C")


class ConfigError(UsageError):
	"""The config file could not be read or failed validation."""


@attrs.define(frozen=True, slots=False)
class ManifoldFields:
	manifold: str = "torus"
	d: int = 2
	# dent strength (dented sphere; defaults to 1/10)
	alpha: float | None = None
	# disk radius (hyperboloid; defaults to 4/5)
	r: float | None = None


@attrs.define(frozen=True, slots=False)
class EnergyFields:
	# Gaussian bandwidth (default theta * N^(-2/d))
	t: float | None = None
	theta: float = 1.0
	# Riesz exponent (default d)
	s: float | None = None
	# "wrapped" (periodic image sum) or "min-image"; only read for the Gaussian energy on the torus
	torus_kernel: str = "wrapped"


@attrs.define(frozen=True, slots=False)
class AnnealFields:
	dt: float | None = None
	steps: int = 200_000
	gamma: float = 1.0
	cool_c: float | None = None
	trace_every: int = 100


@attrs.define(frozen=True, slots=False)
class GenerateConfig(AnnealFields, EnergyFields, ManifoldFields):
	n: int | None = None
	method: str = "halton"
	seed: int = 0
	init: str | None = None
	init_file: str | None = None
	korobov_a: int | None = None
	scramble: int | None = None
	# where to write the energy trace of annealing runs
	trace: str | None = None


@attrs.define(frozen=True, slots=False)
class WeightsConfig(EnergyFields):
	input: str | None = None


@attrs.define(frozen=True, slots=False)
class EvalConfig:
	input: str | None = None
	count: int = 100


@attrs.define(frozen=True, slots=False)
class BenchConfig(AnnealFields, EnergyFields, ManifoldFields):
	n: int | None = None
	methods: list[str] = attrs.field(factory=lambda: ["halton", "uniform"])
	runs: int = 10
	seed: int = 0
	count: int = 200
	# worker threads (default: one per CPU)
	jobs: int | None = None
	korobov_a: int | None = None
	scramble: int | None = None


@attrs.define(frozen=True, slots=False)
class DesignImportConfig:
	input: str | None = None
	# highest degree checked for exactness
	lmax: int = 20
	tol: float = 1e-18


def load_config_file(book: DiagnosticBook, path: Path) -> dict[str, Any]:
	"""Read and validate a `.json` or `.toml` config file into a flat dict of option values.

	Raises:
		ConfigError: If the file cannot be parsed or fails schema validation (after recording an issue).
	"""

	pen = book.bind(str(path))

	try:
		raw = path.read_bytes()
	except OSError as exc:
		pen.issue(Severity.ERROR, "config-unreadable", f"Cannot read config file: {exc.strerror}")
		raise ConfigError(f"cannot read config file {str(path)!r}") from None

	try:
		if path.suffix.lower() == ".toml":
			raw_data = tomllib.loads(raw.decode("utf-8"))
		else:
			raw_data = json.loads(raw)
	except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as exc:
		pen.issue(Severity.ERROR, "config-invalid-syntax", f"Failed to parse config file: {exc}")
		raise ConfigError(f"config file {str(path)!r} is not valid {path.suffix.lstrip('.') or 'JSON'}") from None

	if not isinstance(raw_data, dict):
		pen.issue(Severity.ERROR, "config-not-a-table", "Config file must hold a single table of key/value pairs")
		raise ConfigError(f"config file {str(path)!r} is not a table")

	schema = RunConfigSchema()
	try:
		cleaned: dict[str, Any] = schema.load(raw_data)
	except marshmallow.ValidationError as exc:
		pen.issue(Severity.ERROR, "config-schema-failure",
			format_config_errors(exc.messages, "Config file failed schema validation", schema.fields.keys()))
		raise ConfigError(f"config file {str(path)!r} failed validation") from None

	return cleaned


def resolve_config(cls: type[C], file_values: dict[str, Any], flags: dict[str, Any]) -> C:
	"""Merge option values for one command: flags override file values, which override the defaults of `cls`.

	Flags left at `None` are treated as not given.
	"""

	names = attrs.fields_dict(cls)  # type: ignore[arg-type]
	unknown = sorted(set(flags) - set(names))
	if unknown:
		raise UsageError(f"Unexpected options for this command: {', '.join(unknown)}")

	values = {k: v for k, v in file_values.items() if k in names and v is not None}
	values.update((k, v) for k, v in flags.items() if v is not None)

	try:
		return CONVERTER.structure(values, cls)
	except (BaseValidationError, ValueError, TypeError) as exc:
		raise UsageError(f"Invalid option values: {exc}") from None


def config_json(cfg: Any) -> str:
	"""Compact, key-sorted JSON of a resolved config (the `config` header entry)."""
	return json.dumps(CONVERTER.unstructure(cfg), sort_keys=True, separators=(",", ":"))


def config_from_json(cls: type[C], text: str) -> C:
	"""Rebuild a config record from its `config` header entry."""
	try:
		return CONVERTER.structure(json.loads(text), cls)
	except (json.JSONDecodeError, BaseValidationError, ValueError, TypeError) as exc:
		raise ConfigError(f"Invalid config header: {exc}") from None
