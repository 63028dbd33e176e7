"""Exception hierarchy shared by the library and the CLI."""


class ToolkitError(Exception):
	"""Base class for all errors raised by the toolkit."""

	# CLI exit code used when this error reaches the command layer
	exit_code = 2


class UsageError(ToolkitError):
	"""Raised for invalid parameters, unsupported pairings and malformed inputs."""
	exit_code = 1


class NumericalError(ToolkitError):
	"""Raised when a numerical procedure fails (non-convergence, singular systems, non-finite values)."""
	exit_code = 2


class GeometryError(UsageError):
	"""Invalid manifold parameters, dimension mismatches or points outside a map's domain."""

class PointSetFormatError(UsageError):
	"""A point-set file could not be parsed."""

class EnergyError(UsageError):
	"""Invalid energy parameters or configurations with infinite energy."""

class GeneratorError(UsageError):
	"""A baseline generator was asked for something it cannot produce."""

class QualitativeOnlyError(UsageError):
	"""The manifold has no closed-form Laplacian eigenbasis to evaluate against."""

class AnnealError(NumericalError):
	"""The Langevin integrator produced non-finite values."""

class ProjectionError(NumericalError):
	"""A constraint projection failed (Newton non-convergence or singular constraint gradient)."""

class WeightSolveError(NumericalError):
	"""The kernel matrix could not be factorized, even with diagonal jitter."""
