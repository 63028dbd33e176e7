from marshmallow import fields, RAISE, Schema, validate

from . import validate_unique, VALIDATORS_METHOD_NAME


MANIFOLD_NAMES = ["torus", "sphere", "dented-sphere", "hyperboloid"]
TORUS_KERNEL_NAMES = ["wrapped", "min-image"]
INIT_NAMES = ["halton", "spherical-fibonacci", "dented-lift", "disk-uniform-lift", "from-file"]


def _positive_float(**kwargs) -> fields.Float:
	return fields.Float(allow_none=True, validate=validate.Range(min=0, min_inclusive=False), **kwargs)


def _count(minimum: int = 1) -> fields.Integer:
	return fields.Integer(allow_none=True, strict=True, validate=validate.Range(min=minimum))


class RunConfigSchema(Schema):
	"""Marshmallow schema for `--config` files (flat keys mirroring the long flag names)."""

	class Meta:
		unknown = RAISE

	# manifold
	manifold = fields.String(allow_none=True, validate=validate.OneOf(MANIFOLD_NAMES))
	d = _count()
	alpha = _positive_float()
	r = fields.Float(allow_none=True, validate=validate.Range(min=0, max=1, min_inclusive=False, max_inclusive=False))
	n = _count()

	# point-set construction
	method = fields.String(allow_none=True, validate=VALIDATORS_METHOD_NAME)
	methods = fields.List(fields.String(validate=VALIDATORS_METHOD_NAME), allow_none=True, validate=validate_unique)
	seed = fields.Integer(allow_none=True, strict=True, validate=validate.Range(min=0, max=2**64 - 1))
	korobov_a = _count(minimum=1)
	scramble = fields.Integer(allow_none=True, strict=True, validate=validate.Range(min=0, max=2**64 - 1))

	# energy
	t = _positive_float()
	theta = _positive_float()
	s = _positive_float()
	torus_kernel = fields.String(allow_none=True, validate=validate.OneOf(TORUS_KERNEL_NAMES))

	# annealing
	dt = _positive_float()
	steps = _count()
	gamma = _positive_float()
	cool_c = _positive_float()
	trace_every = _count()
	init = fields.String(allow_none=True, validate=validate.OneOf(INIT_NAMES))
	init_file = fields.String(allow_none=True)
	trace = fields.String(allow_none=True)

	# evaluation and ensembles
	input = fields.String(allow_none=True)
	count = _count()
	runs = _count()
	jobs = _count()
	lmax = _count()
	tol = _positive_float()
