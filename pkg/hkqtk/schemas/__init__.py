"""Contains Marshmallow schemas and supporting code."""

from marshmallow import validate, ValidationError


# method names: lowercase words joined by hyphens, optionally suffixed with "+weights"
VALIDATORS_METHOD_NAME = [
	validate.Regexp(r"^[a-z]+(-[a-z]+)*(\+weights)?$", error="Must be a method name such as 'halton' or 'gaussian-anneal+weights'."),
]


def validate_unique(data: list):
	"""Marshmallow validator to ensure that a list does not contain duplicate items."""
	if len(set(data)) != len(data):
		raise ValidationError("Items must be unique.")
