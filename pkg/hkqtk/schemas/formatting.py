"""Rendering of config-file schema failures."""

from typing import Any, Iterable

import difflib

from rich.console import Group, RenderableType
from rich.padding import Padding
from rich.text import Text


STYLE_KEY = "cyan3"
STYLE_QUOTED = "yellow3"
STYLE_HINT = "grey62"


def collapse_to_dotted(messages: dict[Any, Any]) -> dict[str, Any]:
	"""Flatten nested Marshmallow messages into dotted keys (`methods.1`, ...)."""

	out: dict[str, Any] = dict()

	def _collapse(layer: dict[Any, Any], prefix: str):
		for key, val in layer.items():
			if isinstance(val, dict):
				_collapse(val, f"{prefix}{key}.")
			else:
				out[f"{prefix}{key}"] = val

	_collapse(messages, "")
	return out


def format_config_errors(messages: list[str] | dict[str, Any], title: str, known_keys: Iterable[str] = ()) -> RenderableType:
	"""Format schema messages as one line per offending key, suggesting the closest valid key for unknown ones."""

	known = sorted(known_keys)
	lines: list[RenderableType] = list()

	if not isinstance(messages, dict):
		messages = {"(file)": messages}

	for key, msgs in sorted(collapse_to_dotted(messages).items()):
		text = " ".join(msgs) if isinstance(msgs, list) else str(msgs)
		line = Text.assemble((key, STYLE_KEY), ": ", text)
		line.highlight_regex("'.+?'", STYLE_QUOTED)

		if "Unknown field." in text and known:
			close = difflib.get_close_matches(key, known, n=1)
			if close:
				line.append(f" (did you mean '{close[0]}'?)", STYLE_HINT)
		lines.append(line)

	return Group(title, Padding(Group(*lines), (0, 0, 0, 2)))
