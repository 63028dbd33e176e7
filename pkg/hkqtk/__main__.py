#!/usr/bin/env python3

import sys

import asyncclick as click
from rich.text import Text

from .commands import root as _cli_root
from .errors import ToolkitError
from .rt import CONSOLE

# hack to silence trio's annoying RuntimeWarning regarding our custom sys.excepthook (from rich)
_old_hook = sys.excepthook
sys.excepthook = sys.__excepthook__
import trio
sys.excepthook = _old_hook


def entrypoint():
	"""Run the main Click entrypoint using the Trio backend.

	Exit codes: 0 on success, 1 for usage errors (bad options, malformed files), 2 for numerical failures.
	"""

	try:
		rv = _cli_root(standalone_mode=False, _anyio_backend="trio")
	except ToolkitError as exc:
		CONSOLE.print(Text.assemble((f"{type(exc).__name__}: ", "diag.issue.error"), str(exc)))
		sys.exit(exc.exit_code)
	except click.ClickException as exc:
		exc.show()
		sys.exit(1)
	except click.Abort:
		CONSOLE.print("Aborted.", style="diag.issue.error")
		sys.exit(1)

	sys.exit(rv if isinstance(rv, int) else 0)


if __name__ == "__main__":
	entrypoint()
