"""Rich text configuration."""

import asyncclick as click
import rich.console
import rich.theme
import rich.traceback


# theme with custom styles
THEME = rich.theme.Theme({
	"diag.issue.fatal": "bold red1 on bright_white",
	"diag.issue.error": "bold red1",
	"diag.issue.warning": "dark_orange",
	"diag.issue.notice": "cyan",

	"diag.subject": "spring_green3",
	"diag.code": "deep_pink3",

	"method.deterministic": "spring_green3",
	"method.stochastic": "yellow3",
	"method.anneal": "medium_purple1",

	"run.ok": "spring_green3",
	"run.failed": "red1",

	"param.name": "grey62",
	"param.value": "bold",
}, inherit=True)


# shared global console
CONSOLE = rich.console.Console(
	theme = THEME,
	# diagnostics go to stderr so CSV/JSON on stdout stays clean
	stderr = True,
)


# use rich for pretty exceptions
rich.traceback.install(suppress=[click])
