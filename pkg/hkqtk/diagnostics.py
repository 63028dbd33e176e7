"""Recording and reporting of run diagnostics (negative weights, unsettled runs, failed ensemble members, ...)"""

from __future__ import annotations

import enum
from itertools import chain

import attrs
from rich.columns import Columns
from rich.console import RenderableType
from rich.table import Table
from rich.text import Text

from hkqtk.errors import NumericalError
from hkqtk.rt import CONSOLE


class FatalDiagnostic(NumericalError):
	"""Raised when a fatal diagnostic is recorded; carries the issue code and ends the command with exit code 2."""

	def __init__(self, code: str, message: str):
		super().__init__(f"{message} [{code}]")
		self.code = code

class Severity(enum.IntEnum):
	"""Represents the severity of a diagnostic."""
	FATAL = 50
	ERROR = 40
	WARNING = 30
	NOTICE = 25

	def as_string(self) -> str:
		return self.name.lower()

@attrs.define(frozen=True)
class Issue:
	severity: Severity
	# method, run or file the issue concerns (None for the run as a whole)
	subject: str | None
	code: str
	message: RenderableType


class DiagnosticBook:
	"""Handles recording and reporting of diagnostics."""

	TEXT_ISSUE_PREFIXES = {
		Severity.FATAL: Text("Fatal error", "diag.issue.fatal"),
		Severity.ERROR: Text("Error", "diag.issue.error"),
		Severity.WARNING: Text("Warning", "diag.issue.warning"),
		Severity.NOTICE: Text("Notice", "diag.issue.notice"),
	}
	TEXT_TARGET_RUN = Text("this run", "diag.subject")


	def __init__(self, quiet: bool = False):
		self._issues: dict[str | None, list[Issue]] = dict()
		# record without printing (used by tests and JSON output)
		self.quiet = quiet

	def _record_issue(self, issue: Issue):
		try:
			self._issues[issue.subject].append(issue)
		except KeyError:
			self._issues[issue.subject] = [issue]

	def _display_issue(self, issue: Issue):
		issue_prefix = self.TEXT_ISSUE_PREFIXES[issue.severity]

		if issue.subject is None:
			target = self.TEXT_TARGET_RUN
		else:
			target = Text(issue.subject, "diag.subject")

		code = Text.assemble("[", Text(issue.code, "diag.code"), "]")
		code.stylize("dim")

		CONSOLE.print(
			Text.assemble(issue_prefix, " from ", target, " ", code),
			Columns([" └─ ", issue.message], padding=0),
		)

	def bind(self, subject: str | None) -> DiagnosticPen:
		return DiagnosticPen(self, subject)

	def issue(self, severity: Severity, subject: str | None, code: str, message: RenderableType):
		"""Record a diagnostic.

		Args:
			severity: The severity of the issue.
			subject: The method, run or file the issue concerns (or None for the whole run).
			code: A short kebab-case ID for this kind of issue.
			message: A human-friendly description of the issue.

		Raises:
			FatalDiagnostic: If `severity` is FATAL.
		"""

		issue = Issue(severity, subject, code, message)
		self._record_issue(issue)

		if not self.quiet:
			self._display_issue(issue)

		if severity == Severity.FATAL:
			raise FatalDiagnostic(code, message.plain if isinstance(message, Text) else str(message))

	def get_issues(self, subject: str | None = None) -> list[Issue]:
		"""Return all issues raised for the given subject (or for all subjects if None)."""

		if subject is None:
			return list(chain.from_iterable(self._issues.values()))
		else:
			return list(self._issues.get(subject, []))

	def has_code(self, code: str) -> bool:
		return any(issue.code == code for issue in self.get_issues())

	def rich_issue_summary(self, table: Table) -> Table | Text:
		"""Generate a summary table of all recorded issues (or an "all clear" if there were none)."""

		if len(self._issues) == 0:
			return Text("No issues were recorded.", style="green3")

		separator = Text(", ")

		# group subjects by their highest severity
		grouped: dict[Severity, dict[str, list[Issue]]] = { s : dict() for s in Severity }
		for subject, issues in self._issues.items():
			max_severity = max(issue.severity for issue in issues)
			grouped[max_severity][subject or "(run)"] = issues

		table.add_column("Subject", ratio=2)
		table.add_column("Issues", ratio=5)

		for max_severity, subjects in sorted(grouped.items(), reverse=True):
			for subject, issues in sorted(subjects.items()):
				counts = []
				for severity in Severity:
					count = len([issue for issue in issues if issue.severity == severity])
					if count > 0:
						counts.append(Text(f"{count} {severity.as_string()}", style=f"diag.issue.{severity.as_string()}"))
						counts.append(separator)

				table.add_row(
					Text(subject, style=f"diag.issue.{max_severity.as_string()}"),
					Text.assemble(
						Text(f"{len(issues)} issue{'s' if len(issues) > 1 else ''}"),
						" (",
						*counts[:-1],
						")",
					),
				)

		return table

class DiagnosticPen:
	"""Like a bound logger, but for diagnostics."""

	def __init__(self, book: DiagnosticBook, subject: str | None):
		self._book = book
		self.subject = subject

	def issue(self, severity: Severity, code: str, message: RenderableType):
		return self._book.issue(severity, self.subject, code, message)

	def warn(self, code: str, message: RenderableType):
		return self._book.issue(Severity.WARNING, self.subject, code, message)

	def notice(self, code: str, message: RenderableType):
		return self._book.issue(Severity.NOTICE, self.subject, code, message)
