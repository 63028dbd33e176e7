"""Utility functions."""

import os
from pathlib import Path
import tempfile


def atomic_write_text(path: Path, text: str):
	"""Write text to `path` through a temporary sibling file and an atomic rename.

	Readers (and concurrent writers of other files in the same directory) never observe a
	partially written file, and a failure leaves any previous file at `path` untouched.
	"""

	path.parent.mkdir(parents=True, exist_ok=True)

	fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
	try:
		with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fp:
			fp.write(text)
		os.replace(tmp_name, path)
	except BaseException:
		# clean up the temporary file on any failure
		try:
			os.unlink(tmp_name)
		except FileNotFoundError:
			pass
		raise
