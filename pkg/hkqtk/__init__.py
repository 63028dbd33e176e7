# isort: skip_file
"""Heat-Kernel Quadrature ToolKit: minimal-energy quadrature points, optimal weights and spectral error benchmarks."""

# handle toml import here for other modules
import sys
if sys.version_info >= (3, 11):
	# Python >= 3.11 (stdlib module)
	import tomllib
else:
	# Python <= 3.10 (third-party dependency)
	import tomli as tomllib

from .constants import TOOLKIT_VERSION as __version__
