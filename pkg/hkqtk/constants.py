# define global metadata
TOOLKIT_DESCRIPTION = "Heat-Kernel Quadrature ToolKit - minimal-energy quadrature points on compact manifolds."
TOOLKIT_VERSION = "0.1.0"

# numerical tolerances shared across modules
CONSTRAINT_TOL = 1e-8
TANGENT_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-10

# name of the header key holding the resolved run configuration
CONFIG_HEADER_KEY = "config"
