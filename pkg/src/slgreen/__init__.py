__version__ = "0.1.0"

from .basis import FundamentalSystem, fundamental_system, omega, omega_batch, refined_fundamental_system
from .errors import SLGreenError
from .greens import HVector, Piecewise, green_grid, resolve, verify_resolvent
from .problem import ProblemConfig, load_config, validate
from .spectrum import eigenpair, scan
