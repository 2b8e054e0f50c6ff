"""crowtune: search-space-aware crow search tuning of iterative CT reconstruction."""

from .errors import ConfigError, CrowtuneError, DegenerateImageError, OffGridError
from .fitness import FitnessConfig, FitnessReport, evaluate
from .initpop import ChaosStream, init_cdlu, init_dlu, init_lhs, init_random
from .optimizer import OptimizerConfig, RunRecord, run
from .space import ParameterSpace, ParameterSpec, Position, preset_space, snap

__version__ = "0.1.0"

__all__ = [
    "ChaosStream",
    "ConfigError",
    "CrowtuneError",
    "DegenerateImageError",
    "FitnessConfig",
    "FitnessReport",
    "OffGridError",
    "OptimizerConfig",
    "ParameterSpace",
    "ParameterSpec",
    "Position",
    "RunRecord",
    "evaluate",
    "init_cdlu",
    "init_dlu",
    "init_lhs",
    "init_random",
    "preset_space",
    "run",
    "snap",
    "__version__",
]
