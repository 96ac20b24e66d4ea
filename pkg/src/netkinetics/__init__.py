"""Growing-network simulators with rate-equation theory."""
__version__ = "0.1.0"

from .exceptions import (
    ConfigError,
    ConsistencyError,
    DomainError,
    NetKineticsError,
    RegimeError,
    StateError,
    UsageError,
)
from .gn import GrowingNetwork, grow
from .kernels import AttractivenessDist, KernelSpec, Regime, classify, evaluate
from .measure import (
    DistTable,
    TailExponentEstimator,
    compare,
    fit_shifted_tail,
    fit_tail_exponent,
    log_bin,
    merge,
)
from .mg import MultiComponentGraph, grow_mg
from .wg import WebGraph, grow_wg

__all__ = [
    "AttractivenessDist",
    "ConfigError",
    "ConsistencyError",
    "DistTable",
    "DomainError",
    "GrowingNetwork",
    "KernelSpec",
    "MultiComponentGraph",
    "NetKineticsError",
    "Regime",
    "RegimeError",
    "StateError",
    "TailExponentEstimator",
    "UsageError",
    "WebGraph",
    "classify",
    "compare",
    "evaluate",
    "fit_shifted_tail",
    "fit_tail_exponent",
    "grow",
    "grow_mg",
    "grow_wg",
    "log_bin",
    "merge",
]
