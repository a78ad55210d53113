"""Average-case information complexity of additive random fields with Korobov-kernel marginals."""

from .complexity import ABS, NOR, ComplexityResult, info_complexity, minimal_error, n_for_threshold
from .params import ParameterError, ParameterFamily, family_from_dict, validate
from .special import BoundedValue, zeta
from .spectrum import EigenStream, LevelSet, tau_trace, trace
from .tractability import spt_verdict, tau_criterion_scan

__version__ = "0.1.0"

__all__ = [
    "ABS",
    "NOR",
    "BoundedValue",
    "ComplexityResult",
    "EigenStream",
    "LevelSet",
    "ParameterError",
    "ParameterFamily",
    "family_from_dict",
    "info_complexity",
    "minimal_error",
    "n_for_threshold",
    "spt_verdict",
    "tau_criterion_scan",
    "tau_trace",
    "trace",
    "validate",
    "zeta",
]
