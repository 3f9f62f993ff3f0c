"""looprecur: a bounded non-termination checker for a C subset.

Loops are instrumented with a recurrent-state assertion; a bounded model
checker then searches increasing unwind depths for a revisited state, and
any hit is replayed and validated as a concrete non-termination witness.
"""

from .driver import CheckConfig, Verdict, check, check_source
from .frontend import FrontendError, parse
from .witness import Witness, validate_witness

__version__ = "0.1.0"

__all__ = [
    "CheckConfig",
    "FrontendError",
    "Verdict",
    "Witness",
    "check",
    "check_source",
    "parse",
    "validate_witness",
    "__version__",
]
