"""Property-based testing over reified property trees.

Properties are plain data (see :mod:`proptree.core`); every runner in
:mod:`proptree.runners` is an ordinary function that interprets them.
"""

from .core import (
    Annotations,
    Check,
    ContractViolation,
    Discard,
    Env,
    Forall,
    Implies,
    Normal,
    RunnerReport,
    UnboundName,
    Value,
    check,
    forall,
    implies,
    names,
)
from .rand import Gen, RandomSource, default_size

__version__ = "0.1.0"
