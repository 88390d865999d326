"""Joint sensing-set selection and power allocation for interweave cognitive radios."""

from ._kernels import BACKEND
from .model import (
    Allocation,
    ChannelProfile,
    Instance,
    InstanceError,
    SensingSet,
    capacity,
    generate_instance,
    read_instance,
    validate_instance,
    write_instance,
)
from .oracle import EnumerationCapError, exhaustive_search, subsets_of_size
from .selector import (
    OptResult,
    candidate_set,
    coarse_optimize,
    fine_lambda,
    fine_optimize,
    fine_rank_score,
    fine_score,
    joint_optimize,
    lemma1_certificate,
)
from .simulator import SimResult, simulate
from .waterfill import WaterfillError, solve_waterfill

__version__ = "0.1.0"
