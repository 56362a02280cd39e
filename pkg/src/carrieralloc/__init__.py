"""Multi-carrier rate allocation with user discrimination.

Users run either real-time (sigmoidal utility) or delay-tolerant (logarithmic
utility) applications and are either VIP, with a minimum required rate, or
Regular. Carriers are allocated one after another by ascending coverage
radius; each carrier is split by utility proportional fairness, solved through
its shadow price.
"""
from .allocator import AllocationReport, StageRecord, allocate
from .carrier_solver import Case, Participant, StageInput, StageResult, solve_stage
from .errors import (AllocationError, DomainError, DuplicateIdError, InfeasibleReservationsError,
                     InvalidParameterError, NoConvergenceError, NonFiniteGradientError,
                     ScenarioError, StageError, TooManyParticipantsError)
from .grouping import Carrier, User, UserClass, UserGroups, build_groups
from .oracle import grid_solve, kkt_check, projected_gradient_solve
from .scenario import Scenario, load_bundled, load_scenario, run_sweep, write_csv
from .utility import (Logarithmic, Sigmoidal, inverse_marginal, log_utility,
                      marginal_log_utility, utility)

__version__ = "0.1.0"

__all__ = [
    "AllocationError", "AllocationReport", "Carrier", "Case", "DomainError", "DuplicateIdError",
    "InfeasibleReservationsError", "InvalidParameterError", "Logarithmic", "NoConvergenceError",
    "NonFiniteGradientError", "Participant", "Scenario", "ScenarioError", "Sigmoidal", "StageError",
    "StageInput", "StageRecord", "StageResult", "TooManyParticipantsError", "User", "UserClass",
    "UserGroups", "allocate", "build_groups", "grid_solve", "inverse_marginal", "kkt_check",
    "load_bundled", "load_scenario", "log_utility", "marginal_log_utility",
    "projected_gradient_solve", "run_sweep", "solve_stage", "utility", "write_csv",
]
