"""Error taxonomy shared by all modules.

DomainError   -- an argument is outside the mathematical domain of an
                 operation (bad sigma, radius >= 1, zero polynomial, ...).
CapacityError -- the request is legal but exceeds a configured capacity
                 (prime table too small, 64-bit index overflow, budget group).
ConstructionError -- a construction pipeline could not meet its own
                 verification targets (negativity after smoothing,
                 occupancy target unreachable, ...).
"""


class DomainError(ValueError):
    pass


class CapacityError(RuntimeError):
    pass


class ConstructionError(RuntimeError):
    pass
