"""Exception hierarchy shared by the library and the CLI"""


class BalanceError(Exception):
    """Base class for every error raised by the package"""


class PosetError(BalanceError, ValueError):
    """Malformed input: bad relations, bad files, limits exceeded"""


class VerificationError(BalanceError, RuntimeError):
    """A mathematical assertion failed"""


class LPError(BalanceError, RuntimeError):
    """Exact simplex could not produce an optimum"""


class LPInfeasible(LPError):
    """The constraint system has no feasible point"""


class LPUnbounded(LPError):
    """The objective is unbounded below"""
