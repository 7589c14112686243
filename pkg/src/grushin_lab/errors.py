"""Exception hierarchy shared by all modules."""


class GrushinLabError(Exception):
    pass


# potential
class DerivativeAtOrigin(GrushinLabError, ValueError):
    pass


class UnsupportedOrder(GrushinLabError, ValueError):
    pass


class GridTooCoarse(GrushinLabError):
    pass


class NotCertified(GrushinLabError):
    pass


class NonPositiveInput(GrushinLabError, ValueError):
    pass


# schrodinger / semiclassics
class SolverError(GrushinLabError, RuntimeError):
    pass


class BracketFailure(SolverError):
    pass


class MaxGridExceeded(SolverError):
    pass


class InterlacingViolation(SolverError):
    pass


# verify
class MissingCertificate(GrushinLabError):
    pass


class RegionEmpty(GrushinLabError):
    pass


class PreconditionViolated(GrushinLabError, ValueError):
    pass


class EmptyWindow(GrushinLabError):
    pass


# grushin
class WindowOverflow(SolverError):
    pass


class NotConverged(SolverError):
    pass


class TailNotConverged(SolverError):
    pass


# cli
class ConfigError(GrushinLabError, ValueError):
    pass
