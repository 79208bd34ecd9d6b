"""Exception hierarchy shared by all foliamod modules."""


class FoliamodError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FoliamodError, ValueError):
    """A point lies outside the chart box on a non-periodic axis."""


class SingularGeometryError(FoliamodError):
    """The metric (or a derived density) degenerates at some node."""

    def __init__(self, message, node=None):
        if node is not None:
            message = f"{message} (node {tuple(int(i) for i in node)})"
        super().__init__(message)
        self.node = node


class UnsupportedExponentError(FoliamodError, ValueError):
    """The exponent p is outside the supported range p > 1."""


class NonConvergenceError(FoliamodError):
    """An iterative solver ran out of iterations."""

    def __init__(self, message, gap=None, leaf=None):
        super().__init__(message)
        self.gap = gap
        self.leaf = leaf


class PreconditionError(FoliamodError, ValueError):
    """Arguments violate the documented precondition of an operation."""


def check_exponent(p):
    p = float(p)
    if not p > 1.0 or not p < float("inf"):
        raise UnsupportedExponentError(f"exponent p must satisfy 1 < p < inf, got p={p}")
    return p
