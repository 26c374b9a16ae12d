"""Exception types raised across the package."""

import numpy as np


class SingularFunction(ValueError):
    """A scalar frequency function is undefined at the requested point."""


class SingularK(np.linalg.LinAlgError):
    """Factorization of ``K(s)`` failed (zero pivot or non-finite entries).

    Parameters
    ----------
    message : str
        Human readable reason.
    sigma : complex, optional
        Frequency point at which the failure happened, if known.
    """

    def __init__(self, message, sigma=None):
        super().__init__(message)
        self.sigma = sigma


class SingularProjectedPencil(SingularK):
    """The projected pencil is singular at training point ``index``."""

    def __init__(self, index, sigma=None):
        super().__init__(
            f"projected pencil is singular at training point {index} "
            f"(sigma={sigma})", sigma=sigma)
        self.index = index


class DimensionMismatch(ValueError):
    pass


class ConvergenceFailure(np.linalg.LinAlgError):
    pass


class Exhausted(RuntimeError):
    """No unselected training points remain."""


class UnsupportedSize(ValueError):
    pass


class ParseError(ValueError):
    """Malformed input file. ``path`` and ``line`` locate the problem."""

    def __init__(self, message, path=None, line=None):
        where = ''
        if path is not None:
            where = f'{path}'
            if line is not None:
                where += f':{line}'
            where += ': '
        super().__init__(where + message)
        self.path = path
        self.line = line
