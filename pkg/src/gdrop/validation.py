"""Input validation helpers shared by the estimators and the CLI."""

from numbers import Integral, Real

import numpy as np

from .core import StructuredSystem, TrainingSet, conjugate_closure, \
    frequency_grid

MODES = ('two-sided', 'galerkin')


def check_system(system):
    if not isinstance(system, StructuredSystem):
        raise TypeError(f'expected a StructuredSystem, got '
                        f'{type(system).__name__}')
    return system


def check_training(training):
    """Coerce ``training`` into a :class:`TrainingSet`.

    Accepts a TrainingSet, an array of complex points (closed under
    conjugation on the fly) or a mapping with keys ``range``, ``N`` and
    optionally ``spacing``.
    """
    if isinstance(training, TrainingSet):
        ts = training
    elif isinstance(training, dict):
        lo, hi = training['range']
        ts = frequency_grid(lo, hi, training['N'],
                            training.get('spacing', 'log'))
    else:
        pts = np.asarray(training, dtype=complex)
        if pts.ndim != 1:
            raise ValueError('training points must be one-dimensional')
        ts = conjugate_closure(pts)
    if len(ts) == 0:
        raise ValueError('training set is empty')
    if not np.all(np.isfinite(ts.points)):
        raise ValueError('training points must be finite')
    return ts


def check_frequencies(s):
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if s.ndim != 1:
        raise ValueError('frequencies must be a scalar or 1-D array')
    return s


def check_mode(mode):
    if mode not in MODES:
        raise ValueError(f'mode must be one of {MODES}, got {mode!r}')
    return mode


def check_positive(name, value, integer=False, allow_none=False):
    if value is None and allow_none:
        return value
    kind = Integral if integer else Real
    if not isinstance(value, kind) or isinstance(value, bool) or value <= 0:
        raise ValueError(f'{name} must be a positive '
                         f'{"integer" if integer else "number"}, got {value!r}')
    return value
