"""Linear structured systems ``H(s) = C K(s)^{-1} B`` with affine ``K(s)``.

``K(s) = f_1(s) A_1 + ... + f_l(s) A_l`` where each ``f_i`` is one of a small
closed set of scalar functions with real parameters, so that
``f(conj(s)) == conj(f(s))`` holds for every admissible term.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp

from .exceptions import DimensionMismatch, SingularFunction

__all__ = [
    'ScalarFunction', 'Constant', 'Power', 'Exponential', 'ShiftedRational',
    'Scaled', 'function_from_dict', 'StructuredSystem', 'TrainingSet',
    'conjugate_closure', 'frequency_grid', 'eval_K', 'eval_K_derivative',
    'eval_transfer', 'eval_transfer_derivative', 'evaluate_f_diag',
]

Matrix = Union[np.ndarray, sp.spmatrix, sp.sparray]


# ---------------------------------------------------------------------------
# Scalar functions
# ---------------------------------------------------------------------------

class ScalarFunction:
    """Base class for the scalar weights ``f_i(s)``.

    Subclasses are frozen dataclasses. Calling an instance evaluates it on a
    scalar or an array of complex frequencies.
    """

    kind = None

    def __call__(self, s):
        raise NotImplementedError

    def derivative(self, s):
        """Evaluate ``df/ds``."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(ScalarFunction):
    c: float
    kind = 'constant'

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        return np.full(s.shape, complex(self.c))[()]

    def derivative(self, s):
        s = np.asarray(s, dtype=complex)
        return np.zeros(s.shape, dtype=complex)[()]

    def to_dict(self):
        return {'kind': self.kind, 'c': float(self.c)}


@dataclass(frozen=True)
class Power(ScalarFunction):
    """``s**k`` for a nonnegative integer ``k``."""

    k: int
    kind = 'power'

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise ValueError(f'Power exponent must be a nonnegative integer, '
                             f'got {self.k!r}')

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        return (s**int(self.k))[()]

    def derivative(self, s):
        s = np.asarray(s, dtype=complex)
        if self.k == 0:
            return np.zeros(s.shape, dtype=complex)[()]
        return (self.k * s**(int(self.k) - 1))[()]

    def to_dict(self):
        return {'kind': self.kind, 'k': int(self.k)}


@dataclass(frozen=True)
class Exponential(ScalarFunction):
    """``exp(a*s)``; a delay ``tau`` corresponds to ``a = -tau``."""

    a: float
    kind = 'exponential'

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        return np.exp(self.a * s)[()]

    def derivative(self, s):
        s = np.asarray(s, dtype=complex)
        return (self.a * np.exp(self.a * s))[()]

    def to_dict(self):
        return {'kind': self.kind, 'a': float(self.a)}


@dataclass(frozen=True)
class ShiftedRational(ScalarFunction):
    """``1 / (s + gamma)``."""

    gamma: float
    kind = 'shifted_rational'

    def _den(self, s):
        s = np.asarray(s, dtype=complex)
        den = s + self.gamma
        if np.any(den == 0):
            raise SingularFunction(
                f'1/(s+{self.gamma}) has a pole at s={-self.gamma}')
        return den

    def __call__(self, s):
        return (1.0 / self._den(s))[()]

    def derivative(self, s):
        return (-1.0 / self._den(s)**2)[()]

    def to_dict(self):
        return {'kind': self.kind, 'gamma': float(self.gamma)}


@dataclass(frozen=True)
class Scaled(ScalarFunction):
    """``c * inner(s)``."""

    c: float
    inner: ScalarFunction
    kind = 'scaled'

    def __call__(self, s):
        return (self.c * np.asarray(self.inner(s)))[()]

    def derivative(self, s):
        return (self.c * np.asarray(self.inner.derivative(s)))[()]

    def to_dict(self):
        return {'kind': self.kind, 'c': float(self.c),
                'inner': self.inner.to_dict()}


_KINDS = {
    'constant': lambda d: Constant(float(d['c'])),
    'power': lambda d: Power(int(d['k'])),
    'exponential': lambda d: Exponential(float(d['a'])),
    'shifted_rational': lambda d: ShiftedRational(float(d['gamma'])),
    'scaled': lambda d: Scaled(float(d['c']), function_from_dict(d['inner'])),
}


def function_from_dict(d):
    """Inverse of :meth:`ScalarFunction.to_dict`.

    A ``delay`` shorthand ``{"kind": "delay", "tau": t}`` is accepted and
    expands to ``Scaled(-1, Exponential(-t))``.
    """
    kind = d.get('kind')
    if kind == 'delay':
        return Scaled(-1.0, Exponential(-float(d['tau'])))
    try:
        return _KINDS[kind](d)
    except KeyError as exc:
        raise ValueError(f'bad scalar function description {d!r}') from exc


# ---------------------------------------------------------------------------
# Systems and training sets
# ---------------------------------------------------------------------------

def _as_matrix(A):
    if sp.issparse(A):
        return sp.csr_matrix(A, dtype=float)
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, np.newaxis]
    return A


@dataclass(frozen=True)
class StructuredSystem:
    """The tuple ``({A_i}, {f_i}, B, C)``.

    Parameters
    ----------
    matrices : sequence of (n, n) arrays or sparse matrices
        Real coefficient matrices ``A_i``.
    functions : sequence of ScalarFunction
        Scalar weights ``f_i``, one per matrix.
    B : (n, m) array
    C : (p, n) array
    """

    matrices: tuple
    functions: tuple
    B: np.ndarray
    C: np.ndarray
    name: str = field(default='', compare=False)

    def __post_init__(self):
        mats = tuple(_as_matrix(A) for A in self.matrices)
        funcs = tuple(self.functions)
        B = np.asarray(self.B.toarray() if sp.issparse(self.B) else self.B,
                       dtype=float)
        C = np.asarray(self.C.toarray() if sp.issparse(self.C) else self.C,
                       dtype=float)
        if B.ndim == 1:
            B = B[:, np.newaxis]
        if C.ndim == 1:
            C = C[np.newaxis, :]
        if len(mats) < 1:
            raise DimensionMismatch('a structured system needs at least one '
                                    'term')
        if len(mats) != len(funcs):
            raise DimensionMismatch(f'{len(mats)} matrices but {len(funcs)} '
                                    f'scalar functions')
        n = mats[0].shape[0]
        for i, A in enumerate(mats):
            if A.shape != (n, n):
                raise DimensionMismatch(f'term {i}: A has shape {A.shape}, '
                                        f'expected {(n, n)}')
        for i, f in enumerate(funcs):
            if not isinstance(f, ScalarFunction):
                raise TypeError(f'term {i}: {f!r} is not a ScalarFunction')
        if B.shape[0] != n or B.shape[1] < 1:
            raise DimensionMismatch(f'B has shape {B.shape}, expected ({n}, m)')
        if C.shape[1] != n or C.shape[0] < 1:
            raise DimensionMismatch(f'C has shape {C.shape}, expected (p, {n})')
        B.setflags(write=False)
        C.setflags(write=False)
        object.__setattr__(self, 'matrices', mats)
        object.__setattr__(self, 'functions', funcs)
        object.__setattr__(self, 'B', B)
        object.__setattr__(self, 'C', C)

    @property
    def n(self):
        return self.matrices[0].shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]

    @property
    def n_terms(self):
        return len(self.matrices)

    @property
    def is_sparse(self):
        return any(sp.issparse(A) for A in self.matrices)

    @property
    def terms(self):
        return list(zip(self.matrices, self.functions))

    def __repr__(self):
        kinds = ', '.join(type(f).__name__ for f in self.functions)
        return (f'StructuredSystem(n={self.n}, m={self.m}, p={self.p}, '
                f'terms=[{kinds}]{", name=" + self.name if self.name else ""})')


@dataclass(frozen=True)
class TrainingSet:
    """Training frequencies stored as conjugate-pair representatives.

    ``points`` holds only representatives with nonnegative imaginary part.
    A complex representative stands for ``{sigma, conj(sigma)}``, a real one
    for itself.
    """

    points: np.ndarray
    selected_mask: np.ndarray = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=complex).ravel()
        if np.any(pts.imag < 0):
            raise ValueError('TrainingSet stores upper-half-plane '
                             'representatives only; use conjugate_closure')
        if len(np.unique(pts)) != len(pts):
            raise ValueError('training points must be distinct')
        if self.selected_mask is None:
            mask = np.zeros(len(pts), dtype=bool)
        else:
            mask = np.array(self.selected_mask, dtype=bool).ravel()
            if mask.shape != pts.shape:
                raise DimensionMismatch('selected_mask length differs from '
                                        'number of points')
        pts.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, 'points', pts)
        object.__setattr__(self, 'selected_mask', mask)

    def __len__(self):
        return len(self.points)

    @property
    def is_real(self):
        return self.points.imag == 0

    @property
    def multiplicity(self):
        """1 for real representatives, 2 for conjugate pairs."""
        return np.where(self.is_real, 1, 2)

    def with_selected(self, indices):
        mask = self.selected_mask.copy()
        mask[list(indices)] = True
        return TrainingSet(self.points, mask)

    def expanded(self):
        """All points including derived conjugates."""
        cplx = self.points[~self.is_real]
        return np.concatenate([self.points, cplx.conj()])


def conjugate_closure(points):
    """Reduce ``points`` to distinct upper-half-plane representatives.

    Order of first appearance is kept. ``-1j`` and ``1j`` collapse to ``1j``.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    reps = np.where(pts.imag < 0, pts.conj(), pts)
    seen = set()
    out = []
    for z in reps:
        key = (float(z.real), float(z.imag))
        if key not in seen:
            seen.add(key)
            out.append(z)
    return TrainingSet(np.array(out, dtype=complex))


def frequency_grid(omega_min, omega_max, num, spacing='log'):
    """Training set ``sigma = 1j*omega`` on ``[omega_min, omega_max]``."""
    if spacing == 'log':
        if omega_min <= 0:
            raise ValueError('log spacing needs omega_min > 0')
        w = np.logspace(np.log10(omega_min), np.log10(omega_max), int(num))
    elif spacing == 'linear':
        w = np.linspace(omega_min, omega_max, int(num))
    else:
        raise ValueError(f'unknown spacing {spacing!r}')
    return conjugate_closure(1j * w)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _combine(matrices, coeffs):
    if any(sp.issparse(A) for A in matrices):
        K = None
        for A, c in zip(matrices, coeffs):
            term = sp.csr_matrix(A, dtype=complex) * complex(c)
            K = term if K is None else K + term
        return sp.csc_matrix(K)
    K = np.zeros(matrices[0].shape, dtype=complex)
    for A, c in zip(matrices, coeffs):
        K += complex(c) * A
    return K


def eval_K(system, s, transpose=False):
    """Return ``K(s) = sum_i f_i(s) A_i`` (or its plain transpose).

    The result is sparse (CSC) when any ``A_i`` is sparse.
    """
    coeffs = [f(s) for f in system.functions]
    mats = system.matrices
    if transpose:
        mats = [A.T for A in mats]
    return _combine(mats, coeffs)


def eval_K_derivative(system, s):
    """``dK/ds = sum_i f_i'(s) A_i``."""
    return _combine(system.matrices,
                    [f.derivative(s) for f in system.functions])


def eval_transfer(system, s):
    """``H(s) = C K(s)^{-1} B`` as a ``(p, m)`` complex array."""
    from .linalg import factorize
    X = factorize(eval_K(system, s), sigma=s).solve(system.B)
    return system.C @ X


def eval_transfer_derivative(system, s):
    """``H'(s) = -C K(s)^{-1} K'(s) K(s)^{-1} B``."""
    from .linalg import factorize
    handle = factorize(eval_K(system, s), sigma=s)
    X = handle.solve(system.B)
    Y = handle.solve(eval_K_derivative(system, s) @ X)
    return -(system.C @ Y)


def evaluate_f_diag(system, training):
    """``(l, N)`` array with entry ``(i, j) = f_i(sigma_j)``.

    Only the diagonals of the ``F_i`` matrices are ever stored.
    """
    pts = training.points if isinstance(training, TrainingSet) \
        else np.asarray(training, dtype=complex)
    return np.array([np.broadcast_to(f(pts), pts.shape)
                     for f in system.functions], dtype=complex)
