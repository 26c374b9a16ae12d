"""Low-rank solution of interpolatory generalized Sylvester equations.

The matrix ``V = [K(s_1)^{-1} B, ..., K(s_N)^{-1} B]`` solves

    A_1 V F_1 + ... + A_l V F_l = B 1^T,    F_i = diag(f_i(s_1), ..., f_i(s_N)),

and analogously ``W`` with ``A_i^T`` and ``C^T``. :func:`active_sample` builds
``V ~ S Z`` greedily: it only performs large-scale solves at the training
points whose residual column is largest.
"""

import logging
import time
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .core import TrainingSet, eval_K, evaluate_f_diag
from .exceptions import (DimensionMismatch, Exhausted, SingularK,
                         SingularProjectedPencil)
from .linalg import factorize, orth_append

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

__all__ = [
    'REACHABILITY', 'OBSERVABILITY', 'SylvesterProblem', 'LowRankBasis',
    'ResidualReport', 'initial_basis', 'solve_projected', 'residual',
    'update_cached_products', 'filter_value', 'select_points',
    'active_sample', 'dense_oracle_solve', 'sylvester_residual',
    'FILTER_BETA', 'FILTER_EPS',
]

REACHABILITY = 'reachability'
OBSERVABILITY = 'observability'

FILTER_BETA = 0.6
FILTER_EPS = 1e-15

# Residual columns are assembled in blocks of this many training points.
_CHUNK = 256


@dataclass(frozen=True)
class SylvesterProblem:
    """One side of the Sylvester pair.

    Reachability uses ``A_i`` and right-hand side ``B``; observability uses
    ``A_i^T`` and ``C^T``.
    """

    system: object
    training: TrainingSet
    side: str = REACHABILITY
    f_diag: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.side not in (REACHABILITY, OBSERVABILITY):
            raise ValueError(f'unknown side {self.side!r}')
        object.__setattr__(self, 'f_diag',
                           evaluate_f_diag(self.system, self.training))

    @property
    def transposed(self):
        return self.side == OBSERVABILITY

    @property
    def rhs(self):
        return self.system.C.T if self.transposed else self.system.B

    @property
    def operators(self):
        if self.transposed:
            return [A.T for A in self.system.matrices]
        return list(self.system.matrices)

    @property
    def n_points(self):
        return len(self.training)

    def large_solve(self, index, handles=None):
        """``K(s_j)^{-1} rhs`` (or the transposed solve) as a complex array.

        ``handles`` is an optional dict of factorizations keyed by point index,
        shared between the two sides to avoid refactorizing.
        """
        sigma = self.training.points[index]
        handle = None if handles is None else handles.get(index)
        if handle is None:
            handle = factorize(eval_K(self.system, sigma), sigma=sigma)
            if handles is not None:
                handles[index] = handle
        return handle.solve(self.rhs, trans=self.transposed)


@dataclass
class LowRankBasis:
    """``V ~ S Z`` with orthonormal real ``S`` and cached ``A_i S``.

    ``Z`` has ``N*m`` columns: the block for training point ``j`` occupies
    columns ``j*m:(j+1)*m``.
    """

    S: np.ndarray
    cached_products: List[np.ndarray]
    Z: Optional[np.ndarray] = None
    selected_points: List[int] = field(default_factory=list)
    ineligible_points: List[int] = field(default_factory=list)
    history: List[dict] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    n_solves: int = 0
    n_deflated: int = 0
    converged: bool = False

    @property
    def rank(self):
        return self.S.shape[1]


@dataclass(frozen=True)
class ResidualReport:
    column_norms: np.ndarray
    mean_error: float
    relative_mean_error: float
    max_index: int


def _real_split(v, sigma):
    """Real columns spanning ``{v, conj(v)}``."""
    if np.imag(sigma) == 0:
        return np.real(v)
    return np.hstack([v.real, v.imag])


def update_cached_products(problem, basis, appended_cols):
    """Append columns to ``basis.S`` and extend the cached ``A_i S``.

    Only ``A_i @ appended_cols`` is computed; the previous products are reused.
    """
    appended_cols = np.asarray(appended_cols, dtype=float)
    if appended_cols.ndim == 1:
        appended_cols = appended_cols[:, np.newaxis]
    if appended_cols.shape[0] != basis.S.shape[0]:
        raise DimensionMismatch(
            f'appended columns have {appended_cols.shape[0]} rows, basis has '
            f'{basis.S.shape[0]}')
    if appended_cols.shape[1] == 0:
        return basis
    products = [np.hstack([P, np.asarray(A @ appended_cols)])
                for P, A in zip(basis.cached_products, problem.operators)]
    return replace(basis, S=np.hstack([basis.S, appended_cols]),
                   cached_products=products)


def empty_basis(problem):
    n = problem.system.n
    return LowRankBasis(S=np.zeros((n, 0)),
                        cached_products=[np.zeros((n, 0))
                                         for _ in problem.operators])


def basis_from_matrix(problem, S):
    """Wrap a given orthonormal ``S``, computing ``A_i S`` from scratch."""
    S = np.asarray(S, dtype=float)
    return LowRankBasis(S=S, cached_products=[np.asarray(A @ S)
                                              for A in problem.operators])


def solve_projected(problem, basis, f_diag=None, skip=()):
    """Coefficients ``Z`` of the projected equation, one small solve per point.

    Column block ``j`` is ``(sum_i f_i(s_j) S^T A_i S)^{-1} S^T rhs``.
    ``f_diag`` replaces the training-set coefficients to evaluate at other
    frequencies. Blocks of points in ``skip`` (where ``K`` itself is
    singular) are left zero.
    """
    F = problem.f_diag if f_diag is None else f_diag
    S = basis.S
    n_p = S.shape[1]
    m = problem.rhs.shape[1]
    N = F.shape[1]
    if n_p == 0:
        return np.zeros((0, N * m), dtype=complex)
    A_hat = np.array([S.T @ P for P in basis.cached_products])
    B_hat = S.T @ problem.rhs
    # (N, n_p, n_p) stack of projected pencils
    K_hat = np.einsum('ij,ikl->jkl', F, A_hat)
    skip = list(skip)
    if skip:
        K_hat[skip] = np.eye(n_p)
    rhs = np.broadcast_to(B_hat.astype(complex), (N, n_p, m))
    try:
        Zs = np.linalg.solve(K_hat, rhs)
    except np.linalg.LinAlgError:
        Zs = None
    if Zs is None or not np.all(np.isfinite(Zs)):
        for j in range(N):
            try:
                zj = np.linalg.solve(K_hat[j], rhs[j])
            except np.linalg.LinAlgError:
                zj = None
            if zj is None or not np.all(np.isfinite(zj)):
                sigma = problem.training.points[j] if f_diag is None else None
                raise SingularProjectedPencil(j, sigma)
    if skip:
        Zs[skip] = 0
    # (N, n_p, m) -> (n_p, N*m)
    return np.transpose(Zs, (1, 0, 2)).reshape(n_p, N * m)


def residual(problem, basis, Z, raw=False, products=None, skip=()):
    """Column norms of ``R = sum_i (A_i S) Z F_i - rhs 1^T``.

    The residual is assembled in column chunks from the cached ``A_i S``; the
    full ``n x N`` matrix is only materialized when ``raw`` is true. Points in
    ``skip`` get norm zero and do not count towards the mean.

    Returns
    -------
    ResidualReport, or (ResidualReport, R) when ``raw`` is true.
    """
    if products is None:
        products = basis.cached_products
    rhs = problem.rhs
    n, m = rhs.shape
    N = problem.n_points
    F = problem.f_diag
    norms = np.empty(N)
    R_full = np.empty((n, N * m), dtype=complex) if raw else None
    for start in range(0, N, _CHUNK):
        stop = min(start + _CHUNK, N)
        cols = slice(start * m, stop * m)
        R = np.empty((n, (stop - start) * m), dtype=complex)
        R[:] = -np.tile(rhs, (1, stop - start))
        if Z.shape[0]:
            Zc = Z[:, cols]
            for i, P in enumerate(products):
                W = Zc * np.repeat(F[i, start:stop], m)[np.newaxis, :]
                R += P @ W.real + 1j * (P @ W.imag)
        blk = np.abs(R)**2
        norms[start:stop] = np.sqrt(
            blk.reshape(n, stop - start, m).sum(axis=(0, 2)))
        if raw:
            R_full[:, cols] = R
    skip = list(skip)
    if skip:
        norms[skip] = 0.0
    n_live = N - len(set(skip))
    mean = float(norms.sum() / n_live) if n_live else 0.0
    rhs_norm = np.linalg.norm(rhs)
    rel = mean / rhs_norm if rhs_norm > 0 else mean
    report = ResidualReport(column_norms=norms, mean_error=mean,
                            relative_mean_error=rel,
                            max_index=int(np.argmax(norms)) if N else -1)
    if raw:
        return report, R_full
    return report


def filter_value(s, sigma_sel, beta=FILTER_BETA, eps=FILTER_EPS):
    """``1 - exp(-beta (log(|s|+eps) - log(|sigma_sel|+eps))**2)``.

    Vanishes at ``|s| == |sigma_sel|`` and approaches one for frequencies
    decades away.
    """
    d = np.log(np.abs(s) + eps) - np.log(np.abs(sigma_sel) + eps)
    return (1.0 - np.exp(-beta * d**2))[()]


def select_points(report, training, count, exclude=None):
    """Pick ``count`` training indices from a residual profile.

    The first pick is the argmax of the column norms. Every later pick is the
    argmax after multiplying the working norms by the filter of each earlier
    pick of this round. Indices in ``training.selected_mask`` (and ``exclude``)
    are never chosen. Ties go to the lowest index.
    """
    if count < 1:
        raise ValueError('count must be positive')
    avail = ~training.selected_mask.copy()
    if exclude is not None:
        avail[list(exclude)] = False
    if not avail.any():
        raise Exhausted('no unselected training points remain')
    work = np.array(report.column_norms, dtype=float)
    picks = []
    for _ in range(min(count, int(avail.sum()))):
        idx = int(np.argmax(np.where(avail, work, -np.inf)))
        if picks and not work[idx] > 0:
            break
        picks.append(idx)
        avail[idx] = False
        work = work * filter_value(training.points, training.points[idx])
    return picks


def initial_basis(problem, indices, handles=None):
    """Basis spanned by the large-scale solves at ``indices``.

    Points where ``K`` is singular are skipped and recorded as ineligible.
    """
    basis = empty_basis(problem)
    for idx in indices:
        basis = _add_point(problem, basis, idx, handles)
    return basis


def _add_point(problem, basis, idx, handles):
    sigma = problem.training.points[idx]
    try:
        v = problem.large_solve(idx, handles)
    except SingularK as exc:
        basis.ineligible_points.append(idx)
        basis.warnings.append(f'skipped point {idx} (sigma={sigma}): {exc}')
        log.warning('skipped singular point %d (sigma=%s)', idx, sigma)
        return basis
    basis.n_solves += 1
    basis.selected_points.append(idx)
    cols = _real_split(v, sigma)
    k = basis.rank
    S_new = orth_append(basis.S, cols)
    appended = S_new[:, k:]
    basis.n_deflated += cols.shape[1] - appended.shape[1]
    return update_cached_products(problem, basis, appended)


def active_sample(problem, tol=1e-3, batch=3, max_points=None,
                  initial_points=None, handles=None, callback=None):
    """Greedy active sampling of interpolation points.

    Parameters
    ----------
    problem : SylvesterProblem
    tol : float
        Stopping tolerance on the mean residual error relative to
        ``||rhs||_F``.
    batch : int
        Points added per iteration; later picks in a batch are spread out by
        :func:`filter_value`.
    max_points : int, optional
        Budget on selected representatives. Defaults to ``max(1, N // 4)``.
    initial_points : sequence of int, optional
        Starting indices. Default: the representative of smallest magnitude.
    handles : dict, optional
        Factorization cache keyed by training index.
    callback : callable, optional
        Called with each per-iteration log record.

    Returns
    -------
    LowRankBasis
        With ``Z`` consistent with the final ``S``; ``history`` holds one
        record per residual evaluation.
    """
    training = problem.training
    N = len(training)
    if N == 0:
        raise ValueError('empty training set')
    if not tol > 0:
        raise ValueError('tol must be positive')
    if max_points is None:
        max_points = max(1, N // 4)
    t0 = time.perf_counter()
    if initial_points is None:
        initial_points = [int(np.argmin(np.abs(training.points)))]
    basis = initial_basis(problem, initial_points, handles)
    selected_round = list(basis.selected_points)
    k = 0
    while True:
        k += 1
        done = set(basis.selected_points) | set(basis.ineligible_points)
        ts = TrainingSet(training.points,
                         np.isin(np.arange(N), list(done)))
        Z = solve_projected(problem, basis, skip=basis.ineligible_points)
        report = residual(problem, basis, Z, skip=basis.ineligible_points)
        basis.Z = Z
        record = {
            'iteration': k,
            'side': problem.side,
            'selected_sigma': [[float(training.points[i].real),
                                float(training.points[i].imag)]
                               for i in selected_round],
            'n_selected': len(basis.selected_points),
            'n_p': basis.rank,
            'eps_abs': report.mean_error,
            'eps_rel': report.relative_mean_error,
            'wall_time': time.perf_counter() - t0,
            'n_solves': basis.n_solves,
        }
        basis.history.append(record)
        if callback is not None:
            callback(record)
        log.debug('iteration %d: n_p=%d eps_rel=%.3e', k, basis.rank,
                  report.relative_mean_error)
        if report.relative_mean_error <= tol:
            basis.converged = True
            break
        if len(basis.selected_points) >= max_points:
            basis.warnings.append(
                f'budget of {max_points} points exhausted at '
                f'eps_rel={report.relative_mean_error:.3e}')
            break
        if ts.selected_mask.all():
            basis.warnings.append('training set exhausted')
            break
        count = min(batch, max_points - len(basis.selected_points))
        selected_round = select_points(report, ts, count)
        for idx in selected_round:
            basis = _add_point(problem, basis, idx, handles)
    for w in basis.warnings:
        log.info(w)
    return basis


def dense_oracle_solve(problem):
    """``V`` (or ``W``) by one dense direct solve per training point.

    Independent of the factorization layer; meant for small test instances.
    Returns an ``(n, N*m)`` complex array.
    """
    mats = [A.toarray() if hasattr(A, 'toarray') else np.asarray(A)
            for A in problem.operators]
    rhs = problem.rhs.astype(complex)
    cols = []
    for j in range(problem.n_points):
        K = sum(problem.f_diag[i, j] * A for i, A in enumerate(mats))
        try:
            cols.append(np.linalg.solve(K, rhs))
        except np.linalg.LinAlgError as exc:
            raise SingularK(str(exc), problem.training.points[j]) from exc
    return np.hstack(cols)


def sylvester_residual(problem, V):
    """Relative Frobenius residual of ``sum_i A_i V F_i = rhs 1^T``."""
    m = problem.rhs.shape[1]
    lhs = np.zeros(V.shape, dtype=complex)
    for i, A in enumerate(problem.operators):
        lhs += np.asarray(A @ (V * np.repeat(problem.f_diag[i], m)))
    target = np.tile(problem.rhs, (1, problem.n_points))
    return np.linalg.norm(lhs - target) / np.linalg.norm(target)
