"""scikit-learn style front ends.

``fit`` takes a :class:`~gdrop.core.StructuredSystem` and a training set of
frequencies; ``predict`` evaluates the reduced transfer function.
"""

import logging
import time

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import evaluate_f_diag
from .drop import (build_bases_direct, choose_order, dominant_svd_direct,
                   dominant_svd_lowrank, petrov_galerkin, project,
                   rom_error_metric, transfer_on_grid, RomRealization,
                   SubspacePair)
from .sylvester import (OBSERVABILITY, REACHABILITY, SylvesterProblem,
                        active_sample, solve_projected)
from .validation import (check_frequencies, check_mode, check_positive,
                         check_system, check_training)

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

__all__ = ['ActiveSylvesterSolver', 'DropReducer', 'GdropReducer']


class ActiveSylvesterSolver(BaseEstimator, TransformerMixin):
    """Low-rank solution ``V ~ S Z`` of one interpolatory Sylvester equation.

    Parameters
    ----------
    tol : float
        Relative mean residual tolerance.
    batch : int
        Points added per greedy iteration.
    max_points : int or None
        Budget on selected representatives (default: a quarter of the
        training set).
    side : {'reachability', 'observability'}

    Attributes
    ----------
    basis_ : LowRankBasis
    training_ : TrainingSet
    selected_points_ : ndarray of complex
    n_solves_ : int
    history_ : list of dict
    """

    def __init__(self, tol=1e-3, batch=3, max_points=None,
                 side=REACHABILITY):
        self.tol = tol
        self.batch = batch
        self.max_points = max_points
        self.side = side

    def fit(self, X, y=None, initial_points=None):
        """Run active sampling on system ``X`` over training set ``y``."""
        check_system(X)
        check_positive('tol', self.tol)
        check_positive('batch', self.batch, integer=True)
        check_positive('max_points', self.max_points, integer=True,
                       allow_none=True)
        self.training_ = check_training(y)
        self.problem_ = SylvesterProblem(X, self.training_, self.side)
        self.basis_ = active_sample(self.problem_, tol=self.tol,
                                    batch=self.batch,
                                    max_points=self.max_points,
                                    initial_points=initial_points)
        self.selected_points_ = self.training_.points[
            self.basis_.selected_points]
        self.n_solves_ = self.basis_.n_solves
        self.history_ = self.basis_.history
        return self

    def transform(self, X):
        """Low-rank approximation of ``K(s)^{-1} rhs`` at frequencies ``X``.

        Returns an ``(n, len(X) * m)`` complex array.
        """
        check_is_fitted(self, 'basis_')
        F = evaluate_f_diag(self.problem_.system, check_frequencies(X))
        return self.basis_.S @ solve_projected(self.problem_, self.basis_, F)


class _ReducerMixin:

    def predict(self, X):
        """Reduced transfer function at frequencies ``X``, shape
        ``(len(X), p, m)``."""
        check_is_fitted(self, 'rom_')
        return transfer_on_grid(self.rom_.system, check_frequencies(X))

    def error(self, system, grid):
        """Pointwise relative error ``e(s)`` and its maximum on ``grid``."""
        check_is_fitted(self, 'rom_')
        return rom_error_metric(system, self.rom_, check_training(grid))


class DropReducer(_ReducerMixin, BaseEstimator):
    """Dominant subspace projection with solves at every training point.

    Parameters
    ----------
    tol : float
        Tail-energy truncation tolerance for the order.
    order : int or None
        Fixed ROM order; overrides ``tol``.
    mode : {'two-sided', 'galerkin'}

    Attributes
    ----------
    rom_ : RomRealization
    order_ : int
    sigma_row_, sigma_col_ : ndarray
    n_solves_ : int
    timings_ : dict
        Seconds spent in ``basis``, ``svd`` and ``projection``.
    """

    def __init__(self, tol=1e-8, order=None, mode='two-sided'):
        self.tol = tol
        self.order = order
        self.mode = mode

    def fit(self, X, y=None):
        check_system(X)
        check_mode(self.mode)
        check_positive('order', self.order, integer=True, allow_none=True)
        training = check_training(y)
        galerkin = self.mode == 'galerkin'
        t0 = time.perf_counter()
        pair = build_bases_direct(X, training, galerkin=galerkin)
        t1 = time.perf_counter()
        row, col = dominant_svd_direct(X, pair)
        r = choose_order(row.S, col.S, self.tol, self.order)
        t2 = time.perf_counter()
        self.rom_ = project(X, pair, row, col, r)
        t3 = time.perf_counter()
        self.training_ = training
        self.order_ = r
        self.sigma_row_, self.sigma_col_ = row.S, col.S
        self.n_solves_ = pair.n_solves
        self.selected_points_ = training.points.copy()
        self.timings_ = {'basis': t1 - t0, 'svd': t2 - t1,
                         'projection': t3 - t2, 'total': t3 - t0}
        self.history_ = []
        return self


class GdropReducer(_ReducerMixin, BaseEstimator):
    """Dominant subspace projection on actively sampled low-rank factors.

    Parameters
    ----------
    tol_sample : float
        Relative residual tolerance for the sampler.
    tol_svd : float
        Tail-energy truncation tolerance for the order.
    order : int or None
        Fixed ROM order; overrides ``tol_svd``.
    mode : {'two-sided', 'galerkin'}
        ``galerkin`` samples only the reachable side and sets ``W = V``.
    batch : int
    max_points : int or None
        Per-side budget on selected representatives.

    Attributes
    ----------
    rom_ : RomRealization
    basis_v_, basis_w_ : LowRankBasis (``basis_w_`` is None in Galerkin mode)
    selected_points_ : ndarray of complex
        Reachable-side selections.
    n_solves_ : int
        Large-scale solves over both sides.
    history_ : list of dict
    timings_ : dict
    """

    def __init__(self, tol_sample=1e-3, tol_svd=1e-8, order=None,
                 mode='two-sided', batch=3, max_points=None):
        self.tol_sample = tol_sample
        self.tol_svd = tol_svd
        self.order = order
        self.mode = mode
        self.batch = batch
        self.max_points = max_points

    def fit(self, X, y=None, callback=None):
        check_system(X)
        check_mode(self.mode)
        check_positive('tol_sample', self.tol_sample)
        check_positive('batch', self.batch, integer=True)
        check_positive('order', self.order, integer=True, allow_none=True)
        check_positive('max_points', self.max_points, integer=True,
                       allow_none=True)
        training = check_training(y)
        galerkin = self.mode == 'galerkin'
        handles = {}
        t0 = time.perf_counter()
        kw = dict(tol=self.tol_sample, batch=self.batch,
                  max_points=self.max_points, handles=handles,
                  callback=callback)
        basis_v = active_sample(SylvesterProblem(X, training, REACHABILITY),
                                **kw)
        basis_w = None
        if not galerkin:
            # observable side starts from the reachable-side selections
            basis_w = active_sample(
                SylvesterProblem(X, training, OBSERVABILITY),
                initial_points=list(basis_v.selected_points), **kw)
        handles.clear()
        t1 = time.perf_counter()
        V_p, W_p, s_row, s_col, r = dominant_svd_lowrank(
            X, basis_v, basis_w, tol=self.tol_svd, order=self.order)
        t2 = time.perf_counter()
        rom, V_p, W_p = petrov_galerkin(X, V_p, V_p if galerkin else W_p)
        self.rom_ = RomRealization(rom, V_p, W_p, s_row, s_col)
        t3 = time.perf_counter()
        self.training_ = training
        self.basis_v_, self.basis_w_ = basis_v, basis_w
        self.order_ = r
        self.sigma_row_, self.sigma_col_ = s_row, s_col
        self.selected_points_ = training.points[basis_v.selected_points]
        self.n_solves_ = basis_v.n_solves + (basis_w.n_solves if basis_w
                                             else 0)
        self.history_ = basis_v.history + (basis_w.history if basis_w
                                           else [])
        self.warnings_ = basis_v.warnings + (basis_w.warnings if basis_w
                                             else [])
        self.timings_ = {'basis': t1 - t0, 'svd': t2 - t1,
                         'projection': t3 - t2, 'total': t3 - t0}
        return self
