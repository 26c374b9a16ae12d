"""Numerical kernels: reusable factorizations, orthonormal basis growth, SVD,
principal angles."""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla
import scipy.sparse as sp
import scipy.sparse.linalg as spsla

from .exceptions import ConvergenceFailure, DimensionMismatch, SingularK

__all__ = ['SolveHandle', 'factorize', 'orth_append', 'SvdBundle', 'svd',
           'principal_angles']

DEFLATION_TOL = 1e-10


class SolveHandle:
    """LU factorization of a square complex matrix, sparse or dense.

    Reusable for any number of right-hand sides, with plain (non-conjugate)
    transposed solves available through ``trans=True``.
    """

    def __init__(self, K, sigma=None):
        self.sigma = sigma
        self.shape = K.shape
        if K.shape[0] != K.shape[1]:
            raise DimensionMismatch(f'cannot factorize non-square {K.shape}')
        if sp.issparse(K):
            self.sparse = True
            K = sp.csc_matrix(K, dtype=complex)
            if not np.all(np.isfinite(K.data)):
                raise SingularK('K has non-finite entries', sigma)
            try:
                self._lu = spsla.splu(K)
            except RuntimeError as exc:
                raise SingularK(f'sparse LU failed: {exc}', sigma) from exc
        else:
            self.sparse = False
            K = np.asarray(K, dtype=complex)
            if not np.all(np.isfinite(K)):
                raise SingularK('K has non-finite entries', sigma)
            with warnings.catch_warnings():
                # exact zero pivots are reported below as SingularK
                warnings.simplefilter('ignore', spla.LinAlgWarning)
                lu, piv = spla.lu_factor(K, check_finite=False)
            if np.any(np.diag(lu) == 0):
                raise SingularK('zero pivot in dense LU', sigma)
            self._lu = (lu, piv)

    def solve(self, b, trans=False):
        b = np.asarray(b)
        b = b.astype(complex, copy=False)
        if self.sparse:
            x = self._lu.solve(b, trans='T' if trans else 'N')
        else:
            x = spla.lu_solve(self._lu, b, trans=1 if trans else 0,
                              check_finite=False)
        if not np.all(np.isfinite(x)):
            raise SingularK('solve produced non-finite values', self.sigma)
        return x


def factorize(K, sigma=None):
    """Factorize ``K``; raises :class:`SingularK` instead of failing later."""
    return SolveHandle(K, sigma=sigma)


def orth_append(S_old, new_cols, tol=DEFLATION_TOL):
    """Extend an orthonormal basis by the span of ``new_cols``.

    Each new column is orthogonalized twice against the current basis
    (classical Gram-Schmidt with one reorthogonalization pass) and dropped if
    its remaining norm falls below ``tol`` times its original norm.

    Parameters
    ----------
    S_old : (n, k) ndarray
        Real matrix with orthonormal columns; ``k`` may be zero.
    new_cols : (n, q) ndarray
        Real candidate columns.

    Returns
    -------
    (n, k') ndarray
        Orthonormal basis with ``k <= k' <= k + q``; the first ``k`` columns
        are ``S_old`` unchanged.
    """
    new_cols = np.asarray(new_cols, dtype=float)
    if new_cols.ndim == 1:
        new_cols = new_cols[:, np.newaxis]
    if S_old is None:
        S_old = np.zeros((new_cols.shape[0], 0))
    S_old = np.asarray(S_old, dtype=float)
    if S_old.shape[0] != new_cols.shape[0]:
        raise DimensionMismatch(f'basis has {S_old.shape[0]} rows, new '
                                f'columns have {new_cols.shape[0]}')
    added = []
    S = S_old
    for x in new_cols.T:
        x = x.copy()
        nrm0 = np.linalg.norm(x)
        if nrm0 == 0 or not np.isfinite(nrm0):
            continue
        for _ in range(2):
            if S.shape[1]:
                x -= S @ (S.T @ x)
            if added:
                Q = np.column_stack(added)
                x -= Q @ (Q.T @ x)
        nrm = np.linalg.norm(x)
        if nrm < tol * nrm0:
            continue
        added.append(x / nrm)
    if not added:
        return S_old.copy()
    return np.hstack([S_old, np.column_stack(added)])


@dataclass(frozen=True)
class SvdBundle:
    U: np.ndarray
    S: np.ndarray
    Vt: np.ndarray

    @property
    def V(self):
        return self.Vt.T


def svd(M):
    """Thin SVD; falls back to the QR-iteration driver if ``gesdd`` fails."""
    M = np.asarray(M)
    try:
        U, s, Vt = spla.svd(M, full_matrices=False, lapack_driver='gesdd')
    except np.linalg.LinAlgError:
        try:
            U, s, Vt = spla.svd(M, full_matrices=False,
                                lapack_driver='gesvd')
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure(str(exc)) from exc
    return SvdBundle(U, s, Vt)


def principal_angles(X, Y):
    """Principal angles between ``range(X)`` and ``range(Y)``, ascending.

    Uses the combined sine/cosine formulation so that angles far below
    ``sqrt(eps)`` are still resolved.
    """
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.ndim == 1:
        X = X[:, np.newaxis]
    if Y.ndim == 1:
        Y = Y[:, np.newaxis]
    if X.shape[0] != Y.shape[0]:
        raise DimensionMismatch(f'{X.shape} vs {Y.shape}')
    return np.sort(spla.subspace_angles(X, Y))
