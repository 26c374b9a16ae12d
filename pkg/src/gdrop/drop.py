"""Dominant reachable/observable subspace projection.

Two routes lead to the projection matrices ``V_p`` and ``W_p``:

* the direct route solves at every training point and takes SVDs of
  ``[W^T A_1 V, ..., W^T A_l V]`` and its vertical stack;
* the low-rank route works with factors ``V ~ S_v Z`` and ``W ~ S_w Y`` and
  only ever takes SVDs of matrices whose size depends on the basis ranks.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as spla
import scipy.sparse as sp

from .core import StructuredSystem, TrainingSet, eval_K, evaluate_f_diag
from .exceptions import DimensionMismatch, SingularK
from .linalg import factorize, svd
from .sylvester import LowRankBasis

__all__ = ['SubspacePair', 'RomRealization', 'build_bases_direct',
           'dominant_svd_direct', 'choose_order', 'project',
           'petrov_galerkin', 'dominant_svd_lowrank', 'rom_error_metric',
           'transfer_on_grid', 'ORDER_RULE']

ORDER_RULE = 'tail-energy'


@dataclass
class SubspacePair:
    """Reachable-side and observable-side data.

    ``V`` and ``W`` are either real dense bases or :class:`LowRankBasis`
    factors. ``W is None`` marks the one-sided (Galerkin) case ``W := V``.
    """

    V: object
    W: object = None
    n_solves: int = 0

    @property
    def galerkin(self):
        return self.W is None


@dataclass
class RomRealization:
    """Reduced system sharing the scalar functions of the full model."""

    system: StructuredSystem
    V_p: np.ndarray
    W_p: np.ndarray
    sigma_row: Optional[np.ndarray] = None
    sigma_col: Optional[np.ndarray] = None

    @property
    def order(self):
        return self.V_p.shape[1]


def _real_block(v, sigma):
    if np.imag(sigma) == 0:
        return v.real
    return np.hstack([v.real, v.imag])


def build_bases_direct(system, training, galerkin=False):
    """Real bases of ``V`` and ``W`` from one factorization per point.

    Each complex representative contributes ``[Re v, Im v]``, which spans the
    same space as ``[v, conj(v)]``. The transposed solve for ``W`` reuses the
    factorization. ``n_solves`` counts large solves per side.
    """
    V_cols, W_cols = [], []
    n_solves = 0
    for sigma in training.points:
        handle = factorize(eval_K(system, sigma), sigma=sigma)
        V_cols.append(_real_block(handle.solve(system.B), sigma))
        n_solves += 1
        if not galerkin:
            W_cols.append(_real_block(handle.solve(system.C.T, trans=True),
                                      sigma))
            n_solves += 1
    V = np.hstack(V_cols)
    W = None if galerkin else np.hstack(W_cols)
    return SubspacePair(V, W, n_solves)


def _dense(pair_side):
    if isinstance(pair_side, LowRankBasis):
        return _lowrank_real(pair_side)
    return pair_side


def _lowrank_real(basis):
    """Real matrix with the range of ``S Z``."""
    return basis.S @ np.hstack([basis.Z.real, basis.Z.imag])


def dominant_svd_direct(system, pair):
    """SVDs of the horizontal concatenation and vertical stack of
    ``W^T A_i V``.

    Returns
    -------
    row : SvdBundle
        SVD of ``[W^T A_1 V, ..., W^T A_l V]``; ``row.U`` is ``W_1``.
    col : SvdBundle
        SVD of the vertical stack; ``col.V`` is ``V_2``.
    """
    V = _dense(pair.V)
    W = V if pair.galerkin else _dense(pair.W)
    blocks = [W.T @ np.asarray(A @ V) for A in system.matrices]
    return svd(np.hstack(blocks)), svd(np.vstack(blocks))


def _order_from(sigma, tol):
    sigma = np.asarray(sigma, dtype=float)
    total = sigma.sum()
    if total == 0:
        return 0
    # tail[r] = sum_{j >= r} sigma_j / total, r = 0..len
    tail = np.concatenate([np.cumsum(sigma[::-1])[::-1], [0.0]]) / total
    return int(np.argmax(tail < tol))


def choose_order(sigma_row, sigma_col, tol=1e-8, order=None):
    """ROM order from the two singular value sequences.

    ``r_i`` is the smallest integer whose relative tail sum
    ``sum_{j > r_i} s_j / sum_j s_j`` is below ``tol``; the result is
    ``min(r_1, r_2)``. An explicit ``order`` overrides the rule but is capped
    at the number of available singular values.
    """
    cap = min(len(sigma_row), len(sigma_col))
    if order is not None:
        return int(min(order, cap))
    if not 0 < tol < 1:
        raise ValueError('tol must lie in (0, 1)')
    return min(_order_from(sigma_row, tol), _order_from(sigma_col, tol))


def petrov_galerkin(system, V_p, W_p, orthonormalize=True):
    """Reduced system ``(W^T A_i V, W^T B, C V)`` with the same functions.

    With ``orthonormalize`` the bases are replaced by orthonormal bases of
    their ranges first, which leaves the reduced transfer function unchanged.
    """
    same = W_p is V_p
    if orthonormalize:
        V_p = spla.qr(V_p, mode='economic')[0]
        W_p = V_p if same else spla.qr(W_p, mode='economic')[0]
    if V_p.shape != W_p.shape:
        raise DimensionMismatch(f'V_p {V_p.shape} and W_p {W_p.shape} differ')
    mats = tuple(W_p.T @ np.asarray(A @ V_p) for A in system.matrices)
    if same:
        # W_p^T A V_p with W_p = V_p is symmetric for symmetric A; enforce
        # exactly what rounding breaks
        mats = tuple(0.5 * (M + M.T) if _is_symmetric(A) else M
                     for M, A in zip(mats, system.matrices))
    rom = StructuredSystem(mats, system.functions, W_p.T @ system.B,
                           system.C @ V_p, name=system.name + '-rom')
    return rom, V_p, W_p


def _is_symmetric(A):
    diff = A - A.T
    if sp.issparse(diff):
        return diff.count_nonzero() == 0
    return not np.any(diff)


def project(system, pair, row, col, r):
    """``V_p = V V_2(:, :r)``, ``W_p = W W_1(:, :r)`` and the reduced system.

    In the Galerkin case ``W_p := V_p``.
    """
    V = _dense(pair.V)
    if r > min(row.U.shape[1], col.Vt.shape[0]):
        raise DimensionMismatch(f'order {r} exceeds available rank')
    V_p = V @ col.V[:, :r]
    if pair.galerkin:
        W_p = V_p
    else:
        W_p = _dense(pair.W) @ row.U[:, :r]
    rom, V_p, W_p = petrov_galerkin(system, V_p, W_p)
    return RomRealization(rom, V_p, W_p, row.S, col.S)


def _real_coeffs(Z):
    """``[Re Z, Im Z]`` without the all-zero imaginary columns."""
    keep = np.any(Z.imag != 0, axis=0)
    return np.hstack([Z.real, Z.imag[:, keep]])


def _factor_svd(Z):
    bundle = svd(_real_coeffs(Z))
    s = bundle.S
    if len(s) == 0:
        return bundle.U, s
    rank = int(np.sum(s > s[0] * max(Z.shape) * np.finfo(float).eps))
    return bundle.U[:, :rank], s[:rank]


def dominant_svd_lowrank(system, basis_v, basis_w=None, tol=1e-8,
                         order=None):
    """Projection matrices from low-rank factors.

    With ``Z = U_z S_z V_z^T`` and ``Y = U_y S_y V_y^T`` the small matrix

        Mhat = [S_y U_y^T S_w^T A_i S_v U_z S_z]_{i=1..l}

    carries all information of the full concatenation. From
    ``Mhat = U_m S_m V_m^T`` and the SVD of its vertical stack
    (``Ut_m St_m Vt_m^T``)::

        W_p = S_w U_y S_y U_m[:, :r],    V_p = S_v U_z S_z Vt_m[:, :r].

    ``basis_w=None`` is the Galerkin case (``S_w = S_v``, ``Y = Z`` and
    ``W_p := V_p``).

    Returns
    -------
    V_p, W_p : ndarray
    sigma_row, sigma_col : ndarray
        Singular values of ``Mhat`` and of its stack.
    r : int
    """
    galerkin = basis_w is None
    if galerkin:
        basis_w = basis_v
    U_z, s_z = _factor_svd(basis_v.Z)
    U_y, s_y = _factor_svd(basis_w.Z)
    left = (U_y * s_y).T @ basis_w.S.T       # S_y U_y^T S_w^T
    right = U_z * s_z                        # U_z S_z
    # S_w^T A_i S_v from the cached reachable-side products A_i S_v
    blocks = [left @ (P @ right) for P in basis_v.cached_products]
    row = svd(np.hstack(blocks))
    col = svd(np.vstack(blocks))
    r = choose_order(row.S, col.S, tol, order)
    V_p = basis_v.S @ (right @ col.V[:, :r])
    if galerkin:
        W_p = V_p
    else:
        W_p = basis_w.S @ ((U_y * s_y) @ row.U[:, :r])
    return V_p, W_p, row.S, col.S, r


def transfer_on_grid(system, points):
    """``H`` at every point as an ``(len(points), p, m)`` array.

    Dense systems are evaluated with a batched solve; sparse systems with one
    sparse LU per point.
    """
    points = np.asarray(points, dtype=complex).ravel()
    if not system.is_sparse:
        F = evaluate_f_diag(system, points)
        mats = np.array([np.asarray(A) for A in system.matrices])
        K = np.einsum('ij,ikl->jkl', F, mats)
        rhs = np.broadcast_to(system.B.astype(complex),
                              (len(points),) + system.B.shape)
        try:
            X = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularK(f'reduced K is singular on the grid: {exc}')
        return np.einsum('pn,jnm->jpm', system.C, X)
    out = np.empty((len(points), system.p, system.m), dtype=complex)
    for j, s in enumerate(points):
        X = factorize(eval_K(system, s), sigma=s).solve(system.B)
        out[j] = system.C @ X
    return out


def _sigma_max(H):
    if H.shape[1] == 1 and H.shape[2] == 1:
        return np.abs(H[:, 0, 0])
    return np.linalg.norm(H, ord=2, axis=(1, 2))


def rom_error_metric(fom, rom, grid, H_fom=None):
    """Pointwise error ``e(s) = s_max(Hr(s) - H(s)) / max_grid s_max(H)``.

    Parameters
    ----------
    fom : StructuredSystem
    rom : RomRealization or StructuredSystem
    grid : TrainingSet or array of complex
    H_fom : ndarray, optional
        Precomputed full-model values on ``grid``.

    Returns
    -------
    e : ndarray
    e_max : float
    """
    pts = grid.points if isinstance(grid, TrainingSet) else grid
    rom_sys = rom.system if isinstance(rom, RomRealization) else rom
    if H_fom is None:
        H_fom = transfer_on_grid(fom, pts)
    H_rom = transfer_on_grid(rom_sys, pts)
    e = _sigma_max(H_rom - H_fom) / _sigma_max(H_fom).max()
    return e, float(e.max())
