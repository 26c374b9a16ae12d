"""Benchmark systems at full size or reduced desk size.

All generators are deterministic; the ones that use random vectors take a
``seed``.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .core import (Constant, Exponential, Power, Scaled, ShiftedRational,
                   StructuredSystem, frequency_grid)
from .exceptions import UnsupportedSize

__all__ = ['BenchmarkSpec', 'BENCHMARKS', 'gen_fom', 'gen_delay_rod',
           'gen_fading_memory', 'gen_second_order', 'laplacian_1d',
           'laplacian_2d', 'make_benchmark']

FOM_ORDER = 1006


@dataclass(frozen=True)
class BenchmarkSpec:
    """Default configuration of one benchmark family."""

    kind: str
    size: int
    omega_range: Tuple[float, float]
    grid_size: int
    params: dict = field(default_factory=dict)

    def training_set(self, num=None, spacing='log'):
        return frequency_grid(*self.omega_range,
                              self.grid_size if num is None else num,
                              spacing)


BENCHMARKS = {
    'fom': BenchmarkSpec('fom', FOM_ORDER, (1e-1, 1e3), FOM_ORDER),
    'delay-rod': BenchmarkSpec('delay-rod', 1200, (1e-3, 1e3), 1200,
                               {'tau': 3.0}),
    'fading-memory': BenchmarkSpec('fading-memory', 128, (1e-2, 1e4), 100,
                                   {'gamma': 1.05, 'seed': 0}),
    'second-order': BenchmarkSpec('second-order', 500, (1e2, 1e6), 100,
                                  {'beta': 1e-6}),
}


def gen_fom(n=FOM_ORDER, scaled=False):
    """The artificial full-order LTI benchmark.

    ``A`` is block diagonal with the three oscillatory 2x2 blocks
    ``[[-1, w], [-w, -1]]`` for ``w`` in (100, 200, 400) followed by
    ``diag(-1, ..., -(n-6))``; ``B = C^T`` has 10 in the first six entries and
    1 elsewhere. ``K(s) = s I - A``.

    Sizes other than 1006 require ``scaled=True``.
    """
    if n != FOM_ORDER and not scaled:
        raise UnsupportedSize(f'FOM is defined for n={FOM_ORDER}; pass '
                              f'scaled=True for n={n}')
    if n < 7:
        raise UnsupportedSize('scaled FOM needs n >= 7')
    blocks = [np.array([[-1.0, w], [-w, -1.0]]) for w in (100.0, 200.0, 400.0)]
    blocks.append(sp.diags(-np.arange(1.0, n - 5)))
    A = sp.block_diag(blocks, format='csr')
    b = np.ones(n)
    b[:6] = 10.0
    return StructuredSystem((sp.identity(n, format='csr'), A),
                            (Power(1), Constant(-1.0)),
                            b[:, np.newaxis], b[np.newaxis, :], name='fom')


def laplacian_1d(n):
    """Dirichlet finite-difference Laplacian on ``(0, 1)`` with ``n`` nodes."""
    h = 1.0 / (n + 1)
    e = np.ones(n)
    return sp.diags([e[:-1], -2 * e, e[:-1]], [-1, 0, 1], format='csr') / h**2


def laplacian_2d(side):
    """5-point Dirichlet Laplacian on the unit square, ``side**2`` nodes."""
    L = laplacian_1d(side)
    I = sp.identity(side, format='csr')
    return sp.csr_matrix(sp.kron(L, I) + sp.kron(I, L))


def gen_delay_rod(n=1200, tau=3.0, kappa=None):
    """Heated rod with distributed control cooled by delayed feedback.

    ``K(s) = s I - A - exp(-tau s) A_tau`` with ``A`` the 1-D Dirichlet
    Laplacian and ``A_tau = -kappa I``. By default ``kappa`` is half the
    smallest eigenvalue magnitude of ``A``, which keeps the system stable for
    every delay. ``B`` is the all-ones vector times the mesh width, ``C``
    averages the state.
    """
    if n < 3:
        raise UnsupportedSize('delay rod needs n >= 3')
    h = 1.0 / (n + 1)
    A = laplacian_1d(n)
    if kappa is None:
        kappa = 0.5 * (4.0 / h**2) * np.sin(np.pi * h / 2)**2
    A_tau = -kappa * sp.identity(n, format='csr')
    B = h * np.ones((n, 1))
    C = np.ones((1, n)) / n
    return StructuredSystem(
        (sp.identity(n, format='csr'), A, A_tau),
        (Power(1), Constant(-1.0), Scaled(-1.0, Exponential(-tau))),
        B, C, name='delay-rod')


def gen_fading_memory(grid_side=128, gamma=1.05, seed=0):
    """Heat equation with fading memory.

    ``K(s) = s I - A + A / (s + gamma)`` with ``A`` the 2-D Dirichlet
    Laplacian on ``grid_side**2`` nodes. ``B`` and ``C`` are fixed-seed
    random sign vectors of unit norm.
    """
    if grid_side < 4:
        raise UnsupportedSize('fading-memory model needs grid_side >= 4')
    A = laplacian_2d(grid_side)
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    b = rng.choice([-1.0, 1.0], size=n)
    c = rng.choice([-1.0, 1.0], size=n)
    return StructuredSystem(
        (sp.identity(n, format='csr'), A, A),
        (Power(1), Constant(-1.0), ShiftedRational(gamma)),
        b[:, np.newaxis] / np.linalg.norm(b),
        c[np.newaxis, :] / np.linalg.norm(c), name='fading-memory')


def gen_second_order(n_dof=500, beta=1e-6, stiffness=1e10, n_outputs=1,
                     M=None, K=None):
    """Synthetic mass-spring-damper chain ``s^2 M + s E + K`` with ``E = beta K``.

    Masses vary deterministically in ``[1, 2]``; ``K`` is the fixed-fixed
    tridiagonal chain stiffness. The force acts on the node at one third of
    the chain, outputs read displacements at evenly spaced nodes.
    ``M`` and ``K`` may be given explicitly.
    """
    if M is None or K is None:
        if n_dof < 2:
            raise UnsupportedSize('second-order chain needs n_dof >= 2')
        masses = 1.0 + 0.5 * (1 + np.sin(np.arange(n_dof)))
        M = sp.diags(masses, format='csr')
        e = np.ones(n_dof)
        K = stiffness * sp.diags([-e[:-1], 2 * e, -e[:-1]], [-1, 0, 1],
                                 format='csr')
        B = np.zeros((n_dof, 1))
        B[n_dof // 3, 0] = 1.0
        C = np.zeros((n_outputs, n_dof))
        for k, node in enumerate(np.linspace(n_dof // 2, n_dof - 1,
                                             n_outputs).astype(int)):
            C[k, node] = 1.0
    else:
        n_dof = M.shape[0]
        B = np.ones((n_dof, 1))
        C = np.ones((1, n_dof))
    E = beta * K
    return StructuredSystem((M, E, K), (Power(2), Power(1), Constant(1.0)),
                            B, C, name='second-order')


def make_benchmark(kind, size=None, **params):
    """Build a benchmark by name, returning ``(system, BenchmarkSpec)``.

    ``size`` means ``n`` for ``fom`` and ``delay-rod``, the grid side for
    ``fading-memory`` and the number of degrees of freedom for
    ``second-order``. Extra keyword arguments override family parameters
    (``tau``, ``gamma``, ``seed``, ``beta``) and the frequency range
    (``omega_range``) and grid size (``grid_size``).
    """
    try:
        spec = BENCHMARKS[kind]
    except KeyError:
        raise ValueError(f'unknown benchmark {kind!r}; choose from '
                         f'{sorted(BENCHMARKS)}') from None
    size = spec.size if size is None else int(size)
    omega_range = tuple(params.pop('omega_range', spec.omega_range))
    grid_size = params.pop('grid_size', None)
    merged = {**spec.params, **params}
    if kind == 'fom':
        system = gen_fom(size, scaled=size != FOM_ORDER)
        default_grid = size
    elif kind == 'delay-rod':
        system = gen_delay_rod(size, tau=merged['tau'],
                               kappa=merged.get('kappa'))
        default_grid = size
    elif kind == 'fading-memory':
        system = gen_fading_memory(size, gamma=merged['gamma'],
                                   seed=merged['seed'])
        default_grid = spec.grid_size
    else:
        system = gen_second_order(size, beta=merged['beta'],
                                  n_outputs=int(merged.get('n_outputs', 1)))
        default_grid = spec.grid_size
    out = BenchmarkSpec(kind, size, omega_range,
                        int(grid_size or default_grid), merged)
    return system, out
