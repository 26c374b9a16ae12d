"""Matrix Market files and JSON system configurations.

A configuration document describes a system either by named benchmark::

    {"benchmark": {"kind": "fom", "size": 1006},
     "frequency": {"range": [0.1, 1000.0], "N": 1006, "spacing": "log"}}

or by explicit terms::

    {"terms": [{"matrix": "identity", "function": {"kind": "power", "k": 1}},
               {"matrix": "A.mtx", "function": {"kind": "constant", "c": -1}}],
     "B": "B.mtx", "C": "C.mtx",
     "frequency": {"range": [0.1, 1000.0], "N": 200, "spacing": "log"}}

Relative paths are resolved against the configuration file's directory.
``"identity"`` is the only generator reference for matrices.
"""

import json
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .core import StructuredSystem, frequency_grid, function_from_dict
from .exceptions import DimensionMismatch, ParseError
from .models import make_benchmark

__all__ = ['read_mtx', 'write_mtx', 'load_config', 'system_from_config',
           'load_system', 'save_system', 'training_from_config']

_HEADER = '%%matrixmarket'


def read_mtx(path):
    """Read a Matrix Market file into a CSR matrix (or dense array for the
    ``array`` format)."""
    path = Path(path)
    try:
        with open(path, 'r') as fh:
            first = fh.readline()
    except OSError as exc:
        raise ParseError(f'cannot open: {exc.strerror}', path) from exc
    if not first.lower().startswith(_HEADER):
        raise ParseError('missing %%MatrixMarket header', path, 1)
    fields = first.lower().split()
    if len(fields) < 5 or fields[1] != 'matrix':
        raise ParseError(f'unsupported header {first.strip()!r}', path, 1)
    if fields[3] not in ('real', 'integer'):
        raise ParseError(f'only real matrices are supported, got '
                         f'{fields[3]!r}', path, 1)
    try:
        A = scipy.io.mmread(str(path))
    except (ValueError, IndexError) as exc:
        raise ParseError(str(exc), path, _first_bad_line(path)) from exc
    if sp.issparse(A):
        return sp.csr_matrix(A, dtype=float)
    return np.asarray(A, dtype=float)


def _first_bad_line(path):
    """Best-effort line number of the first malformed data line."""
    with open(path) as fh:
        lines = fh.readlines()
    seen_size = False
    for k, line in enumerate(lines, start=1):
        s = line.strip()
        if not s or s.startswith('%'):
            continue
        parts = s.split()
        try:
            [float(x) for x in parts]
        except ValueError:
            return k
        if not seen_size:
            seen_size = True
            continue
    return None


def write_mtx(path, A):
    """Write ``A`` in coordinate format with round-trip precision."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(A), precision=17)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f'cannot open: {exc.strerror}', path) from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno) from exc
    if not isinstance(cfg, dict):
        raise ParseError('configuration must be a JSON object', path, 1)
    return cfg


def training_from_config(cfg, omega_range=None, num=None, spacing=None):
    """Training set from the ``frequency`` block, with optional overrides."""
    freq = cfg.get('frequency', {})
    rng = omega_range or freq.get('range')
    num = num or freq.get('N')
    if rng is None or num is None:
        raise ValueError('no frequency range / grid size configured')
    return frequency_grid(float(rng[0]), float(rng[1]), int(num),
                          spacing or freq.get('spacing', 'log'))


def system_from_config(cfg, base_dir='.', seed=None):
    """Build the system described by a configuration mapping.

    Returns
    -------
    system : StructuredSystem
    cfg : dict
        The configuration with a filled-in ``frequency`` block for named
        benchmarks.
    """
    base_dir = Path(base_dir)
    cfg = dict(cfg)
    if 'benchmark' in cfg:
        bench = dict(cfg['benchmark'])
        kind = bench.pop('kind')
        size = bench.pop('size', None)
        if seed is not None and kind == 'fading-memory':
            bench['seed'] = seed
        freq = cfg.get('frequency', {})
        if 'range' in freq:
            bench['omega_range'] = tuple(freq['range'])
        if 'N' in freq:
            bench['grid_size'] = freq['N']
        system, spec = make_benchmark(kind, size, **bench)
        cfg['frequency'] = {'range': list(spec.omega_range),
                            'N': spec.grid_size,
                            'spacing': freq.get('spacing', 'log')}
        return system, cfg
    try:
        terms = cfg['terms']
        B = _matrix(cfg['B'], base_dir, None)
        C = _matrix(cfg['C'], base_dir, None)
    except KeyError as exc:
        raise ParseError(f'configuration lacks key {exc.args[0]!r}') from exc
    B = B.toarray() if sp.issparse(B) else B
    C = C.toarray() if sp.issparse(C) else C
    n = B.shape[0]
    mats, funcs = [], []
    for i, term in enumerate(terms):
        A = _matrix(term['matrix'], base_dir, n)
        if A.shape != (n, n):
            raise DimensionMismatch(f'term {i} ({term["matrix"]}): shape '
                                    f'{A.shape}, expected {(n, n)}')
        mats.append(A)
        funcs.append(function_from_dict(term['function']))
    system = StructuredSystem(tuple(mats), tuple(funcs), B, C,
                              name=cfg.get('name', ''))
    return system, cfg


def _matrix(ref, base_dir, n):
    if ref == 'identity':
        if n is None:
            raise ParseError('identity is only valid for system terms')
        return sp.identity(n, format='csr')
    path = Path(ref)
    if not path.is_absolute():
        path = base_dir / path
    return read_mtx(path)


def load_system(path, seed=None):
    """``(system, config)`` from a JSON configuration file."""
    path = Path(path)
    cfg = load_config(path)
    return system_from_config(cfg, path.parent, seed=seed)


def save_system(system, directory, frequency=None, name='system'):
    """Write matrices as Matrix Market files plus a loadable configuration.

    Returns the path of the configuration file.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    terms = []
    for i, (A, f) in enumerate(system.terms):
        fname = f'{name}_A{i + 1}.mtx'
        write_mtx(directory / fname, A)
        terms.append({'matrix': fname, 'function': f.to_dict()})
    write_mtx(directory / f'{name}_B.mtx', system.B)
    write_mtx(directory / f'{name}_C.mtx', system.C)
    cfg = {'name': system.name, 'terms': terms, 'B': f'{name}_B.mtx',
           'C': f'{name}_C.mtx'}
    if frequency is not None:
        cfg['frequency'] = frequency
    out = directory / f'{name}.json'
    out.write_text(json.dumps(cfg, indent=2))
    return out
