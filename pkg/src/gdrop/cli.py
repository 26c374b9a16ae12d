"""Command line front end: ``gdrop {gen,reduce,compare,sweep,export-rom}``.

CONFIG is a JSON configuration file or the name of a built-in benchmark
(``fom``, ``delay-rod``, ``fading-memory``, ``second-order``).
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .core import frequency_grid
from .drop import ORDER_RULE, rom_error_metric, transfer_on_grid
from .estimators import DropReducer, GdropReducer
from .io import load_system, save_system, system_from_config, \
    training_from_config
from .models import BENCHMARKS
from .report import RunReport, sigma_to_json, write_csv

log = logging.getLogger('gdrop')


class CommandError(RuntimeError):
    pass


def _parse_range(text):
    try:
        lo, hi = (float(x) for x in text.split(':'))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f'expected wmin:wmax, got {text!r}') from None
    return lo, hi


def _parse_int_list(text):
    return [int(x) for x in text.split(',') if x]


def _load(args):
    """System, training set and configuration for a CONFIG argument."""
    if args.config in BENCHMARKS:
        cfg = {'benchmark': {'kind': args.config}}
        if getattr(args, 'size', None):
            cfg['benchmark']['size'] = args.size
        system, cfg = system_from_config(cfg, seed=args.seed)
    else:
        system, cfg = load_system(args.config, seed=args.seed)
    training = training_from_config(cfg, omega_range=args.range,
                                    num=args.grid)
    return system, training, cfg


def _fit(method, system, training, args, order=None, callback=None):
    try:
        return _fit_unchecked(method, system, training, args, order,
                              callback)
    except (ValueError, np.linalg.LinAlgError) as exc:
        where = getattr(exc, 'sigma', None)
        raise CommandError(
            f'{system.name or "system"}: {method} failed'
            f'{"" if where is None else f" at sigma={where}"}: {exc}'
        ) from exc


def _fit_unchecked(method, system, training, args, order, callback):
    order = args.order if order is None else order
    if method == 'drop':
        est = DropReducer(tol=args.tol_svd, order=order, mode=args.mode)
        est.fit(system, training)
    else:
        est = GdropReducer(tol_sample=args.tol_sample, tol_svd=args.tol_svd,
                           order=order, mode=args.mode, batch=args.batch,
                           max_points=args.max_points)
        est.fit(system, training, callback=callback)
    return est


def _eval_grid(training):
    w = np.abs(training.points.imag)
    return frequency_grid(w.min(), w.max(), 2 * len(training))


def _sigma_max(H):
    return np.linalg.norm(H, ord=2, axis=(1, 2))


def _report(method, system, est, eval_grid, H, args):
    e, e_max = rom_error_metric(system, est.rom_, eval_grid, H_fom=H)
    Hr = transfer_on_grid(est.rom_.system, eval_grid.points)
    rule = 'override' if args.order else ORDER_RULE
    return RunReport(
        method=method, system=system.name,
        solve_count_large=int(est.n_solves_),
        selected_points=sigma_to_json(est.selected_points_),
        rom_order=int(est.order_), order_rule=rule,
        omega=eval_grid.points.imag.tolist(),
        H_mag=_sigma_max(H).tolist(), Hr_mag=_sigma_max(Hr).tolist(),
        e=e.tolist(), e_max=e_max, timings=est.timings_,
        eps_history=list(est.history_),
        warnings=list(getattr(est, 'warnings_', [])))


def _log_sink(args):
    if not args.log_json:
        return None, None
    fh = sys.stdout if args.log_json == '-' else open(args.log_json, 'w')

    def emit(record):
        fh.write(json.dumps(record) + '\n')
        fh.flush()
    return emit, fh


def cmd_gen(args):
    spec = BENCHMARKS[args.kind]
    cfg = {'benchmark': {'kind': args.kind}}
    if args.size:
        cfg['benchmark']['size'] = args.size
    freq = {}
    if args.range:
        freq['range'] = list(args.range)
    if args.grid:
        freq['N'] = args.grid
    if freq:
        cfg['frequency'] = freq
    system, cfg = system_from_config(cfg, seed=args.seed)
    path = save_system(system, args.out, frequency=cfg['frequency'],
                       name=args.kind.replace('-', '_'))
    print(f'wrote {path} (n={system.n}, m={system.m}, p={system.p}, '
          f'l={system.n_terms})')
    return 0


def cmd_reduce(args, write_report=True):
    system, training, cfg = _load(args)
    emit, fh = _log_sink(args)
    try:
        est = _fit(args.method, system, training, args, callback=emit)
    finally:
        if fh not in (None, sys.stdout):
            fh.close()
    print(f'method={args.method} order={est.order_} '
          f'(rule: {"override" if args.order else ORDER_RULE}) '
          f'large solves={est.n_solves_} '
          f'points={len(est.selected_points_)} '
          f'time={est.timings_["total"]:.3f}s')
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_system(est.rom_.system, out / 'rom', name='rom')
    if write_report:
        grid = _eval_grid(training)
        H = transfer_on_grid(system, grid.points)
        report = _report(args.method, system, est, grid, H, args)
        (out / 'report.json').write_text(report.to_json(indent=1))
        write_csv(out / 'response.csv', ['omega', 'H', 'Hr', 'e'],
                  [report.omega, report.H_mag, report.Hr_mag, report.e])
        print(f'max e(s) = {report.e_max:.3e}; wrote {out}/report.json')
    return 0


def cmd_export_rom(args):
    return cmd_reduce(args, write_report=False)


def _compare(system, training, args):
    drop = _fit('drop', system, training, args)
    gdrop = _fit('gdrop', system, training, args, order=drop.order_)
    return drop, gdrop


def cmd_compare(args):
    system, training, cfg = _load(args)
    drop, gdrop = _compare(system, training, args)
    grid = _eval_grid(training)
    H = transfer_on_grid(system, grid.points)
    rd = _report('drop', system, drop, grid, H, args)
    rg = _report('gdrop', system, gdrop, grid, H, args)
    w = np.asarray(rd.omega)
    sel = np.abs(np.imag(gdrop.selected_points_))
    marker = np.zeros(len(w))
    # nearest evaluation frequency to each selected point
    for s in sel:
        marker[np.argmin(np.abs(np.log(w) - np.log(s)))] = s
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / 'compare.csv',
              ['omega', 'H', 'Hr_drop', 'Hr_gdrop', 'e_drop', 'e_gdrop',
               'selected_omega'],
              [rd.omega, rd.H_mag, rd.Hr_mag, rg.Hr_mag, rd.e, rg.e, marker])
    t_d, t_g = drop.timings_['total'], gdrop.timings_['total']
    summary = {
        'system': system.name, 'order': int(drop.order_),
        'e_max_drop': rd.e_max, 'e_max_gdrop': rg.e_max,
        'max_rom_difference': float(np.max(np.abs(
            np.asarray(rd.Hr_mag) - np.asarray(rg.Hr_mag)))
            / np.max(rd.H_mag)),
        'time_drop': t_d, 'time_gdrop': t_g,
        'speedup': t_d / t_g if t_g > 0 else float('inf'),
        'solves_drop': int(drop.n_solves_), 'solves_gdrop':
            int(gdrop.n_solves_),
        'selected_points': sigma_to_json(gdrop.selected_points_),
        'order_rule': 'override' if args.order else ORDER_RULE,
    }
    (out / 'summary.json').write_text(json.dumps(summary, indent=1))
    print(json.dumps({k: v for k, v in summary.items()
                      if k != 'selected_points'}, indent=1))
    return 0


def cmd_sweep(args):
    rows = []
    for N in args.grids:
        args.grid = N
        system, training, _ = _load(args)
        drop, gdrop = _compare(system, training, args)
        rows.append((N, drop.timings_['total'], gdrop.timings_['total'],
                     drop.n_solves_, gdrop.n_solves_))
        print('N=%d t_drop=%.3f t_gdrop=%.3f solves_drop=%d solves_gdrop=%d'
              % rows[-1])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / 'sweep.csv',
              ['N', 't_drop', 't_gdrop', 'solves_drop', 'solves_gdrop'],
              list(zip(*rows)))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog='gdrop',
        description='Interpolatory model reduction of structured linear '
                    'systems with actively sampled interpolation points.')
    parser.add_argument('-v', '--verbose', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p):
        p.add_argument('config', help='JSON config or built-in benchmark '
                       f'({", ".join(BENCHMARKS)})')
        p.add_argument('--size', type=int, help='size of a built-in '
                       'benchmark')
        p.add_argument('--method', choices=['drop', 'gdrop'],
                       default='gdrop')
        p.add_argument('--tol-sample', type=float, default=1e-3)
        p.add_argument('--tol-svd', type=float, default=1e-8)
        p.add_argument('--order', type=int)
        p.add_argument('--mode', choices=['two-sided', 'galerkin'],
                       default='two-sided')
        p.add_argument('--batch', type=int, default=3)
        p.add_argument('--max-points', type=int)
        p.add_argument('--grid', type=int, help='training set size N')
        p.add_argument('--range', type=_parse_range, help='wmin:wmax')
        p.add_argument('--seed', type=int)
        p.add_argument('--out', default='out')
        p.add_argument('--log-json', help='JSON-lines iteration log '
                       '(path or -)')

    for name, func, help_ in [
            ('reduce', cmd_reduce, 'build a ROM and report its accuracy'),
            ('compare', cmd_compare, 'DROP vs GDROP at the same order'),
            ('export-rom', cmd_export_rom, 'build a ROM and write its '
             'matrices only')]:
        p = sub.add_parser(name, help=help_)
        common(p)
        p.set_defaults(func=func)
    p = sub.add_parser('sweep', help='timings over several training sizes')
    common(p)
    p.add_argument('--grids', type=_parse_int_list, default=[25, 50, 100,
                                                             200])
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser('gen', help='write a benchmark to Matrix Market files')
    p.add_argument('kind', choices=sorted(BENCHMARKS))
    p.add_argument('--size', type=int)
    p.add_argument('--grid', type=int)
    p.add_argument('--range', type=_parse_range)
    p.add_argument('--seed', type=int)
    p.add_argument('--out', default='.')
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else
                        logging.WARNING)
    try:
        return args.func(args)
    except (CommandError, ValueError, OSError,
            np.linalg.LinAlgError) as exc:
        print(f'gdrop {args.command}: {type(exc).__name__}: {exc}',
              file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
