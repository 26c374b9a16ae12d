import csv
import json

import numpy as np
import pytest

from gdrop.cli import main
from gdrop.io import load_system
from gdrop.report import RunReport


def _csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_gen_then_reduce(tmp_path):
    assert main(['gen', 'delay-rod', '--size', '60', '--grid', '40',
                 '--out', str(tmp_path / 'gen')]) == 0
    cfg = tmp_path / 'gen' / 'delay_rod.json'
    out = tmp_path / 'red'
    log = tmp_path / 'log.jsonl'
    assert main(['reduce', str(cfg), '--order', '6', '--out', str(out),
                 '--log-json', str(log)]) == 0
    report = RunReport.from_json((out / 'report.json').read_text())
    assert report.rom_order == 6 and report.order_rule == 'override'
    assert report.solve_count_large <= 2 * report.n_representatives
    assert report.e_max < 1e-3
    records = [json.loads(line) for line in log.read_text().splitlines()]
    assert records and {'iteration', 'eps_rel', 'n_p'} <= set(records[0])
    rom, _ = load_system(out / 'rom' / 'rom.json')
    assert rom.n == 6
    header, data = _csv(out / 'response.csv')
    assert header == ['omega', 'H', 'Hr', 'e'] and data.shape[0] == 80


def test_report_json_roundtrip(tmp_path):
    main(['reduce', 'delay-rod', '--size', '40', '--grid', '20',
          '--method', 'drop', '--out', str(tmp_path)])
    text = (tmp_path / 'report.json').read_text()
    rep = RunReport.from_json(text)
    assert RunReport.from_json(rep.to_json()) == rep
    assert rep.solve_count_large == 2 * 20
    assert rep.order_rule == 'tail-energy'


def test_reduce_reproducible(tmp_path):
    for name in ('a', 'b'):
        main(['reduce', 'fading-memory', '--size', '8', '--grid', '30',
              '--out', str(tmp_path / name)])
    a = json.loads((tmp_path / 'a' / 'report.json').read_text())
    b = json.loads((tmp_path / 'b' / 'report.json').read_text())
    for key in ('selected_points', 'rom_order', 'e', 'solve_count_large'):
        assert a[key] == b[key]


def test_galerkin_reduce(tmp_path):
    assert main(['reduce', 'second-order', '--size', '40', '--grid', '30',
                 '--mode', 'galerkin', '--order', '6',
                 '--out', str(tmp_path)]) == 0
    rep = RunReport.from_json((tmp_path / 'report.json').read_text())
    assert all(h['side'] == 'reachability' for h in rep.eps_history)


def test_compare_outputs(tmp_path):
    assert main(['compare', 'delay-rod', '--size', '80', '--grid', '60',
                 '--order', '6', '--out', str(tmp_path)]) == 0
    header, data = _csv(tmp_path / 'compare.csv')
    assert header[-1] == 'selected_omega'
    summary = json.loads((tmp_path / 'summary.json').read_text())
    assert summary['solves_drop'] == 120
    assert summary['solves_gdrop'] < summary['solves_drop']
    assert (data[:, -1] > 0).sum() == len(summary['selected_points'])
    assert summary['speedup'] > 0


def test_export_rom_only(tmp_path):
    assert main(['export-rom', 'fom', '--grid', '50', '--order', '10',
                 '--out', str(tmp_path)]) == 0
    assert (tmp_path / 'rom' / 'rom_A1.mtx').exists()
    assert not (tmp_path / 'report.json').exists()


def test_sweep_solve_counts(tmp_path):
    assert main(['sweep', 'fading-memory', '--size', '8', '--grids',
                 '25,200', '--order', '4', '--out', str(tmp_path)]) == 0
    header, data = _csv(tmp_path / 'sweep.csv')
    assert header == ['N', 't_drop', 't_gdrop', 'solves_drop',
                      'solves_gdrop']
    np.testing.assert_array_equal(data[:, 3], 2 * data[:, 0])
    assert data[1, 4] <= 2 * data[0, 4]


def test_sweep_single_grid(tmp_path):
    main(['sweep', 'delay-rod', '--size', '30', '--grids', '20',
          '--order', '2', '--out', str(tmp_path)])
    _, data = _csv(tmp_path / 'sweep.csv')
    assert data.reshape(-1, 5).shape[0] == 1


def test_errors_are_reported(tmp_path, capsys):
    assert main(['reduce', str(tmp_path / 'missing.json'),
                 '--out', str(tmp_path)]) == 1
    assert 'ParseError' in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(['reduce', 'fom', '--range', 'bad'])
