"""Run reports: JSON summaries and CSV tables emitted by the CLI."""

import csv
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List

import numpy as np

__all__ = ['RunReport', 'write_csv', 'sigma_to_json', 'sigma_from_json']


def sigma_to_json(points):
    return [[float(np.real(z)), float(np.imag(z))] for z in points]


def sigma_from_json(pairs):
    return np.array([complex(a, b) for a, b in pairs], dtype=complex)


@dataclass
class RunReport:
    method: str
    system: str
    solve_count_large: int
    selected_points: List[List[float]]
    rom_order: int
    order_rule: str
    omega: List[float] = field(default_factory=list)
    H_mag: List[float] = field(default_factory=list)
    Hr_mag: List[float] = field(default_factory=list)
    e: List[float] = field(default_factory=list)
    e_max: float = float('nan')
    timings: Dict[str, float] = field(default_factory=dict)
    eps_history: List[dict] = field(default_factory=list)
    eps_normalization: str = 'relative to ||rhs||_F (absolute also logged)'
    warnings: List[str] = field(default_factory=list)

    @property
    def n_representatives(self):
        return len(self.selected_points)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def write_csv(path, header, columns):
    """Write equally long columns with a header row and ``%.17g`` floats."""
    rows = zip(*columns)
    with open(path, 'w', newline='') as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else '%.17g' % v
                             for v in row])
