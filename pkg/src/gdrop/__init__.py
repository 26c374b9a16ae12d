"""Interpolatory model reduction of linear structured systems with actively
sampled interpolation points."""

from .core import (Constant, Exponential, Power, Scaled, ShiftedRational,
                   StructuredSystem, TrainingSet, conjugate_closure, eval_K,
                   eval_transfer, evaluate_f_diag, frequency_grid)
from .drop import RomRealization, rom_error_metric
from .estimators import ActiveSylvesterSolver, DropReducer, GdropReducer
from .models import (gen_delay_rod, gen_fading_memory, gen_fom,
                     gen_second_order, make_benchmark)
from .sylvester import SylvesterProblem, active_sample

__version__ = '0.1.0'
