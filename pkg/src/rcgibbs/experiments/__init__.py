"""Experiment drivers: worked examples, property sweeps, model studies."""

from .examples import run_example1, run_example2, sweep_correlation_bound
from .cayley import (
    cayley_fixed_points,
    cayley_pbar,
    crossing_scan,
    run_cayley,
    transition_matrix,
)
from .hardcore import hardcore_disagreement
from .ea import ea_mns_percolation, quenched_couplings
