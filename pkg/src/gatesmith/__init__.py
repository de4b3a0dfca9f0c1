"""Pulse-sequence synthesis for three coupled spins with a hierarchical hybrid GA."""

from .encoding import (
    FULL,
    LINEAR_CHAIN,
    CouplingTopology,
    PulseSequence,
    decode,
    decode_angle,
    random_chromosome,
    sequence_unitary,
    step_cost,
)
from .ga_engine import FITNESS_MAX, GaConfig, fitness, run, sweep_N
from .gate_library import conventional_costs, get_gate, paper_sequences, verify
from .local_opt import RefineConfig, hill_climb, refine_ga
from .pipeline import synthesize
from .spin_algebra import (
    Generator,
    ProductOperator,
    basis_operators,
    hard_pulse,
    pauli,
    phase_invariant_distance,
    propagator,
    realize,
)

__version__ = "0.1.0"
