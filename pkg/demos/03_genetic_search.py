"""
Genetic search over digit chromosomes
=====================================

Each chromosome row holds four digits: subspace, operator, coarse and fine
angle.  A single bilinear target is found in a few generations.  The parity
gate is another matter, because the fitness landscape around the short
solution is a needle.
"""

import io

import numpy as np

from gatesmith import GaConfig, Generator, ProductOperator, decode, propagator, run
from gatesmith.encoding import format_sequence
from gatesmith.gate_library import get_gate

###############################################################################
# Decoding: row (4, 7, 2, 1) is a 95 degree rotation about I2z I3y
print(format_sequence(decode([[4, 7, 2, 1], [0, 0, 0, 0], [0, 0, 0, 0]])), end="")

###############################################################################
# A target the GA finds quickly
target = propagator(Generator("bilinear", ProductOperator.of("23", "zy"), np.radians(95)))
log = io.StringIO()
out = run(target, GaConfig(population_size=200, generations=50, rng_seed=4), log)
print(log.getvalue().splitlines()[-2:])
print("best:", format_sequence(out.best.sequence).strip(), "fitness", out.best.fitness)

###############################################################################
# Parity with a phase-free fitness.  Most seeds settle on the identity-like
# trap near fitness 0.125 to 0.3.
parity = get_gate("parity").matrix
for seed in range(3):
    cfg = GaConfig(population_size=500, generations=50, n_rows=4, rng_seed=seed, phase_free=True)
    best = run(parity, cfg).best
    print(f"seed {seed}: fitness {best.fitness:.3f}, time {best.total_time:.3f}/J")
