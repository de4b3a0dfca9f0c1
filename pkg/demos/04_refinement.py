"""
Polishing angles after the search
=================================

The GA resolves angles to 5 degrees.  Jitter every angle of the parity
sequence by up to 10 degrees and recover the exact sequence twice, once by
coordinate descent and once with a small continuous-angle GA.
"""

import time

import numpy as np

from gatesmith import RefineConfig, hill_climb, paper_sequences, phase_invariant_distance
from gatesmith.gate_library import get_gate
from gatesmith.local_opt import refine_ga

exact = paper_sequences()["parity"]
target = get_gate("parity").matrix
cfg = RefineConfig(floor=0.0, phase_free=True)

rng = np.random.default_rng(1)
bad = exact.with_angles(np.radians(np.array(exact.angles_deg) + rng.uniform(-10, 10, 3)))
print("jittered angles:", np.round(bad.angles_deg, 2))

for label, fn in (("hill climb", lambda: hill_climb(bad, target, cfg)),
                  ("refine GA", lambda: refine_ga(bad, target, 0, cfg))):
    t0 = time.perf_counter()
    out = fn()
    d, _ = phase_invariant_distance(out.unitary(), target)
    print(f"{label:10s} {np.round(out.angles_deg, 3)} distance {d:.1e} in {time.perf_counter() - t0:.2f} s")
