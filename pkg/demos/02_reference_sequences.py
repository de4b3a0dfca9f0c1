"""
Reference sequences for three gates
===================================

Simulate the short sequences known for the invert-on-equality, parity
and fanout gates, compare them with the gate matrices up to a global
phase, and set their evolution time against the conventional circuits.
"""

import numpy as np

from gatesmith import conventional_costs, get_gate, paper_sequences, verify
from gatesmith.encoding import format_sequence
from gatesmith.gate_library import printed_invert_on_equality

conv = conventional_costs()
for name, seq in paper_sequences().items():
    gate = get_gate(name)
    report = verify(seq, gate.matrix)
    print(f"--- {name}: {gate.note}")
    print(format_sequence(seq), end="")
    print(f"distance {report.distance:.1e}, global phase {report.phase / np.pi:+.3f} pi")
    print(f"time {seq.total_time:.3f}/J against {conv[name]:.3f}/J conventional\n")

###############################################################################
# Only two of the three beat their conventional circuit.  The invert-on-
# equality baseline assumes all three couplings are active, while the
# sequence above works on a linear chain with J13 = 0.
print("parity time ratio:", round(paper_sequences()["parity"].total_time / conv["parity"], 4))

###############################################################################
# The frequently printed invert-on-equality matrix carries an extra swap of
# |100> and |101>.  The sequence reproduces the diagonal gate, not that one.
seq = paper_sequences()["invert_on_equality"]
print("distance to printed matrix:", verify(seq, printed_invert_on_equality()).distance)
