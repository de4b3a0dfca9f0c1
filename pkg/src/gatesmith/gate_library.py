"""Built-in three-qubit target gates, reference sequences and verification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import PulseSequence, parse_sequence
from .spin_algebra import DIM, VERIFY_TOL, phase_invariant_distance


class UnknownGateError(KeyError):
    def __str__(self):
        return self.args[0]


def _permutation(swaps) -> np.ndarray:
    """Permutation matrix exchanging the given 1-based basis indices."""
    order = list(range(DIM))
    for a, b in swaps:
        order[a - 1], order[b - 1] = order[b - 1], order[a - 1]
    return np.eye(DIM)[order].astype(complex)


def _invert_on_equality() -> np.ndarray:
    # (-1)^(d_ab d_bc): only |000> and |111> pick up a sign
    return np.diag([-1, 1, 1, 1, 1, 1, 1, -1]).astype(complex)


def printed_invert_on_equality() -> np.ndarray:
    """The invert-on-equality matrix as commonly printed, with an extra 5<->6 swap.

    It is not the diagonal gate its own definition describes; kept only so
    the discrepancy can be checked against the synthesized sequence.
    """
    m = _invert_on_equality()
    m[4:6, 4:6] = [[0, 1], [1, 0]]
    return m


# Result sequences, global-phase factors dropped.  Negative angles are
# reversed rotations.
_PAPER_SEQUENCES = {
    "invert_on_equality": """
        tri 123 zxy 360
        chain - zz+zz 180
        tri 123 zyx 360
        bi 23 yy 180
    """,
    "parity": """
        single 3 x 270
        bi 12 zz -180
        tri 123 zzx 360
    """,
    "fanout": """
        bi 23 xx -180
        tri 123 zxx 360
        single 1 z 270
    """,
}

# Reference times of the conventional circuits, in units of 1/J.
_CONVENTIONAL = {"parity": 2.5, "fanout": 2.5}


@dataclass(frozen=True)
class GateSpec:
    name: str
    matrix: np.ndarray
    note: str
    conventional_cost: float | None = None
    paper_sequence: PulseSequence | None = None


def conventional_invert_on_equality_cost(J12: float = 1.0, J23: float = 1.0, J13: float = 1.0) -> float:
    """Three ZZ evolutions of 1/(2 J_kl) each, with all couplings active."""
    return 1 / (2 * J12) + 1 / (2 * J23) + 1 / (2 * J13)


def conventional_costs() -> dict[str, float]:
    costs = dict(_CONVENTIONAL)
    costs["invert_on_equality"] = conventional_invert_on_equality_cost()
    return costs


def paper_sequences() -> dict[str, PulseSequence]:
    return {name: parse_sequence(text, source=name) for name, text in _PAPER_SEQUENCES.items()}


_GATES = {
    "invert_on_equality": (
        _invert_on_equality,
        "sign flip of |000> and |111>: (-1)^(d_ab d_bc)|abc>",
    ),
    "parity": (
        lambda: _permutation([(3, 4), (5, 6)]),
        "target spin 3 gets the parity of spins 1 and 2 added (mod 2)",
    ),
    "fanout": (
        lambda: _permutation([(5, 8), (6, 7)]),
        "control spin 1 is added (mod 2) onto spins 2 and 3",
    ),
    "lambda2_iz": (
        lambda: np.diag([1, 1, 1, 1, 1, 1, 1, -1]).astype(complex),
        "doubly controlled Z: sign flip of |111> only",
    ),
}

GATE_NAMES = tuple(_GATES)


def get_gate(name: str) -> GateSpec:
    if name not in _GATES:
        raise UnknownGateError(f"unknown gate {name!r}; known gates: {', '.join(GATE_NAMES)}")
    build, note = _GATES[name]
    seqs = paper_sequences()
    return GateSpec(
        name=name,
        matrix=build(),
        note=note,
        conventional_cost=conventional_costs().get(name),
        paper_sequence=seqs.get(name),
    )


@dataclass(frozen=True)
class VerifyReport:
    distance: float  # minimised over global phase
    phase: float
    raw_distance: float
    total_time: float
    hard_pulse_count: int
    tolerance: float
    up_to_phase: bool
    passed: bool

    def lines(self) -> list[str]:
        return [
            f"pass: {'yes' if self.passed else 'no'}",
            f"distance (phase-free): {self.distance:.3e}",
            f"distance (raw): {self.raw_distance:.3e}",
            f"global phase: {self.phase:.6f} rad",
            f"total time: {self.total_time:.4f} /J",
            f"hard pulses (proxy): {self.hard_pulse_count}",
        ]


def verify(
    seq: PulseSequence, target, tol: float = VERIFY_TOL, up_to_phase: bool = True
) -> VerifyReport:
    """Simulate ``seq`` and compare it with ``target``."""
    G = seq.unitary()
    target = np.asarray(target, dtype=complex)
    distance, phase = phase_invariant_distance(G, target)
    raw = float(np.linalg.norm(G - target))
    checked = distance if up_to_phase else raw
    return VerifyReport(
        distance=distance,
        phase=phase,
        raw_distance=raw,
        total_time=seq.total_time,
        hard_pulse_count=seq.hard_pulse_count,
        tolerance=tol,
        up_to_phase=up_to_phase,
        passed=bool(checked <= tol),
    )
