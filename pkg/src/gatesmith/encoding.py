"""Chromosome decoding, pulse sequences and their J-coupling time cost.

A chromosome is an ``N x 4`` matrix of digits 0-9.  Column 1 picks a
subspace, column 2 an operator inside it, and columns 3-4 the angle
``45 * c3 + 5 * c4`` degrees.  Rows read top to bottom give the matrix
factors left to right, so the last row acts first in time.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spin_algebra import (
    DIM,
    Generator,
    ProductOperator,
    propagator,
    propagators,
)

MIN_ROWS, MAX_ROWS = 3, 10
N_COLS = 4

# column-2 index -> axis pair for bilinear and trilinear subspaces
PAIR_AXES = {
    1: ("x", "x"),
    2: ("x", "y"),
    3: ("x", "z"),
    4: ("y", "x"),
    5: ("y", "y"),
    6: ("y", "z"),
    7: ("z", "y"),
    8: ("z", "x"),
    9: ("z", "z"),
}

# column-1 digit -> (family, spins); 7/8/9 are trilinear with first axis x/y/z
SUBSPACES = {
    1: ("single", "1"),
    2: ("bilinear", "12"),
    3: ("single", "2"),
    4: ("bilinear", "23"),
    5: ("single", "3"),
    6: ("bilinear", "13"),
    7: ("trilinear", "x"),
    8: ("trilinear", "y"),
    9: ("trilinear", "z"),
}

TOPOLOGY_MODES = ("full", "linear_chain")


class SequenceFormatError(ValueError):
    """Raised for malformed sequence or chromosome text."""


@dataclass(frozen=True)
class CouplingTopology:
    """Which couplings are active.  Costs are always reported in units of 1/J."""

    mode: str = "linear_chain"
    J: float = 1.0

    def __post_init__(self):
        if self.mode not in TOPOLOGY_MODES:
            raise ValueError(f"topology mode must be one of {TOPOLOGY_MODES}, got {self.mode!r}")
        if not self.J > 0:
            raise ValueError("J must be positive")


FULL = CouplingTopology("full")
LINEAR_CHAIN = CouplingTopology("linear_chain")


def decode_angle(c3: int, c4: int) -> int:
    """Angle in whole degrees encoded by the last two digits of a row."""
    return 45 * int(c3) + 5 * int(c4)


def decode_generator(c1: int, c2: int, theta: float, topo: CouplingTopology = LINEAR_CHAIN):
    """Generator selected by the first two digits, or None for a no-op row."""
    c1, c2 = int(c1), int(c2)
    if c1 == 0:
        return None
    idx = 9 if c2 == 0 else c2
    family, spins = SUBSPACES[c1]
    if family == "single":
        axis = "xyz"[(idx - 1) % 3]
        return Generator("single", ProductOperator.of(spins, axis), theta)
    if family == "bilinear":
        if spins == "13" and topo.mode == "linear_chain":
            return Generator("coupled_chain", None, theta)
        return Generator("bilinear", ProductOperator.of(spins, "".join(PAIR_AXES[idx])), theta)
    first = spins
    return Generator("trilinear", ProductOperator.of("123", first + "".join(PAIR_AXES[idx])), theta)


def step_cost(g: Generator) -> float:
    """Evolution time of one propagator in units of 1/J.

    Hard pulses are free.  Bilinear and coupled-chain steps cost
    ``theta / 2pi``.  Trilinear steps follow the geodesic cost
    ``sqrt(k (4 - k)) / 2`` with ``k = theta / 2pi``.  Reversed steps cost
    the same as forward ones.
    """
    theta = g.theta
    if theta < 0:
        raise ValueError("rotation angle must be non-negative")
    kappa = theta / (2 * np.pi)
    if g.kind == "single":
        return 0.0
    if g.kind in ("bilinear", "coupled_chain"):
        return kappa
    if kappa > 4:
        raise ValueError(f"trilinear angle {np.degrees(theta):g} deg outside the cost model")
    return float(np.sqrt(kappa * (4 - kappa)) / 2)


def hard_pulse_count(g: Generator) -> int:
    """Rough count of hard pulses needed to realise one step.

    A single-spin rotation is one pulse.  Every transverse factor of a
    coupling propagator needs a pair of pi/2 pulses around it, and a
    reversed coupling step a further pair of pi pulses.
    """
    if g.kind == "single":
        return 1
    if g.kind == "coupled_chain":
        n = 0
    else:
        n = 2 * sum(a != "z" for a in g.operator.axes)
    return n + (2 if g.reverse else 0)


@dataclass(frozen=True)
class PulseSequence:
    """Ordered propagators; ``steps[0]`` is the leftmost matrix factor."""

    steps: tuple[Generator, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def step_costs(self) -> list[float]:
        return [step_cost(g) for g in self.steps]

    @property
    def total_time(self) -> float:
        return float(sum(self.step_costs))

    @property
    def hard_pulse_count(self) -> int:
        return sum(hard_pulse_count(g) for g in self.steps)

    @property
    def angles_deg(self) -> list[float]:
        return [float(np.degrees(g.theta)) for g in self.steps]

    def with_angles(self, thetas) -> PulseSequence:
        return PulseSequence(tuple(g.with_theta(float(t)) for g, t in zip(self.steps, thetas)))

    def unitary(self) -> np.ndarray:
        return sequence_unitary(self)

    def key(self) -> tuple:
        """Hashable identity used to de-duplicate candidates."""
        return tuple((g.structure, round(g.theta, 12)) for g in self.steps)


def validate_chromosome(chrom) -> np.ndarray:
    arr = np.asarray(chrom)
    if arr.ndim != 2 or arr.shape[1] != N_COLS:
        raise ValueError(f"chromosome must be N x {N_COLS}, got shape {arr.shape}")
    if not MIN_ROWS <= arr.shape[0] <= MAX_ROWS:
        raise ValueError(f"chromosome needs {MIN_ROWS}..{MAX_ROWS} rows, got {arr.shape[0]}")
    if not np.issubdtype(arr.dtype, np.integer) or arr.min() < 0 or arr.max() > 9:
        raise ValueError("chromosome entries must be digits 0-9")
    return arr


def decode(chrom, topo: CouplingTopology = LINEAR_CHAIN) -> PulseSequence:
    """Translate a digit matrix into its pulse sequence (no-op rows dropped)."""
    arr = validate_chromosome(chrom)
    steps = []
    for c1, c2, c3, c4 in arr:
        g = decode_generator(c1, c2, np.radians(decode_angle(c3, c4)), topo)
        if g is not None:
            steps.append(g)
    return PulseSequence(tuple(steps))


def sequence_unitary(seq: PulseSequence | list[Generator]) -> np.ndarray:
    u = np.eye(DIM, dtype=complex)
    for g in seq:
        u = u @ propagator(g)
    return u


def random_chromosome(n_rows: int, rng=None) -> np.ndarray:
    """Uniform random digit matrix; ``rng`` is a seed or a numpy Generator."""
    if not MIN_ROWS <= n_rows <= MAX_ROWS:
        raise ValueError(f"rows must be in {MIN_ROWS}..{MAX_ROWS}, got {n_rows}")
    rng = np.random.default_rng(rng)
    return rng.integers(0, 10, size=(n_rows, N_COLS))


class PropagatorTable:
    """Every row unitary, precomputed and indexed by the four digits.

    ``table[c1, c2, c3, c4]`` is the propagator of the row; no-op rows
    map to the identity.  Useful for evaluating whole populations at once.
    """

    def __init__(self, topo: CouplingTopology = LINEAR_CHAIN):
        self.topology = topo
        codes = np.arange(100)
        angles = np.radians(45 * (codes // 10) + 5 * (codes % 10))
        table = np.empty((10, 10, 100, DIM, DIM), dtype=complex)
        table[0] = np.eye(DIM)
        costs = np.zeros((10, 10, 100))
        for c1 in range(1, 10):
            for c2 in range(10):
                g = decode_generator(c1, c2, 0.0, topo)
                table[c1, c2] = propagators(g.kind, g.operator, angles)
                costs[c1, c2] = [step_cost(g.with_theta(t)) for t in angles]
        self._table = table.reshape(10, 10, 10, 10, DIM, DIM)
        self._costs = costs.reshape(10, 10, 10, 10)

    def unitaries(self, chroms) -> np.ndarray:
        """Sequence unitaries for an array of chromosomes, shape (..., N, 4)."""
        chroms = np.asarray(chroms)
        rows = self._table[chroms[..., 0], chroms[..., 1], chroms[..., 2], chroms[..., 3]]
        u = rows[..., 0, :, :]
        for k in range(1, chroms.shape[-2]):
            u = u @ rows[..., k, :, :]
        return u

    def costs(self, chroms) -> np.ndarray:
        chroms = np.asarray(chroms)
        return self._costs[chroms[..., 0], chroms[..., 1], chroms[..., 2], chroms[..., 3]].sum(-1)


@functools.lru_cache(maxsize=4)
def propagator_table(topo: CouplingTopology = LINEAR_CHAIN) -> PropagatorTable:
    return PropagatorTable(topo)


# -- sequence text format --------------------------------------------------

_KIND_WORDS = {
    "single": "single",
    "bi": "bilinear",
    "tri": "trilinear",
    "chain": "coupled_chain",
}
_WORD_FOR_KIND = {v: k for k, v in _KIND_WORDS.items()}


def format_step(g: Generator) -> str:
    word = _WORD_FOR_KIND[g.kind]
    deg = float(np.degrees(g.signed_theta))
    if g.kind == "coupled_chain":
        return f"{word} - zz+zz {deg!r}"
    return f"{word} {g.operator.spins} {g.operator.axes} {deg!r}"


def format_sequence(seq: PulseSequence) -> str:
    return "".join(format_step(g) + "\n" for g in seq)


def parse_step(line: str) -> Generator:
    parts = line.split()
    if len(parts) != 4:
        raise ValueError(f"expected '<kind> <spins> <axes> <theta_deg>', got {line.strip()!r}")
    word, spins, axes, deg = parts
    if word not in _KIND_WORDS:
        raise ValueError(f"unknown step kind {word!r} (expected one of {sorted(_KIND_WORDS)})")
    kind = _KIND_WORDS[word]
    try:
        deg = float(deg)
    except ValueError:
        raise ValueError(f"bad angle {deg!r}") from None
    theta = np.radians(abs(deg))
    if kind == "coupled_chain":
        if spins != "-" or axes != "zz+zz":
            raise ValueError("chain steps are written 'chain - zz+zz <deg>'")
        return Generator(kind, None, theta, reverse=deg < 0)
    if not re.fullmatch(r"[123]{1,3}", spins):
        raise ValueError(f"bad spin list {spins!r}")
    return Generator(kind, ProductOperator.of(spins, axes), theta, reverse=deg < 0)


def parse_sequence(text: str, source: str = "<string>") -> PulseSequence:
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            steps.append(parse_step(line))
        except ValueError as exc:
            raise SequenceFormatError(f"{source}:{lineno}: {exc}") from None
    return PulseSequence(tuple(steps))


def load_sequence(path: str | Path) -> PulseSequence:
    path = Path(path)
    return parse_sequence(path.read_text(), source=str(path))


def parse_chromosome(text: str, source: str = "<string>") -> np.ndarray:
    """Digit-matrix file: one row per line, four digits (spaces optional)."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        digits = line.replace(",", " ").split()
        if len(digits) == 1:
            digits = list(digits[0])
        if len(digits) != N_COLS or not all(d.isdigit() and len(d) == 1 for d in digits):
            raise SequenceFormatError(f"{source}:{lineno}: expected four digits 0-9, got {line!r}")
        rows.append([int(d) for d in digits])
    try:
        return validate_chromosome(np.array(rows, dtype=int).reshape(-1, N_COLS))
    except ValueError as exc:
        raise SequenceFormatError(f"{source}: {exc}") from None


def format_chromosome(chrom) -> str:
    return "".join(" ".join(str(int(d)) for d in row) + "\n" for row in np.asarray(chrom))
