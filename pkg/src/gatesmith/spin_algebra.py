"""Product operator algebra for three coupled spin-1/2 nuclei.

Basis states are ordered |abc> with ``a`` the first spin, so the state
index is ``4a + 2b + c`` (zero based).  Spin operators are the
half-normalised Pauli matrices, and the 63 product operators carry the
usual ``2**(q-1)`` scaling, where ``q`` is the number of spins involved.

Propagators are different: their angles refer to the bare product
``I1a I2b ...`` without the scaling factor, which is how pulse sequences
are usually written down (``exp(-i 2pi I1z I2z I3x)`` uses the plain
product).
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

N_SPINS = 3
DIM = 2**N_SPINS
AXES = ("x", "y", "z")

CONSTRUCTION_TOL = 1e-12
VERIFY_TOL = 1e-9
LOAD_TOL = 1e-8

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex) / 2,
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex) / 2,
    "z": np.array([[1, 0], [0, -1]], dtype=complex) / 2,
}

GENERATOR_KINDS = ("single", "bilinear", "trilinear", "coupled_chain")


class MatrixFormatError(ValueError):
    """Raised for malformed or non-unitary matrix files."""


def pauli(axis: str) -> np.ndarray:
    """Return the spin-1/2 operator ``I_axis`` (Pauli matrix divided by 2)."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}") from None


@dataclass(frozen=True)
class ProductOperator:
    """A product of single-spin operators, at most one factor per spin.

    ``factors`` is a tuple of ``(spin, axis)`` pairs with spins in 1..3.
    Construction sorts the factors by spin index, so
    ``ProductOperator(((3, "y"), (2, "z")))`` equals ``I2z I3y``.
    """

    factors: tuple[tuple[int, str], ...]

    def __post_init__(self):
        factors = tuple(sorted((int(k), str(a)) for k, a in self.factors))
        if not 1 <= len(factors) <= N_SPINS:
            raise ValueError("a product operator needs 1 to 3 factors")
        spins = [k for k, _ in factors]
        if len(set(spins)) != len(spins):
            raise ValueError(f"spin repeated in {factors}")
        for k, a in factors:
            if k not in (1, 2, 3) or a not in AXES:
                raise ValueError(f"bad factor {(k, a)}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, spins: str | tuple[int, ...], axes: str) -> ProductOperator:
        """Build from compact spin and axis strings, e.g. ``of("12", "zz")``."""
        if len(spins) != len(axes):
            raise ValueError(f"{len(spins)} spins but {len(axes)} axes")
        return cls(tuple((int(k), a) for k, a in zip(spins, axes)))

    @property
    def q(self) -> int:
        return len(self.factors)

    @property
    def spins(self) -> str:
        return "".join(str(k) for k, _ in self.factors)

    @property
    def axes(self) -> str:
        return "".join(a for _, a in self.factors)

    @property
    def subspace(self) -> str:
        """Name of the su(8) subspace this operator lives in."""
        if self.q == 1:
            return f"l{self.spins}"
        if self.q == 2:
            return {"12": "p1", "23": "p2", "13": "p3"}[self.spins]
        return "q"

    def __str__(self):
        return "".join(f"I{k}{a}" for k, a in self.factors)


def product_matrix(op: ProductOperator) -> np.ndarray:
    """Bare Kronecker product ``I_{k a} ...`` with identity on absent spins."""
    present = dict(op.factors)
    mats = [_PAULI[present[k]] if k in present else np.eye(2) for k in (1, 2, 3)]
    return functools.reduce(np.kron, mats)


def realize(op: ProductOperator) -> np.ndarray:
    """Basis element ``2**(q-1) * prod I_{k a}`` as an 8x8 Hermitian matrix."""
    return 2 ** (op.q - 1) * product_matrix(op)


def basis_operators() -> list[ProductOperator]:
    """All 63 product operators, grouped by subspace (l1..l3, p1..p3, q)."""
    ops = [ProductOperator(((k, a),)) for k in (1, 2, 3) for a in AXES]
    for pair in ((1, 2), (2, 3), (1, 3)):
        for a, b in itertools.product(AXES, repeat=2):
            ops.append(ProductOperator(((pair[0], a), (pair[1], b))))
    for a, b, c in itertools.product(AXES, repeat=3):
        ops.append(ProductOperator(((1, a), (2, b), (3, c))))
    return ops


@dataclass(frozen=True)
class Generator:
    """One propagator ``exp(-i * theta * H)`` of a pulse sequence.

    ``H`` is the bare product of ``operator`` (single, bilinear or
    trilinear kinds) or ``I1zI2z + I2zI3z`` for the coupled chain.
    ``theta`` is a non-negative angle in radians; ``reverse`` flips the
    sense of rotation, giving ``exp(+i * theta * H)``.
    """

    kind: str
    operator: ProductOperator | None
    theta: float
    reverse: bool = False

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.kind == "coupled_chain":
            if self.operator is not None:
                raise ValueError("coupled_chain takes no operator")
        else:
            expected_q = GENERATOR_KINDS.index(self.kind) + 1
            if self.operator is None or self.operator.q != expected_q:
                raise ValueError(f"{self.kind} needs a {expected_q}-spin operator")
        if not np.isfinite(self.theta):
            raise ValueError("theta must be finite")
        if self.theta < 0:
            raise ValueError("theta must be >= 0; use reverse=True for negative rotations")

    @property
    def signed_theta(self) -> float:
        return -self.theta if self.reverse else self.theta

    def with_theta(self, theta: float) -> Generator:
        return Generator(self.kind, self.operator, theta, self.reverse)

    @property
    def structure(self) -> tuple:
        """Hashable identity of the generator, ignoring its angle."""
        return (self.kind, self.operator, self.reverse)

    def __str__(self):
        op = "I1zI2z+I2zI3z" if self.operator is None else str(self.operator)
        sign = "+" if self.reverse else "-"
        return f"exp({sign}i*{np.degrees(self.theta):g}deg*{op})"


@functools.lru_cache(maxsize=None)
def _hamiltonian(kind: str, operator: ProductOperator | None) -> np.ndarray:
    if kind == "coupled_chain":
        return product_matrix(ProductOperator.of("12", "zz")) + product_matrix(
            ProductOperator.of("23", "zz")
        )
    return product_matrix(operator)


@functools.lru_cache(maxsize=None)
def _eigh(kind: str, operator: ProductOperator | None):
    w, v = np.linalg.eigh(_hamiltonian(kind, operator))
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def generator_matrix(g: Generator) -> np.ndarray:
    """Hermitian matrix ``H`` of the generator (without the angle)."""
    return _hamiltonian(g.kind, g.operator).copy()


def propagators(kind: str, operator: ProductOperator | None, thetas) -> np.ndarray:
    """Batch of ``exp(-i * theta * H)`` for an array of signed angles.

    Returns an array of shape ``thetas.shape + (8, 8)``.
    """
    w, v = _eigh(kind, operator)
    thetas = np.asarray(thetas, dtype=float)
    phases = np.exp(-1j * thetas[..., None] * w)
    return (v * phases[..., None, :]) @ v.conj().T


def propagator(g: Generator) -> np.ndarray:
    """Unitary ``exp(-i * theta * H)`` by eigendecomposition."""
    return propagators(g.kind, g.operator, g.signed_theta)


def hard_pulse(spin: int, axis: str, theta: float) -> np.ndarray:
    """Single-spin rotation ``exp(-i * theta * I_{spin axis})``; theta may be negative."""
    return propagators("single", ProductOperator(((spin, axis),)), theta)


def is_unitary(m: np.ndarray, tol: float = CONSTRUCTION_TOL) -> bool:
    m = np.asarray(m)
    if m.shape != (DIM, DIM):
        return False
    return bool(np.linalg.norm(m.conj().T @ m - np.eye(DIM)) <= tol)


def phase_invariant_distance(G: np.ndarray, U: np.ndarray) -> tuple[float, float]:
    """Frobenius distance between ``G`` and ``U`` minimised over a global phase.

    Returns ``(distance, phase)`` where ``phase`` is the angle ``phi`` that
    minimises ``||G - exp(i phi) U||``, namely ``arg Tr(U^dagger G)``.
    """
    G = np.asarray(G, dtype=complex)
    U = np.asarray(U, dtype=complex)
    overlap = np.vdot(U, G)
    phase = float(np.angle(overlap)) if abs(overlap) > 0 else 0.0
    distance = float(np.linalg.norm(G - np.exp(1j * phase) * U))
    return distance, phase


# -- matrix text format ----------------------------------------------------

def _parse_complex(token: str) -> complex:
    z = complex(token.replace("i", "j"))
    if not np.isfinite(z):
        raise ValueError(token)
    return z


def parse_matrix(text: str, tol: float = LOAD_TOL, source: str = "<string>") -> np.ndarray:
    """Parse the 8-line complex matrix format and check unitarity."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != DIM:
            raise MatrixFormatError(
                f"{source}:{lineno}: expected {DIM} entries, found {len(tokens)}"
            )
        row = []
        for tok in tokens:
            try:
                row.append(_parse_complex(tok))
            except ValueError:
                raise MatrixFormatError(f"{source}:{lineno}: bad complex entry {tok!r}") from None
        rows.append(row)
    if len(rows) != DIM:
        raise MatrixFormatError(f"{source}: expected {DIM} rows, found {len(rows)}")
    m = np.array(rows, dtype=complex)
    err = np.linalg.norm(m.conj().T @ m - np.eye(DIM))
    if err > tol:
        raise MatrixFormatError(f"{source}: matrix is not unitary (||U'U - 1|| = {err:.3g})")
    return m


def load_matrix(path: str | Path, tol: float = LOAD_TOL) -> np.ndarray:
    path = Path(path)
    return parse_matrix(path.read_text(), tol=tol, source=str(path))


def format_matrix(m: np.ndarray) -> str:
    lines = []
    for row in np.asarray(m, dtype=complex):
        lines.append(" ".join(f"{z.real:.17g}{z.imag:+.17g}i" for z in row))
    return "\n".join(lines) + "\n"
