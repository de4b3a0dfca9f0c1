import itertools

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from gatesmith.spin_algebra import (
    AXES,
    Generator,
    MatrixFormatError,
    ProductOperator,
    basis_operators,
    format_matrix,
    generator_matrix,
    hard_pulse,
    is_unitary,
    parse_matrix,
    pauli,
    phase_invariant_distance,
    product_matrix,
    propagator,
    realize,
)

# single-spin matrix elements <s|I_a|s'> written out by hand
_ELEMENTS = {
    "x": {(0, 1): 0.5, (1, 0): 0.5},
    "y": {(0, 1): -0.5j, (1, 0): 0.5j},
    "z": {(0, 0): 0.5, (1, 1): -0.5},
}


def kron_oracle(op: ProductOperator) -> np.ndarray:
    """Build the scaled product operator element by element over |abc>."""
    present = dict(op.factors)
    m = np.zeros((8, 8), dtype=complex)
    for bra in itertools.product((0, 1), repeat=3):
        for ket in itertools.product((0, 1), repeat=3):
            val = 2 ** (op.q - 1)
            for k in range(3):
                if k + 1 in present:
                    val *= _ELEMENTS[present[k + 1]].get((bra[k], ket[k]), 0)
                elif bra[k] != ket[k]:
                    val = 0
            m[4 * bra[0] + 2 * bra[1] + bra[2], 4 * ket[0] + 2 * ket[1] + ket[2]] = val
    return m


def test_pauli_x():
    np.testing.assert_array_equal(pauli("x"), 0.5 * np.array([[0, 1], [1, 0]]))


def test_commutation_relations():
    x, y, z = (pauli(a) for a in AXES)
    np.testing.assert_allclose(x @ y - y @ x, 1j * z, atol=1e-12)
    np.testing.assert_allclose(y @ z - z @ y, 1j * x, atol=1e-12)
    np.testing.assert_allclose(z @ x - x @ z, 1j * y, atol=1e-12)


def test_squares_are_quarter_identity():
    for a in AXES:
        np.testing.assert_allclose(pauli(a) @ pauli(a), 0.25 * np.eye(2), atol=1e-12)


def test_pauli_rejects_unknown_axis():
    with pytest.raises(ValueError):
        pauli("w")


def test_product_operator_normalises_order():
    assert ProductOperator(((3, "y"), (2, "z"))) == ProductOperator.of("23", "zy")
    assert str(ProductOperator.of("23", "zy")) == "I2zI3y"


@pytest.mark.parametrize("factors", [(), ((1, "x"), (1, "y")), ((4, "x"),), ((1, "w"),)])
def test_product_operator_rejects_invalid(factors):
    with pytest.raises(ValueError):
        ProductOperator(factors)


def test_realize_single_z():
    np.testing.assert_allclose(
        realize(ProductOperator.of("1", "z")), np.diag([0.5] * 4 + [-0.5] * 4)
    )


def test_realize_zzz_matches_parity_sign():
    m = realize(ProductOperator.of("123", "zzz"))
    expected = [0.5 * (-1) ** (a + b + c) for a, b, c in itertools.product((0, 1), repeat=3)]
    np.testing.assert_allclose(m, np.diag(expected))
    np.testing.assert_allclose(np.diag(m), [0.5, -0.5, -0.5, 0.5, -0.5, 0.5, 0.5, -0.5])


@pytest.mark.parametrize("op", basis_operators(), ids=str)
def test_realize_matches_elementwise_oracle(op):
    np.testing.assert_allclose(realize(op), kron_oracle(op), atol=1e-15)


def test_basis_has_63_orthogonal_hermitian_traceless_elements():
    ops = basis_operators()
    assert len(ops) == 63 and len(set(ops)) == 63
    mats = [realize(op) for op in ops]
    for m in mats:
        np.testing.assert_allclose(m, m.conj().T, atol=1e-15)
        assert abs(np.trace(m)) < 1e-15
    gram = np.array([[np.trace(a @ b) for b in mats] for a in mats])
    # with the 2^(q-1) scaling every element has Tr(B^2) = 2
    np.testing.assert_allclose(gram, 2 * np.eye(63), atol=1e-12)
    vecs = np.array([m.ravel() for m in mats + [np.eye(8)]])
    assert np.linalg.matrix_rank(vecs) == 64


def test_subspace_sizes():
    counts = {}
    for op in basis_operators():
        counts[op.subspace] = counts.get(op.subspace, 0) + 1
    assert counts == {"l1": 3, "l2": 3, "l3": 3, "p1": 9, "p2": 9, "p3": 9, "q": 27}


def test_propagator_zero_angle_is_identity():
    g = Generator("trilinear", ProductOperator.of("123", "xyz"), 0.0)
    np.testing.assert_allclose(propagator(g), np.eye(8), atol=1e-15)


def test_pi_rotation_about_y_flips_z():
    r = propagator(Generator("single", ProductOperator.of("1", "y"), np.pi))
    i1z = product_matrix(ProductOperator.of("1", "z"))
    np.testing.assert_allclose(r @ i1z @ r.conj().T, -i1z, atol=1e-12)


def test_trilinear_from_zzz_by_hard_pulses():
    theta = 0.7
    zzz = propagator(Generator("trilinear", ProductOperator.of("123", "zzz"), theta))
    R = hard_pulse(1, "y", np.pi / 2) @ hard_pulse(2, "x", -np.pi / 2)
    lhs = propagator(Generator("trilinear", ProductOperator.of("123", "xyz"), theta))
    assert np.linalg.norm(lhs - R @ zzz @ R.conj().T) <= 1e-12


def test_bilinear_from_zz_by_hard_pulses():
    # the worked bilinear identity, with I1zI2z inside the conjugation
    theta = 0.7
    zz = propagator(Generator("bilinear", ProductOperator.of("12", "zz"), theta))
    R = hard_pulse(1, "x", -np.pi / 2) @ hard_pulse(2, "x", -np.pi / 2)
    lhs = propagator(Generator("bilinear", ProductOperator.of("12", "yy"), theta))
    assert np.linalg.norm(lhs - R @ zz @ R.conj().T) <= 1e-12
    # taken literally (I1yI2y on both sides) the identity does not hold
    yy_inside = R @ lhs @ R.conj().T
    assert np.linalg.norm(lhs - yy_inside) > 0.1


@pytest.mark.parametrize("seed", range(10))
def test_random_conjugation_stays_in_trilinear_subspace(seed):
    """Conjugating exp(-i t I1zI2zI3z) by pi/2 pulses gives another trilinear propagator."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi)
    R = np.eye(8)
    for spin in (1, 2, 3):
        choice = rng.integers(3)
        if choice:
            R = R @ hard_pulse(spin, "xy"[choice - 1], rng.choice([-1, 1]) * np.pi / 2)
    zzz = propagator(Generator("trilinear", ProductOperator.of("123", "zzz"), theta))
    conj = R @ zzz @ R.conj().T
    found = [
        (op, sign)
        for op in basis_operators()
        for sign in (1, -1)
        if op.q == 3
        and np.linalg.norm(conj - scipy.linalg.expm(-1j * sign * theta * kron_oracle(op) / 4)) < 1e-10
    ]
    assert len(found) == 1


def test_coupled_chain_generator():
    g = Generator("coupled_chain", None, 1.0)
    expected = product_matrix(ProductOperator.of("12", "zz")) + product_matrix(
        ProductOperator.of("23", "zz")
    )
    np.testing.assert_allclose(generator_matrix(g), expected)


def test_generator_validation():
    with pytest.raises(ValueError):
        Generator("bilinear", ProductOperator.of("1", "x"), 1.0)
    with pytest.raises(ValueError):
        Generator("single", ProductOperator.of("1", "x"), -1.0)
    with pytest.raises(ValueError):
        Generator("coupled_chain", ProductOperator.of("12", "zz"), 1.0)


def test_reverse_flag_negates_rotation():
    g = Generator("bilinear", ProductOperator.of("12", "zz"), np.pi, reverse=True)
    expected = scipy.linalg.expm(1j * np.pi * product_matrix(ProductOperator.of("12", "zz")))
    np.testing.assert_allclose(propagator(g), expected, atol=1e-12)


_ops = st.sampled_from([op for op in basis_operators()])


@settings(max_examples=100, deadline=None)
@given(op=_ops, theta=st.floats(0, 3 * np.pi))
def test_propagator_matches_expm_and_is_unitary(op, theta):
    kind = ("single", "bilinear", "trilinear")[op.q - 1]
    u = propagator(Generator(kind, op, theta))
    ref = scipy.linalg.expm(-1j * theta * kron_oracle(op) / 2 ** (op.q - 1))
    assert np.linalg.norm(u - ref) <= 1e-12
    assert np.linalg.norm(u.conj().T @ u - np.eye(8)) <= 1e-10


def random_unitary(rng):
    z = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / abs(np.diag(r)))


def test_phase_invariant_distance_basics():
    U = random_unitary(np.random.default_rng(0))
    d, phi = phase_invariant_distance(U, U)
    assert d == pytest.approx(0, abs=1e-12) and phi == pytest.approx(0, abs=1e-12)
    d, phi = phase_invariant_distance(np.exp(1j * np.pi / 4) * U, U)
    assert d == pytest.approx(0, abs=1e-12) and phi == pytest.approx(np.pi / 4, abs=1e-12)


def test_phase_invariant_distance_parity_vs_fanout_against_brute_force():
    P = np.eye(8)[[0, 1, 3, 2, 5, 4, 6, 7]]
    F = np.eye(8)[[0, 1, 2, 3, 7, 6, 5, 4]]
    phis = np.linspace(-np.pi, np.pi, 20001)
    brute = min(np.linalg.norm(P - np.exp(1j * p) * F) for p in phis)
    d, _ = phase_invariant_distance(P, F)
    assert d > 1
    assert d == pytest.approx(brute, abs=1e-6)
    # frozen from the brute-force minimum above: two common fixed points, sqrt(16 - 2*2)
    assert d == pytest.approx(3.4641016151377544, abs=1e-9)


def test_phase_invariant_distance_symmetry_and_triangle():
    rng = np.random.default_rng(1)
    for _ in range(50):
        A, B, C = (random_unitary(rng) for _ in range(3))
        dab = phase_invariant_distance(A, B)[0]
        assert dab == pytest.approx(phase_invariant_distance(B, A)[0], abs=1e-12)
        assert dab <= phase_invariant_distance(A, C)[0] + phase_invariant_distance(C, B)[0] + 1e-9


def test_is_unitary():
    assert is_unitary(np.eye(8))
    assert not is_unitary(2 * np.eye(8))
    assert not is_unitary(np.eye(4))


class TestMatrixFormat:
    def test_round_trip(self):
        U = random_unitary(np.random.default_rng(3))
        np.testing.assert_allclose(parse_matrix(format_matrix(U)), U, atol=1e-15)

    def test_comments_blank_lines_and_forms(self):
        rows = ["# header", ""]
        for i in range(8):
            entries = ["0"] * 8
            entries[i] = "1+0i" if i % 2 else "1.0e0-0.0i"
            rows.append(" ".join(entries) + "  # row")
        m = parse_matrix("\n".join(rows))
        np.testing.assert_array_equal(m, np.eye(8))

    def test_imaginary_entries(self):
        text = "\n".join(
            " ".join(("0+1i" if i == j else "0") for j in range(8)) for i in range(8)
        )
        np.testing.assert_array_equal(parse_matrix(text), 1j * np.eye(8))

    def test_wrong_row_length_has_line_number(self):
        text = "\n".join(["1 0 0 0 0 0 0 0"] * 2 + ["1 0"] + ["0"] * 5)
        with pytest.raises(MatrixFormatError, match=":3:"):
            parse_matrix(text)

    def test_bad_entry(self):
        text = "\n".join(["1 0 0 0 0 0 0 zz"] + ["1 0 0 0 0 0 0 0"] * 7)
        with pytest.raises(MatrixFormatError, match="bad complex"):
            parse_matrix(text)

    def test_non_unitary_rejected(self):
        text = "\n".join(" ".join(["1"] * 8) for _ in range(8))
        with pytest.raises(MatrixFormatError, match="not unitary"):
            parse_matrix(text)

    def test_unitarity_tolerance(self):
        m = np.eye(8)
        m[0, 0] = 1 + 1e-10
        parse_matrix(format_matrix(m))
        m[0, 0] = 1 + 1e-6
        with pytest.raises(MatrixFormatError):
            parse_matrix(format_matrix(m))
