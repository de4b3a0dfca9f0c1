import numpy as np
import pytest

from gatesmith.encoding import parse_sequence
from gatesmith.gate_library import get_gate, paper_sequences
from gatesmith.local_opt import (
    RefineConfig,
    RefinementError,
    hill_climb,
    refine_ga,
    sequence_fitness,
)
from gatesmith.spin_algebra import phase_invariant_distance

PARITY = get_gate("parity").matrix
EXACT = paper_sequences()["parity"]
# recovery from a jitter needs a phase-free fitness and no floor
LOOSE = RefineConfig(floor=0.0, phase_free=True)


def jitter(seq, offsets):
    return seq.with_angles(np.radians(np.array(seq.angles_deg) + offsets))


def test_exact_sequence_is_returned_unchanged():
    out = hill_climb(EXACT, PARITY, LOOSE)
    assert out == EXACT


@pytest.mark.parametrize("offset", [7.0, -9.0])
def test_recovers_single_angle_offset(offset):
    bad = jitter(EXACT, [0.0, offset, 0.0])
    out = hill_climb(bad, PARITY, LOOSE)
    np.testing.assert_allclose(out.angles_deg, EXACT.angles_deg, atol=0.1)
    d, _ = phase_invariant_distance(out.unitary(), PARITY)
    assert d <= 1e-3


def test_recovers_all_angles_jittered():
    rng = np.random.default_rng(0)
    for _ in range(10):
        bad = jitter(EXACT, rng.uniform(-10, 10, size=3))
        out = hill_climb(bad, PARITY, LOOSE)
        np.testing.assert_allclose(out.angles_deg, EXACT.angles_deg, atol=0.1)


def test_operators_and_order_are_preserved():
    bad = jitter(EXACT, [3.0, -4.0, 2.0])
    out = hill_climb(bad, PARITY, LOOSE)
    assert [(g.kind, g.operator, g.reverse) for g in out] == [(g.kind, g.operator, g.reverse) for g in EXACT]


def test_floor_rejects_unconverged_input():
    far = parse_sequence("single 1 x 90\nsingle 2 x 90")
    with pytest.raises(RefinementError, match="floor"):
        hill_climb(far, PARITY)
    with pytest.raises(RefinementError):
        refine_ga(far, PARITY, 0)


def test_never_worse_and_idempotent():
    rng = np.random.default_rng(1)
    cfg = RefineConfig(floor=0.0)
    for _ in range(5):
        seq = jitter(EXACT, rng.uniform(-20, 20, size=3))
        out = hill_climb(seq, PARITY, cfg)
        assert sequence_fitness(out, PARITY, cfg) >= sequence_fitness(seq, PARITY, cfg)
        assert hill_climb(out, PARITY, cfg) == out


def test_single_pass_moves_at_most_one_window():
    seq = jitter(EXACT, [40.0, 0.0, 0.0])
    cfg = RefineConfig(floor=0.0, phase_free=True, window=10, steps=(5.0,), max_passes=1)
    out = hill_climb(seq, PARITY, cfg)
    assert 0 < seq.angles_deg[0] - out.angles_deg[0] <= 10 + 1e-9


def test_empty_sequence_passes_through():
    empty = parse_sequence("")
    assert hill_climb(empty, np.eye(8)) == empty


def test_step_schedule_validation():
    with pytest.raises(ValueError):
        RefineConfig(steps=(1.0, 5.0))
    with pytest.raises(ValueError):
        RefineConfig(window=0)


class TestRefineGa:
    def test_zero_jitter_returns_input(self):
        bad = jitter(EXACT, [0.0, 4.0, 0.0])
        out = refine_ga(bad, PARITY, 0, LOOSE, population_size=100, generations=5, jitter=0.0)
        assert out == bad

    def test_improves_and_never_worsens(self):
        bad = jitter(EXACT, [2.0, -3.0, 1.5])
        out = refine_ga(bad, PARITY, 1, LOOSE, population_size=400, generations=30)
        assert sequence_fitness(out, PARITY, LOOSE) > sequence_fitness(bad, PARITY, LOOSE)
        np.testing.assert_allclose(out.angles_deg, EXACT.angles_deg, atol=0.5)

    def test_deterministic(self):
        bad = jitter(EXACT, [2.0, -3.0, 1.5])
        a = refine_ga(bad, PARITY, 7, LOOSE, population_size=200, generations=10)
        b = refine_ga(bad, PARITY, 7, LOOSE, population_size=200, generations=10)
        assert a == b

    def test_head_to_head_with_hill_climb(self):
        # default refine_ga settings; success means every angle back within 0.1 deg
        rng = np.random.default_rng(2)
        hc_ok = ga_ok = 0
        for seed in range(20):
            bad = jitter(EXACT, rng.uniform(-10, 10, size=3))
            hc = hill_climb(bad, PARITY, LOOSE)
            ga = refine_ga(bad, PARITY, seed, LOOSE)
            hc_ok += np.allclose(hc.angles_deg, EXACT.angles_deg, atol=0.1)
            ga_ok += np.allclose(ga.angles_deg, EXACT.angles_deg, atol=0.1)
        assert ga_ok > 10
        assert ga_ok >= hc_ok
