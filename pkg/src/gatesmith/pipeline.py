"""End-to-end synthesis: GA sweep over N, angle refinement, verification.

The outcome is a ``RunResult`` dictionary persisted as sorted-key JSON.
Field names are the compatibility contract; everything except
``wall_time`` is a deterministic function of the inputs and master seed.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path
from typing import IO

import numpy as np

from .encoding import CouplingTopology, decode, format_step, parse_sequence
from .ga_engine import Candidate, GaConfig, fitness, select_winner, sweep_N
from .local_opt import RefineConfig, RefinementError, hill_climb
from .spin_algebra import phase_invariant_distance

FORMAT_VERSION = 1
REVERIFY_TOL = 1e-9


class ResultMismatch(ValueError):
    """A stored result does not reproduce when re-simulated."""


def matrix_digest(m) -> str:
    data = np.round(np.asarray(m, dtype=complex), 12) + 0.0  # normalise -0.0
    return hashlib.sha256(data.tobytes()).hexdigest()[:16]


def config_snapshot(config: GaConfig, rows: tuple[int, int]) -> dict:
    return {
        "population_size": config.population_size,
        "generations": config.generations,
        "fitness_kind": config.fitness_kind,
        "rows": list(rows),
        "seed": config.rng_seed,
        "elite_count": config.elite_count,
        "success_fitness": config.success_fitness,
        "phase_free": config.phase_free,
        "cross_mutation_probs": {str(k): v for k, v in sorted(config.cross_mutation_probs.items())},
        "mutate_start_gen": config.mutate_start_gen,
        "mutate_end_gen": config.mutate_end_gen,
        "mutate_max_prob": config.mutate_max_prob,
        "mutate_members": config.mutate_members,
    }


def pick_n_winner(candidates: list[Candidate], threshold: float) -> Candidate:
    """Cheapest candidate meeting the threshold, else the fittest one."""
    ok = [(c.total_time, len(c.sequence), i) for i, c in enumerate(candidates) if c.fitness >= threshold]
    if ok:
        return candidates[min(ok, key=lambda t: (round(t[0], 9), t[1], t[2]))[2]]
    return candidates[0]


def _refine(cand: Candidate, target, config: GaConfig, refine_cfg: RefineConfig):
    try:
        seq = hill_climb(cand.sequence, target, refine_cfg)
        note = "refined"
    except RefinementError as exc:
        seq = cand.sequence
        note = f"not refined: {exc}"
    f = fitness(seq.unitary(), target, config.fitness_kind, config.phase_free)
    if f < cand.fitness:
        seq, f = cand.sequence, cand.fitness
    return seq, float(f), note


def _best_record(cand: Candidate, seq, refined_fitness: float, note: str, target) -> dict:
    distance, phase = phase_invariant_distance(seq.unitary(), target)
    return {
        "chromosome": [[int(d) for d in row] for row in cand.chromosome],
        "decoded_steps": [format_step(g) for g in cand.sequence],
        "angles_deg": [float(a) for a in cand.sequence.angles_deg],
        "fitness": float(cand.fitness),
        "refined_steps": [format_step(g) for g in seq],
        "refined_angles_deg": [float(a) for a in seq.angles_deg],
        "refined_fitness": refined_fitness,
        "refine_note": note,
        "total_time": float(seq.total_time),
        "hard_pulse_count": int(seq.hard_pulse_count),
        "phase": float(phase),
        "distance": float(distance),
    }


def synthesize(
    target,
    config: GaConfig,
    rows: tuple[int, int] = (3, 10),
    refine_cfg: RefineConfig | None = None,
    target_name: str = "<matrix>",
    threads: int = 1,
    log: IO[str] | None = None,
) -> dict:
    """Sweep N over ``rows`` (inclusive), refine every per-N winner, assemble a RunResult."""
    t0 = time.perf_counter()
    target = np.asarray(target, dtype=complex)
    if refine_cfg is None:
        refine_cfg = RefineConfig(phase_free=config.phase_free)
    sweep = sweep_N(target, config, range(rows[0], rows[1] + 1), threads=threads, log=log)

    runs, entries = [], []
    for n, outcome in sweep.per_n.items():
        cand = pick_n_winner(outcome.candidates, config.success_fitness)
        seq, f_ref, note = _refine(cand, target, config, refine_cfg)
        ok = max(cand.fitness, f_ref) >= config.success_fitness
        entries.append((n, Candidate(cand.chromosome, f_ref, seq), ok))
        runs.append(
            {
                "N": n,
                "seed": list(sweep.seeds[n]),
                "generations_run": outcome.generations_run,
                "early_stop": outcome.early_stop,
                "success": ok,
                "best": _best_record(cand, seq, f_ref, note, target),
            }
        )

    win = select_winner(entries)
    return {
        "format_version": FORMAT_VERSION,
        "target": {"name": target_name, "digest": matrix_digest(target)},
        "topology": config.topology.mode,
        "config": config_snapshot(config, rows),
        "runs": runs,
        "winner_N": None if win is None else win[0],
        "status": "success" if win is not None else "no candidate met threshold",
        "wall_time": round(time.perf_counter() - t0, 3),
    }


def dumps(result: dict, include_wall_time: bool = True) -> str:
    body = dict(result)
    if not include_wall_time:
        body.pop("wall_time", None)
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def save(result: dict, path: str | Path) -> None:
    Path(path).write_text(dumps(result))


def reverify(result: dict, target) -> None:
    """Re-decode and re-simulate every stored best; raise on any mismatch."""
    topo = CouplingTopology(result["topology"])
    cfg = result["config"]
    target = np.asarray(target, dtype=complex)
    if matrix_digest(target) != result["target"]["digest"]:
        raise ResultMismatch("target matrix digest does not match the stored result")
    for run in result["runs"]:
        best = run["best"]
        seq = decode(np.array(best["chromosome"]), topo)
        if [format_step(g) for g in seq] != best["decoded_steps"]:
            raise ResultMismatch(f"N={run['N']}: chromosome no longer decodes to the stored steps")
        f = fitness(seq.unitary(), target, cfg["fitness_kind"], cfg["phase_free"])
        if not np.isclose(f, best["fitness"], rtol=REVERIFY_TOL, atol=REVERIFY_TOL):
            raise ResultMismatch(f"N={run['N']}: fitness {f!r} != stored {best['fitness']!r}")
        refined = parse_sequence("\n".join(best["refined_steps"]))
        d, _ = phase_invariant_distance(refined.unitary(), target)
        if abs(d - best["distance"]) > REVERIFY_TOL:
            raise ResultMismatch(f"N={run['N']}: distance {d!r} != stored {best['distance']!r}")


def load(path: str | Path, target=None) -> dict:
    result = json.loads(Path(path).read_text())
    if result.get("format_version") != FORMAT_VERSION:
        raise ResultMismatch(f"unsupported result format {result.get('format_version')!r}")
    if target is not None:
        reverify(result, target)
    return result
