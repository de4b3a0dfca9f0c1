"""Angle refinement for near-solution pulse sequences.

The GA only resolves angles to 5 degrees.  ``hill_climb`` polishes them
by cyclic coordinate descent on a shrinking grid; ``refine_ga`` is the
population-based alternative that recombines continuous angle offsets.
Neither touches which operators are used or their order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import PulseSequence
from .ga_engine import elite_indices, fitness
from .spin_algebra import DIM, propagators


class RefinementError(ValueError):
    """The input sequence is too far from the target to be refined."""


@dataclass(frozen=True)
class RefineConfig:
    window: float = 10.0  # degrees either side of the incumbent
    steps: tuple[float, ...] = (5.0, 1.0, 0.5, 0.1)
    fitness_kind: str = "F3"
    max_passes: int = 20
    floor: float = 100.0
    phase_free: bool = False

    def __post_init__(self):
        steps = tuple(float(s) for s in self.steps)
        if not steps or any(a <= b for a, b in zip(steps, steps[1:])):
            raise ValueError("step schedule must be strictly decreasing")
        if steps[-1] <= 0 or self.window <= 0:
            raise ValueError("steps and window must be positive")
        object.__setattr__(self, "steps", steps)


def _step_unitaries(seq: PulseSequence, thetas_deg) -> list[np.ndarray]:
    return [
        propagators(g.kind, g.operator, np.radians(-t if g.reverse else t))
        for g, t in zip(seq.steps, thetas_deg)
    ]


def _chain(mats) -> np.ndarray:
    u = np.eye(DIM, dtype=complex)
    for m in mats:
        u = u @ m
    return u


def sequence_fitness(seq: PulseSequence, target, cfg: RefineConfig = RefineConfig()) -> float:
    return fitness(seq.unitary(), target, cfg.fitness_kind, cfg.phase_free)


def _check_floor(seq, target, cfg) -> float:
    f = sequence_fitness(seq, target, cfg)
    if f < cfg.floor:
        raise RefinementError(
            f"sequence fitness {f:.4g} is below the refinement floor {cfg.floor:g}; "
            "the GA stage has not converged far enough"
        )
    return f


def hill_climb(seq: PulseSequence, target, cfg: RefineConfig = RefineConfig()) -> PulseSequence:
    """Greedy cyclic coordinate descent over the step angles.

    For each grid step in ``cfg.steps`` the angles are visited in sequence
    order; each is moved to the best point of the grid (multiples of the
    step) within ``cfg.window`` degrees of its current value, but only if
    that strictly improves fitness.  Passes repeat until none improves.
    """
    target = np.asarray(target, dtype=complex)
    best = _check_floor(seq, target, cfg)
    if not len(seq):
        return seq
    thetas = np.array(seq.angles_deg)
    mats = _step_unitaries(seq, thetas)

    for step in cfg.steps:
        reach = int(np.floor(cfg.window / step + 1e-9))
        for _ in range(cfg.max_passes):
            improved = False
            for k, g in enumerate(seq.steps):
                anchor = np.round(thetas[k] / step) * step
                cands = np.round(anchor + step * np.arange(-reach - 1, reach + 2), 9)
                cands = cands[(np.abs(cands - thetas[k]) <= cfg.window + 1e-9) & (cands >= 0)]
                signed = np.radians(-cands if g.reverse else cands)
                props = propagators(g.kind, g.operator, signed)
                G = _chain(mats[:k]) @ props @ _chain(mats[k + 1 :])
                fit = fitness(G, target, cfg.fitness_kind, cfg.phase_free)
                i = int(np.argmax(fit))
                if fit[i] > best:
                    best = float(fit[i])
                    thetas[k] = cands[i]
                    mats[k] = props[i]
                    improved = True
            if not improved:
                break
    return seq.with_angles(np.radians(thetas))


def refine_ga(
    seq: PulseSequence,
    target,
    rng_seed=None,
    cfg: RefineConfig = RefineConfig(),
    population_size: int = 2000,
    generations: int = 50,
    jitter: float | None = None,
    elite_count: int = 5,
    mutation_prob: float = 0.5,
) -> PulseSequence:
    """Continuous-angle GA refinement using only CROSS-4 style recombination.

    The population starts as copies of ``seq`` with every angle jittered
    uniformly by up to ``jitter`` degrees (default ``cfg.window``).
    Children swap a contiguous block of angles between two roulette-chosen
    parents; with ``mutation_prob`` one angle is re-drawn inside the
    jitter window around the input.  The input itself is always kept, so
    the result is never worse than the input.
    """
    target = np.asarray(target, dtype=complex)
    best_in = _check_floor(seq, target, cfg)
    n = len(seq)
    if n == 0:
        return seq
    jitter = cfg.window if jitter is None else float(jitter)
    rng = np.random.default_rng(rng_seed)
    base = np.array(seq.angles_deg)

    def clip(a):
        return np.maximum(a, 0.0)

    def evaluate(pop):
        G = np.broadcast_to(np.eye(DIM, dtype=complex), (len(pop), DIM, DIM))
        for k, g in enumerate(seq.steps):
            t = np.radians(-pop[:, k] if g.reverse else pop[:, k])
            G = G @ propagators(g.kind, g.operator, t)
        return fitness(G, target, cfg.fitness_kind, cfg.phase_free)

    pop = clip(base + rng.uniform(-jitter, jitter, size=(population_size, n)))
    pop[0] = base
    fit = evaluate(pop)
    for _ in range(generations):
        elite = elite_indices(fit, elite_count)
        n_children = population_size - elite_count
        p = fit / fit.sum()
        parents = rng.choice(population_size, size=(n_children + 1) // 2 * 2, p=p)
        A = pop[parents[0::2]].copy()
        B = pop[parents[1::2]].copy()
        h = rng.integers(1, n + 1, size=len(A))
        r = rng.integers(0, n - h + 1)
        cols = np.arange(n)
        mask = (cols >= r[:, None]) & (cols < (r + h)[:, None])
        A2 = np.where(mask, B, A)
        B2 = np.where(mask, A, B)
        children = np.concatenate([A2, B2])[:n_children]
        mutate = rng.random(n_children) < mutation_prob
        which = rng.integers(0, n, size=n_children)
        fresh = base[which] + rng.uniform(-jitter, jitter, size=n_children)
        children[mutate, which[mutate]] = fresh[mutate]
        pop = np.concatenate([pop[elite], clip(children)])
        fit = np.concatenate([fit[elite], evaluate(pop[elite_count:])])

    i = int(elite_indices(fit, 1)[0])
    if fit[i] <= best_in:
        return seq
    return seq.with_angles(np.radians(pop[i]))
