"""Hierarchical hybrid genetic algorithm over digit-matrix chromosomes.

One generation keeps the elite members, breeds the rest with
fitness-proportional selection and one of four hierarchical crossovers,
row-flips half of the children, and after generation 30 may wipe a few
members clean (the catastrophic mutation that breaks premature
convergence).  Chromosomes of a population live in one integer array of
shape ``(population, N, 4)``.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import IO

import numpy as np

from .encoding import (
    LINEAR_CHAIN,
    MAX_ROWS,
    MIN_ROWS,
    N_COLS,
    CouplingTopology,
    PulseSequence,
    decode,
    propagator_table,
)

FITNESS_MAX = 1e12
FITNESS_KINDS = ("F1", "F2", "F3")
TOP_CANDIDATES = 20

# probability of the follow-up mutation of protected columns, per CROSS type
DEFAULT_CROSS_MUTATION = {1: 0.0, 2: 0.10, 3: 0.07, 4: 0.50}


class ConfigError(ValueError):
    pass


def remove_global_phase(G: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Rotate ``G`` by the global phase that best aligns it with ``U``."""
    overlap = np.einsum("...ij,...ij->...", np.conj(U), G)
    phase = np.exp(-1j * np.angle(overlap))
    return G * phase[..., None, None]


def fitness(G: np.ndarray, U: np.ndarray, kind: str = "F2", phase_free: bool = False):
    """Fitness of candidate ``G`` against target ``U``; accepts stacks of candidates.

    F1 = 1 / Tr|G'U - U'U|, F2 = 1 / sum|G'U - U'U|, F3 = 1 / sum|G - U|,
    where ``|.|`` is the elementwise modulus and ``'`` the conjugate
    transpose.  Denominators below 1e-12 give ``FITNESS_MAX``.
    """
    G = np.asarray(G, dtype=complex)
    U = np.asarray(U, dtype=complex)
    if phase_free:
        G = remove_global_phase(G, U)
    if kind == "F3":
        den = np.abs(G - U).sum(axis=(-2, -1))
    elif kind in ("F1", "F2"):
        Ud = U.conj().T
        diff = np.swapaxes(G.conj(), -1, -2) @ U - Ud @ U
        if kind == "F1":
            den = np.abs(np.diagonal(diff, axis1=-2, axis2=-1)).sum(axis=-1)
        else:
            den = np.abs(diff).sum(axis=(-2, -1))
    else:
        raise ValueError(f"fitness kind must be one of {FITNESS_KINDS}, got {kind!r}")
    with np.errstate(divide="ignore"):
        out = np.where(den < 1e-12, FITNESS_MAX, 1.0 / np.maximum(den, 1e-300))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 500
    generations: int = 50
    fitness_kind: str = "F2"
    n_rows: int = 3
    topology: CouplingTopology = LINEAR_CHAIN
    rng_seed: int | np.random.SeedSequence | None = None
    elite_count: int = 5
    success_fitness: float = 1000.0
    cross_mutation_probs: dict = field(default_factory=lambda: dict(DEFAULT_CROSS_MUTATION))
    mutate_start_gen: int = 30
    mutate_end_gen: int = 50
    mutate_max_prob: float = 0.35
    mutate_members: int = 10
    phase_free: bool = False

    def __post_init__(self):
        if not 100 <= self.population_size <= 2000:
            raise ConfigError(f"population size must be in 100..2000, got {self.population_size}")
        if self.population_size % 2:
            raise ConfigError("population size must be even")
        if self.elite_count < 0 or self.population_size < 2 * self.elite_count:
            raise ConfigError("population size must be at least twice the elite count")
        if self.generations < 1:
            raise ConfigError("need at least one generation")
        if self.fitness_kind not in FITNESS_KINDS:
            raise ConfigError(f"fitness kind must be one of {FITNESS_KINDS}")
        if not MIN_ROWS <= self.n_rows <= MAX_ROWS:
            raise ConfigError(f"rows must be in {MIN_ROWS}..{MAX_ROWS}, got {self.n_rows}")
        if self.mutate_end_gen <= self.mutate_start_gen:
            raise ConfigError("mutate_end_gen must exceed mutate_start_gen")
        if not 0 <= self.mutate_max_prob <= 1:
            raise ConfigError("mutate_max_prob must be a probability")
        if self.mutate_members > self.population_size - self.elite_count:
            raise ConfigError("more catastrophic-mutation members than non-elite members")
        if set(self.cross_mutation_probs) != {1, 2, 3, 4}:
            raise ConfigError("cross_mutation_probs needs entries for CROSS 1-4")
        if self.success_fitness <= 0:
            raise ConfigError("success fitness must be positive")


@dataclass
class Population:
    members: np.ndarray  # (P, N, 4) digits
    fitness: np.ndarray  # (P,), NaN where not yet evaluated
    generation: int = 0

    def __len__(self):
        return len(self.members)


def evaluate(members: np.ndarray, target: np.ndarray, config: GaConfig) -> np.ndarray:
    G = propagator_table(config.topology).unitaries(members)
    return fitness(G, target, config.fitness_kind, config.phase_free)


def elite_indices(fit: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` fittest members; unevaluated (NaN) members rank last."""
    keyed = np.where(np.isnan(fit), -np.inf, fit)
    return np.argsort(-keyed, kind="stable")[:k]


def select_pair(fit: np.ndarray, rng: np.random.Generator) -> tuple[int, int]:
    """Roulette-wheel selection of two distinct members.

    The second index is redrawn from the wheel with the first member
    removed.  If no fitness remains on the wheel the draw is uniform.
    """
    fit = np.asarray(fit, dtype=float)
    n = len(fit)
    total = fit.sum()
    if total > 0:
        i = int(rng.choice(n, p=fit / total))
    else:
        i = int(rng.integers(n))
    rest = fit.copy()
    rest[i] = 0.0
    total = rest.sum()
    if total > 0:
        j = int(rng.choice(n, p=rest / total))
    else:
        j = int(rng.integers(n - 1))
        j += j >= i
    return i, j


def cross_n(A, B, n: int, rng: np.random.Generator, probs: dict | None = None):
    """CROSS-n: swap a row block of the rightmost ``5 - n`` columns.

    A block of ``h`` consecutive rows (``h`` uniform in 1..N) is exchanged
    in columns ``n..4``; columns left of that are protected.  Each child
    then gets, with the CROSS-n mutation probability, one random
    protected entry re-drawn from 0-9.
    """
    if n not in (1, 2, 3, 4):
        raise ValueError("crossover type must be 1..4")
    probs = DEFAULT_CROSS_MUTATION if probs is None else probs
    A = np.array(A, copy=True)
    B = np.array(B, copy=True)
    if A.shape != B.shape:
        raise ValueError("parents must have the same shape")
    N = A.shape[0]
    h = int(rng.integers(1, N + 1))
    r = int(rng.integers(0, N - h + 1))
    cols = slice(n - 1, N_COLS)
    block = A[r : r + h, cols].copy()
    A[r : r + h, cols] = B[r : r + h, cols]
    B[r : r + h, cols] = block
    p = probs[n]
    for child in (A, B):
        if n > 1 and rng.random() < p:
            child[rng.integers(N), rng.integers(n - 1)] = rng.integers(10)
    return A, B


def flip(A, rng: np.random.Generator) -> np.ndarray:
    """Exchange two distinct, uniformly chosen rows."""
    A = np.array(A, copy=True)
    if A.shape[0] < 2:
        raise ValueError("flip needs at least two rows")
    i, j = rng.choice(A.shape[0], size=2, replace=False)
    A[[i, j]] = A[[j, i]]
    return A


def mutation_probability(generation: int, config: GaConfig) -> float:
    span = config.mutate_end_gen - config.mutate_start_gen
    p = config.mutate_max_prob * (generation - config.mutate_start_gen) / span
    return float(min(max(p, 0.0), config.mutate_max_prob))


def mutate_catastrophic(
    pop: Population, generation: int, config: GaConfig, rng: np.random.Generator
) -> Population:
    """Late-run reset of ``mutate_members`` non-elite members to fresh random digits.

    Happens with probability ``mutation_probability(generation)``.  Elites
    are the ``elite_count`` fittest members by the current fitness array;
    reset members get NaN fitness until re-evaluated.
    """
    p = mutation_probability(generation, config)
    if p <= 0 or rng.random() >= p:
        return pop
    protected = set(elite_indices(pop.fitness, config.elite_count).tolist())
    candidates = np.array([i for i in range(len(pop)) if i not in protected])
    chosen = rng.choice(candidates, size=config.mutate_members, replace=False)
    members = pop.members.copy()
    fit = pop.fitness.astype(float).copy()
    members[chosen] = rng.integers(0, 10, size=(len(chosen),) + members.shape[1:])
    fit[chosen] = np.nan
    return Population(members, fit, pop.generation)


def initial_population(config: GaConfig, rng: np.random.Generator, target: np.ndarray) -> Population:
    members = rng.integers(0, 10, size=(config.population_size, config.n_rows, N_COLS))
    return Population(members, evaluate(members, target, config), 0)


def evolve_generation(
    pop: Population, target: np.ndarray, config: GaConfig, rng: np.random.Generator
) -> Population:
    P, k = len(pop), config.elite_count
    elite = elite_indices(pop.fitness, k)
    n_children = P - k

    children = []
    while len(children) < n_children:
        i, j = select_pair(pop.fitness, rng)
        kind = int(rng.integers(1, 5))
        a, b = cross_n(pop.members[i], pop.members[j], kind, rng, config.cross_mutation_probs)
        children.extend((a, b))
    children = np.array(children[:n_children])

    for idx in rng.choice(n_children, size=n_children // 2, replace=False):
        children[idx] = flip(children[idx], rng)

    members = np.concatenate([pop.members[elite], children])
    fit = np.concatenate([pop.fitness[elite], np.full(n_children, np.nan)])
    nxt = mutate_catastrophic(Population(members, fit, pop.generation + 1), pop.generation + 1, config, rng)
    nxt.fitness = evaluate(nxt.members, target, config)
    return nxt


@dataclass(frozen=True)
class Candidate:
    chromosome: np.ndarray
    fitness: float
    sequence: PulseSequence

    @property
    def total_time(self) -> float:
        return self.sequence.total_time


@dataclass
class RunOutcome:
    candidates: list[Candidate]
    generations_run: int
    early_stop: bool
    history: list[tuple[float, float, float]]  # (best, mean, best_cost) per generation

    @property
    def best(self) -> Candidate:
        return self.candidates[0]


def top_candidates(pop: Population, config: GaConfig, limit: int = TOP_CANDIDATES) -> list[Candidate]:
    """Fittest members with distinct decoded sequences, best first."""
    out, seen = [], set()
    for idx in elite_indices(pop.fitness, len(pop)):
        seq = decode(pop.members[idx], config.topology)
        key = seq.key()
        if key in seen:
            continue
        seen.add(key)
        out.append(Candidate(pop.members[idx].copy(), float(pop.fitness[idx]), seq))
        if len(out) == limit:
            break
    return out


def _log_line(gen: int, pop: Population, config: GaConfig) -> tuple[str, tuple]:
    best_idx = elite_indices(pop.fitness, 1)[0]
    best = float(pop.fitness[best_idx])
    mean = float(np.mean(pop.fitness))
    cost = float(propagator_table(config.topology).costs(pop.members[best_idx]))
    return f"gen={gen} best={best:.6g} mean={mean:.6g} best_cost={cost:.6g}", (best, mean, cost)


def run(target: np.ndarray, config: GaConfig, log: IO[str] | None = None) -> RunOutcome:
    """Evolve one population of ``config.n_rows``-row chromosomes.

    Stops early once the best fitness reaches ``config.success_fitness``.
    ``log`` receives one line per generation and is flushed after each.
    """
    target = np.asarray(target, dtype=complex)
    rng = np.random.default_rng(config.rng_seed)
    pop = initial_population(config, rng, target)
    history = []
    early_stop = False
    for gen in range(config.generations + 1):
        if gen > 0:
            pop = evolve_generation(pop, target, config, rng)
        line, stats = _log_line(gen, pop, config)
        history.append(stats)
        if log is not None:
            log.write(line + "\n")
            log.flush()
        if stats[0] >= config.success_fitness:
            early_stop = gen < config.generations
            if early_stop and log is not None:
                log.write(f"# early stop at gen={gen}: best fitness reached {config.success_fitness:g}\n")
                log.flush()
            break
    return RunOutcome(top_candidates(pop, config), pop.generation, early_stop, history)


def child_seed(master: int | None, *key: int) -> np.random.SeedSequence:
    """Seed for one sub-run, derived from the master seed and a counter key.

    ``SeedSequence(master, spawn_key=key)`` gives independent, individually
    reproducible streams: the run for N rows uses ``key = (N,)``.
    """
    return np.random.SeedSequence(master, spawn_key=tuple(int(k) for k in key))


def select_winner(entries):
    """Cheapest successful candidate; ties go to fewer steps, then lower N.

    ``entries`` is an iterable of ``(n_rows, candidate, succeeded)``.
    Returns ``(n_rows, candidate)`` or ``None`` when nothing succeeded.
    """
    ok = [(c.total_time, len(c.sequence), n, i, c) for i, (n, c, s) in enumerate(entries) if s]
    if not ok:
        return None
    ok.sort(key=lambda t: (round(t[0], 9), t[1], t[2], t[3]))
    return ok[0][2], ok[0][4]


@dataclass
class SweepResult:
    per_n: dict[int, RunOutcome]
    seeds: dict[int, tuple]
    winner: tuple[int, Candidate] | None

    @property
    def succeeded(self) -> bool:
        return self.winner is not None

    def message(self) -> str:
        if self.winner is None:
            return "no candidate met threshold"
        n, c = self.winner
        return f"winner at N={n}: cost {c.total_time:.4f}/J, fitness {c.fitness:.6g}"


def sweep_N(
    target: np.ndarray,
    config: GaConfig,
    n_range=range(MIN_ROWS, MAX_ROWS + 1),
    threads: int = 1,
    log: IO[str] | None = None,
) -> SweepResult:
    """Run the GA for every row count in ``n_range`` and pick the overall winner.

    Each N gets its own seed from ``child_seed(config.rng_seed, N)``, so
    results do not depend on ``threads``.
    """
    master = config.rng_seed
    if isinstance(master, np.random.SeedSequence):
        master = master.entropy
    n_values = list(n_range)
    configs = {n: replace(config, n_rows=n, rng_seed=child_seed(master, n)) for n in n_values}

    def one(n, stream):
        return n, run(target, configs[n], stream), stream

    per_n = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            futures = [ex.submit(one, n, io.StringIO() if log is not None else None) for n in n_values]
            results = [f.result() for f in futures]
        for n, outcome, buf in results:
            per_n[n] = outcome
            if log is not None:
                log.write(f"# rows={n}\n" + buf.getvalue())
                log.flush()
    else:
        for n in n_values:
            if log is not None:
                log.write(f"# rows={n}\n")
            per_n[n] = one(n, log)[1]

    entries = [
        (n, c, c.fitness >= config.success_fitness) for n in n_values for c in per_n[n].candidates
    ]
    return SweepResult(per_n, {n: (master, n) for n in n_values}, select_winner(entries))
