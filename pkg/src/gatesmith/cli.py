"""Command-line front end.

Exit codes: 0 success, 1 verification failed, 2 no candidate met the
fitness threshold, 3 input error.
"""

from __future__ import annotations

import argparse
import os
import secrets
import sys
from pathlib import Path

import numpy as np

from . import gate_library
from .encoding import (
    FULL,
    LINEAR_CHAIN,
    MAX_ROWS,
    MIN_ROWS,
    SequenceFormatError,
    decode,
    format_sequence,
    load_sequence,
    parse_chromosome,
)
from .ga_engine import ConfigError, GaConfig
from .pipeline import dumps, synthesize
from .spin_algebra import MatrixFormatError, load_matrix

EXIT_OK, EXIT_FAIL, EXIT_NO_CANDIDATE, EXIT_INPUT = 0, 1, 2, 3
SEED_ENV = "GATESMITH_SEED"


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def resolve_target(spec: str) -> tuple[str, np.ndarray]:
    if spec in gate_library.GATE_NAMES:
        return spec, gate_library.get_gate(spec).matrix
    path = Path(spec)
    if not path.exists():
        raise InputError(
            f"target {spec!r} is neither a built-in gate ({', '.join(gate_library.GATE_NAMES)}) "
            "nor an existing matrix file"
        )
    try:
        return path.name, load_matrix(path)
    except MatrixFormatError as exc:
        raise InputError(str(exc)) from None


def parse_rows(text: str) -> tuple[int, int]:
    try:
        a, _, b = text.partition(":")
        lo, hi = int(a), int(b or a)
    except ValueError:
        raise InputError(f"--rows expects a:b, got {text!r}") from None
    if not MIN_ROWS <= lo <= hi <= MAX_ROWS:
        raise InputError(f"--rows must satisfy {MIN_ROWS} <= a <= b <= {MAX_ROWS}, got {text!r}")
    return lo, hi


def master_seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return secrets.randbits(32)


def cmd_synthesize(args) -> int:
    name, target = resolve_target(args.target)
    rows = parse_rows(args.rows)
    if args.threads < 1:
        raise InputError("--threads must be >= 1")
    try:
        config = GaConfig(
            population_size=args.pop,
            generations=args.gens,
            fitness_kind=args.fitness.upper(),
            topology=FULL if args.topology == "full" else LINEAR_CHAIN,
            rng_seed=master_seed(args.seed),
            elite_count=args.elite,
            success_fitness=args.threshold,
            phase_free=args.phase_free,
        )
    except ConfigError as exc:
        raise InputError(f"invalid configuration: {exc}") from None

    log = open(args.log, "w") if args.log else None
    try:
        result = synthesize(target, config, rows, target_name=name, threads=args.threads, log=log)
    finally:
        if log:
            log.close()
    text = dumps(result)
    if args.out:
        Path(args.out).write_text(text)
    for run in result["runs"]:
        b = run["best"]
        print(
            f"N={run['N']}: fitness={b['fitness']:.6g} refined={b['refined_fitness']:.6g} "
            f"distance={b['distance']:.3e} time={b['total_time']:.4f}/J"
        )
    if result["winner_N"] is None:
        print("no candidate met threshold")
        return EXIT_NO_CANDIDATE
    win = next(r for r in result["runs"] if r["N"] == result["winner_N"])["best"]
    print(f"winner: N={result['winner_N']} time={win['total_time']:.4f}/J")
    for line in win["refined_steps"]:
        print("  " + line)
    return EXIT_OK


def _load_sequence(path):
    try:
        return load_sequence(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except SequenceFormatError as exc:
        raise InputError(str(exc)) from None


def cmd_verify(args) -> int:
    seq = _load_sequence(args.sequence)
    _, target = resolve_target(args.target)
    report = gate_library.verify(seq, target, tol=args.tol, up_to_phase=args.phase_free)
    print("\n".join(report.lines()))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_cost(args) -> int:
    seq = _load_sequence(args.sequence)
    for g, c in zip(seq, seq.step_costs):
        print(f"{c:.4f}  {g}")
    print(f"total: {seq.total_time:.4f} /J")
    return EXIT_OK


def cmd_decode(args) -> int:
    try:
        chrom = parse_chromosome(Path(args.chromosome).read_text(), source=args.chromosome)
    except OSError as exc:
        raise InputError(f"cannot read {args.chromosome}: {exc.strerror}") from None
    except SequenceFormatError as exc:
        raise InputError(str(exc)) from None
    seq = decode(chrom, FULL if args.topology == "full" else LINEAR_CHAIN)
    sys.stdout.write(format_sequence(seq) if len(seq) else "# empty sequence\n")
    print(f"# total time: {seq.total_time:.4f} /J")
    return EXIT_OK


def cmd_gates(args) -> int:
    conventional = gate_library.conventional_costs()
    for name in gate_library.GATE_NAMES:
        g = gate_library.get_gate(name)
        conv = conventional.get(name)
        found = g.paper_sequence.total_time if g.paper_sequence is not None else None
        print(
            f"{name:20s} conventional={'-' if conv is None else f'{conv:.3f}/J':9s} "
            f"synthesized={'-' if found is None else f'{found:.3f}/J':9s} {g.note}"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gatesmith", description="Time-efficient NMR pulse sequences for three spins.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synthesize", help="GA sweep, refinement and verification for a target")
    s.add_argument("--target", required=True, help="built-in gate name or matrix file")
    s.add_argument("--topology", choices=["full", "linear"], default="linear")
    s.add_argument("--pop", type=int, default=500)
    s.add_argument("--gens", type=int, default=50)
    s.add_argument("--rows", default="3:10", help="row range a:b (inclusive)")
    s.add_argument("--seed", type=int, default=None, help=f"master seed (falls back to ${SEED_ENV})")
    s.add_argument("--fitness", choices=["f1", "f2", "f3", "F1", "F2", "F3"], default="f2")
    s.add_argument("--phase-free", action="store_true", help="ignore global phase in the fitness")
    s.add_argument("--elite", type=int, default=5)
    s.add_argument("--threshold", type=float, default=1000.0, help="success fitness")
    s.add_argument("--out", help="write the RunResult JSON here")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--log", help="per-generation run log file")
    s.set_defaults(func=cmd_synthesize)

    v = sub.add_parser("verify", help="simulate a sequence file against a target")
    v.add_argument("--sequence", required=True)
    v.add_argument("--target", required=True)
    v.add_argument("--phase-free", action="store_true", help="compare up to a global phase")
    v.add_argument("--tol", type=float, default=1e-9)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("cost", help="per-step and total time of a sequence file")
    c.add_argument("--sequence", required=True)
    c.set_defaults(func=cmd_cost)

    d = sub.add_parser("decode", help="decode a chromosome digit file")
    d.add_argument("--chromosome", required=True)
    d.add_argument("--topology", choices=["full", "linear"], default="linear")
    d.set_defaults(func=cmd_decode)

    g = sub.add_parser("gates", help="list built-in gates")
    g.set_defaults(func=cmd_gates)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"gatesmith: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
