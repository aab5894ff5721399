"""Command-line entry point: ``shallowboson {sample,exact,validate,permanent,bench}``."""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .. import fock
from ..errors import BosonError
from ..cp_permanent import permanent_from_tree
from ..linalg import NAIVE_MAX, ComplexMatrix, per_naive, per_ryser_glynn
from ..photonics import compose_circuit, haar_unitary, random_shallow_circuit
from ..samplers import ALGORITHMS, collision_free_distribution, sample_stream
from ..treedec import linear_banded_decomposition
from . import bench as bench_mod
from .io import format_complex, read_circuit, read_matrix, sample_record
from .stats import validate_counts

COMMANDS = ("sample", "exact", "validate", "permanent", "bench")
KERNELS = ("naive", "glynn", "tree")


@dataclass
class RunConfig:
    command: str
    algorithm: str = "cc-c"
    m: int | None = None
    n: int = 3
    depth: int | None = None
    samples: int = 1000
    seed: int = 0
    circuit: str | None = None
    matrix: str | None = None
    out: str | None = None
    threshold: float = 0.03
    kernels: tuple = ()

    def check(self):
        if self.command in ("sample", "validate"):
            if self.samples < 1:
                raise SystemExit("--samples must be at least 1")
            if self.algorithm == "shallow" and self.depth is None and self.circuit is None:
                raise SystemExit("--algorithm shallow needs --depth or --circuit")
            if self.circuit is None and self.m is None:
                raise SystemExit("--m is required unless --circuit is given")
        if self.command == "permanent" and self.matrix is None:
            raise SystemExit("permanent needs --matrix")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shallowboson", description=__doc__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="cc-c")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--depth", type=int)
    p.add_argument("--samples", type=int, help="samples to draw (default 1000; 5 per cell for bench)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--circuit", help="circuit JSON file")
    p.add_argument("--matrix", help="matrix text file for the permanent command")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--threshold", type=float, default=0.03, help="TVD gate for validate")
    p.add_argument("--kernel", action="append", choices=KERNELS, dest="kernels",
                   help="permanent kernel; repeat to cross-check several")
    return p


def config_from_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    samples = ns.samples if ns.samples is not None else (5 if ns.command == "bench" else 1000)
    cfg = RunConfig(
        ns.command, ns.algorithm, ns.m, ns.n, ns.depth, samples, ns.seed,
        ns.circuit, ns.matrix, ns.out, ns.threshold, tuple(ns.kernels or ()),
    )
    cfg.check()
    return cfg


def unitary_for(cfg: RunConfig) -> ComplexMatrix:
    """Circuit file if given, else a random shallow circuit if a depth is given, else Haar."""
    if cfg.circuit is not None:
        return compose_circuit(read_circuit(cfg.circuit))
    rng = np.random.default_rng(cfg.seed)
    if cfg.depth is not None:
        return compose_circuit(random_shallow_circuit(cfg.m, cfg.depth, rng))
    return haar_unitary(cfg.m, rng)


def expected_law(cfg: RunConfig, u) -> dict:
    if cfg.algorithm == "shallow":
        return collision_free_distribution(u, cfg.n)
    return fock.exact_distribution(u, fock.standard_input(cfg.n, u.n_rows))


def _emit(cfg: RunConfig, text: str):
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w") as fh:
            fh.write(text)


def cmd_sample(cfg: RunConfig) -> int:
    u = unitary_for(cfg)
    lines = [sample_record(s, cfg.seed, i) for i, s in sample_stream(cfg.algorithm, u, cfg.n, cfg.samples, cfg.seed)]
    _emit(cfg, "".join(line + "\n" for line in lines))
    return 0


def cmd_exact(cfg: RunConfig) -> int:
    u = unitary_for(cfg)
    _emit(cfg, fock.distribution_csv(expected_law(cfg, u)))
    return 0


def cmd_validate(cfg: RunConfig) -> int:
    u = unitary_for(cfg)
    expected = expected_law(cfg, u)
    counts = Counter(s.occupation for _, s in sample_stream(cfg.algorithm, u, cfg.n, cfg.samples, cfg.seed))
    report = validate_counts(counts, expected, cfg.threshold)
    _emit(cfg, report.to_json() + "\n")
    return 0 if report.passed else 1


def cmd_permanent(cfg: RunConfig) -> int:
    m = read_matrix(cfg.matrix)
    kernels = cfg.kernels or (("naive",) if m.n_rows <= NAIVE_MAX else ()) + ("glynn", "tree")
    values = {}
    for k in kernels:
        if k == "naive":
            values[k] = per_naive(m)
        elif k == "glynn":
            values[k] = per_ryser_glynn(m)
        else:
            values[k] = permanent_from_tree(linear_banded_decomposition(m), m)
    ref = values[kernels[0]]
    scale = max(abs(ref), 1.0)
    lines = [f"{k}: {format_complex(v)}" for k, v in values.items()]
    _emit(cfg, "\n".join(lines) + "\n")
    if any(abs(v - ref) > 1e-10 * scale for v in values.values()):
        print("kernels disagree beyond 1e-10 relative", file=sys.stderr)
        return 2
    return 0


def cmd_bench(cfg: RunConfig) -> int:
    samples = max(cfg.samples, 5)
    depth = 2 if cfg.depth is None else cfg.depth
    rows = bench_mod.run_bench(depth=depth, samples=samples, seed=cfg.seed)
    _emit(cfg, bench_mod.rows_to_csv(rows))
    print(json.dumps(bench_mod.summarize(rows)), file=sys.stderr)
    return 0


HANDLERS = {
    "sample": cmd_sample,
    "exact": cmd_exact,
    "validate": cmd_validate,
    "permanent": cmd_permanent,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    cfg = config_from_args(argv)
    try:
        return HANDLERS[cfg.command](cfg)
    except BosonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
