"""Per-sample timing and scaling fits for the samplers."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import astuple, dataclass, fields

import numpy as np

from ..photonics import compose_circuit, haar_unitary, random_shallow_circuit
from ..samplers import prepare_base, sample_cc_c, sample_shallow

SHALLOW_GRID = tuple(range(4, 17))
CC_C_GRID = tuple(range(10, 23))


@dataclass
class BenchRow:
    algorithm: str
    n: int
    m: int
    depth: int
    samples: int
    prep_seconds: float
    mean_seconds: float
    std_seconds: float

    @property
    def cv(self) -> float:
        return self.std_seconds / self.mean_seconds if self.mean_seconds > 0 else 0.0


def _time_samples(draw, samples, seed):
    times = []
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        t0 = time.perf_counter()
        draw(rng)
        times.append(time.perf_counter() - t0)
    return np.array(times)


def bench_shallow(n: int, depth: int = 2, samples: int = 5, seed: int = 0, m: int | None = None) -> BenchRow:
    m = n * n if m is None else m
    t0 = time.perf_counter()
    u = compose_circuit(random_shallow_circuit(m, depth, np.random.default_rng(seed)))
    base = prepare_base(u, n)
    prep = time.perf_counter() - t0
    sample_shallow(u, n, np.random.default_rng([seed, samples]), base)  # warm-up, untimed
    t = _time_samples(lambda rng: sample_shallow(u, n, rng, base), samples, seed)
    return BenchRow("shallow", n, m, depth, samples, prep, float(t.mean()), float(t.std()))


def bench_cc_c(n: int, samples: int = 5, seed: int = 0, m: int | None = None) -> BenchRow:
    m = n * n if m is None else m
    t0 = time.perf_counter()
    u = haar_unitary(m, np.random.default_rng(seed))
    prep = time.perf_counter() - t0
    sample_cc_c(u, min(n, 2), np.random.default_rng([seed, samples]))  # warm-up, untimed
    t = _time_samples(lambda rng: sample_cc_c(u, n, rng), samples, seed)
    return BenchRow("cc-c", n, m, 0, samples, prep, float(t.mean()), float(t.std()))


def loglog_slope(ns, times) -> float:
    """Slope of log(time) against log(n)."""
    return float(np.polyfit(np.log(ns), np.log(times), 1)[0])


def semilog_slope(ns, times) -> float:
    """Slope of log(time) against n; log 2 for a clean 2^n law."""
    return float(np.polyfit(np.asarray(ns, float), np.log(times), 1)[0])


def run_bench(shallow_grid=SHALLOW_GRID, cc_c_grid=CC_C_GRID, depth=2, samples=5, seed=0):
    rows = [bench_shallow(n, depth, samples, seed) for n in shallow_grid]
    rows += [bench_cc_c(n, samples, seed) for n in cc_c_grid]
    return rows


def summarize(rows) -> dict:
    out = {}
    sh = [r for r in rows if r.algorithm == "shallow"]
    cc = [r for r in rows if r.algorithm == "cc-c"]
    if len(sh) >= 2:
        out["shallow_loglog_slope"] = loglog_slope([r.n for r in sh], [r.mean_seconds for r in sh])
    if len(cc) >= 2:
        out["cc_c_loglog_slope"] = loglog_slope([r.n for r in cc], [r.mean_seconds for r in cc])
        out["cc_c_semilog_slope"] = semilog_slope([r.n for r in cc], [r.mean_seconds for r in cc])
    out["max_cv"] = max((r.cv for r in rows), default=0.0)
    return out


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(BenchRow)])
    for r in rows:
        w.writerow(astuple(r))
    return buf.getvalue()
