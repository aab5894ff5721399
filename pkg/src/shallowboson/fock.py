"""Occupation and qudit bookkeeping, V matrices and exact output probabilities.

Modes are 0-based throughout. An occupation state is a tuple of ``m`` counts;
a qudit vector lists the mode of each photon. The samplers always use the
standard input with one photon in each of the first ``n`` modes.
"""

from __future__ import annotations

import io
import itertools
import math
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import CapacityError, DomainError
from .linalg import ComplexMatrix, factorial_product

EXACT_MAX_OUTCOMES = 10**6
MARGINAL_MAX_TERMS = 10**5


def _unitary(u) -> np.ndarray:
    return np.asarray(u, dtype=np.complex128)


def standard_input(n: int, m: int) -> tuple:
    if n > m:
        raise DomainError(f"cannot place {n} photons in {m} modes one per mode")
    return (1,) * n + (0,) * (m - n)


def z_from_occupation(counts: Sequence[int]) -> tuple:
    """Non-decreasing list of occupied modes, one entry per photon."""
    if any(c < 0 for c in counts):
        raise DomainError("occupation counts must be nonnegative")
    return tuple(i for i, c in enumerate(counts) for _ in range(int(c)))


def occupation_from_qudits(modes: Sequence[int], m: int) -> tuple:
    """Count how many photons landed in each of the ``m`` modes."""
    counts = [0] * m
    for r in modes:
        if not 0 <= r < m:
            raise DomainError(f"mode {r} outside [0, {m})")
        counts[r] += 1
    return tuple(counts)


def build_V(u, n_out: Sequence[int], n_in: Sequence[int]) -> ComplexMatrix:
    """Copy row ``i`` of U ``n_out[i]`` times and column ``j`` ``n_in[j]`` times."""
    a = _unitary(u)
    if len(n_out) != a.shape[0] or len(n_in) != a.shape[1]:
        raise DomainError("occupation length differs from the number of modes")
    if sum(n_out) != sum(n_in):
        raise DomainError(f"photon numbers differ: {sum(n_out)} out, {sum(n_in)} in")
    rows, cols = z_from_occupation(n_out), z_from_occupation(n_in)
    return ComplexMatrix(a[np.ix_(rows, cols)], rows, cols, allow_repeats=True)


def build_V_qudit(u, outs: Sequence[int], cols) -> ComplexMatrix:
    """Rows in sampling order (newest last), columns in ascending id order."""
    a = _unitary(u)
    cols = sorted(cols)
    if len(outs) != len(cols):
        raise DomainError(f"{len(outs)} outputs but {len(cols)} input columns")
    m = a.shape[0]
    if any(not 0 <= r < m for r in outs) or any(not 0 <= c < a.shape[1] for c in cols):
        raise DomainError("mode index out of range")
    data = a[np.ix_(list(outs), cols)] if outs else np.zeros((0, 0), dtype=np.complex128)
    return ComplexMatrix(data, tuple(outs), tuple(cols), allow_repeats=True)


def _abs2_per(a: np.ndarray) -> float:
    return abs(_kernels.glynn_gray(np.ascontiguousarray(a))) ** 2


def outcome_probability(u, n_out, n_in) -> float:
    """``|per V|^2 / prod(n_i! n'_i!)`` for the occupation pair."""
    v = build_V(u, n_out, n_in)
    return _abs2_per(v.data) / (factorial_product(n_out) * factorial_product(n_in))


def qudit_probability(u, outs: Sequence[int], n: int) -> float:
    """Probability of the ordered output list ``outs`` for the standard input."""
    a = _unitary(u)
    return _abs2_per(a[np.ix_(list(outs), range(n))]) / math.factorial(n)


def occupations(m: int, n: int) -> list:
    """All occupation vectors with ``n`` photons in ``m`` modes, lexicographically ascending."""
    # stars and bars: one weakly increasing mode list per outcome
    return sorted(occupation_from_qudits(z, m) for z in itertools.combinations_with_replacement(range(m), n))


def exact_distribution(u, n_in: Sequence[int]) -> dict:
    """Full output pmf keyed by occupation tuple, in lexicographic order."""
    a = _unitary(u)
    m = a.shape[0]
    n = int(sum(n_in))
    size = math.comb(m + n - 1, n)
    if size > EXACT_MAX_OUTCOMES:
        raise CapacityError(f"{size} outcomes exceed the cap of {EXACT_MAX_OUTCOMES}")
    cols = list(z_from_occupation(n_in))
    sub = a[:, cols]
    norm_in = factorial_product(n_in)
    out = {}
    for occ in occupations(m, n):
        rows = list(z_from_occupation(occ))
        out[occ] = _abs2_per(sub[rows]) / (norm_in * factorial_product(occ))
    return out


def distribution_csv(dist: dict) -> str:
    buf = io.StringIO()
    buf.write("occupation,probability\n")
    for occ, p in dist.items():
        buf.write(f"{'-'.join(map(str, occ))},{p:.17g}\n")
    return buf.getvalue()


def marginal_pmf_A(u, prefix: Sequence[int], n: int) -> float:
    """Marginal probability of the first ``k`` photons landing in ``prefix``.

    Sums ``|per|^2`` over every ``k``-subset of the ``n`` occupied input
    columns and scales by ``(n - k)! / n!``.
    """
    a = _unitary(u)
    k = len(prefix)
    if k > n:
        raise DomainError(f"prefix of length {k} longer than n={n}")
    terms = math.comb(n, k)
    if terms > MARGINAL_MAX_TERMS:
        raise CapacityError(f"{terms} column subsets exceed the cap of {MARGINAL_MAX_TERMS}")
    rows = a[list(prefix)]
    total = sum(_abs2_per(rows[:, list(c)]) for c in itertools.combinations(range(n), k))
    return total * math.factorial(n - k) / math.factorial(n)
