"""Chain-rule boson samplers.

All samplers use the standard input with one photon in each of the first
``n`` modes and draw output modes one photon at a time from unnormalized
weights:

* ``cc-a`` sums over every ``k``-subset of input columns (exact marginals).
* ``cc-b`` draws a uniformly random permutation ``alpha`` per sample and
  scores candidates by ``|per|^2`` of the prefix rows plus the candidate on
  columns ``alpha[:k]``.
* ``cc-c`` gets the same weights through a Laplace expansion along the
  candidate row, so the permanents are computed once per step.
* ``shallow`` computes those Laplace coefficients with the tree DP on the
  banded unitary of a shallow circuit, excluding already used output modes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .cp_permanent import Table, TableEvaluator, local_table
from .errors import CapacityError, CollisionError, DegenerateDistributionError, DomainError
from .fock import occupation_from_qudits
from .linalg import ComplexMatrix, subpermanent_family
from .treedec import (
    TreeDecomposition,
    linear_banded_decomposition,
    permute_columns,
    prune_redundant,
    replace_with_dummy,
    restrict,
)

CC_A_MAX = 6
CC_B_MAX = 20
CC_C_MAX = 25
ALGORITHMS = ("cc-a", "cc-b", "cc-c", "shallow")


class Sample(NamedTuple):
    r: tuple
    alpha: tuple
    occupation: tuple


class MarginalWeights(NamedTuple):
    support: np.ndarray
    weights: np.ndarray

    def dense(self, m: int) -> np.ndarray:
        out = np.zeros(m)
        out[self.support] = self.weights
        return out


def draw_from_weights(w, rng) -> int:
    """Draw an entry with probability proportional to its weight.

    ``w`` is a :class:`MarginalWeights` (the drawn support element is
    returned) or a plain weight vector (the drawn index is returned).
    """
    if isinstance(w, MarginalWeights):
        support, weights = w.support, w.weights
    else:
        weights = np.asarray(w, dtype=np.float64)
        support = None
    cum = np.cumsum(weights)
    if cum.size == 0 or not cum[-1] > 0:
        raise DegenerateDistributionError("all weights are zero")
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    idx = min(idx, cum.size - 1)
    return idx if support is None else int(support[idx])


def _data(u) -> np.ndarray:
    return np.asarray(u, dtype=np.complex128)


def _check_n(n, m, cap, name):
    if n > cap:
        raise CapacityError(f"{name} is capped at n={cap}, got {n}")
    if not 1 <= n <= m:
        raise DomainError(f"need 1 <= n <= m, got n={n}, m={m}")


# dense step weights


def cc_a_weights(u, prefix: Sequence[int], n: int) -> np.ndarray:
    """Unnormalized exact marginal weights of the next photon over all modes."""
    a = _data(u)
    k = len(prefix) + 1
    pre = a[list(prefix)]
    total = np.zeros(a.shape[0])
    for cols in itertools.combinations(range(n), k):
        cols = list(cols)
        total += _kernels.extension_weights(np.ascontiguousarray(pre[:, cols]), np.ascontiguousarray(a[:, cols]))
    return total


def cc_b_weights(u, prefix: Sequence[int], alpha: Sequence[int]) -> np.ndarray:
    """``|per|^2`` of prefix rows plus each candidate row on columns ``alpha[:k]``."""
    a = _data(u)
    cols = list(alpha[: len(prefix) + 1])
    block = a[:, cols]
    return _kernels.extension_weights(np.ascontiguousarray(block[list(prefix)]), block)


def cc_c_weights(u, prefix: Sequence[int], alpha: Sequence[int]) -> np.ndarray:
    """Same weights as :func:`cc_b_weights` through one subpermanent family per step."""
    a = _data(u)
    cols = list(alpha[: len(prefix) + 1])
    block = a[:, cols]
    sub = subpermanent_family(block[list(prefix)])
    w = block @ sub
    return w.real**2 + w.imag**2


def _chain(u, n, rng, weights_fn, collision_free=False):
    m = _data(u).shape[0]
    prefix = []
    for _ in range(n):
        w = weights_fn(prefix)
        if collision_free and prefix:
            w = w.copy()
            w[prefix] = 0.0
        prefix.append(draw_from_weights(w, rng))
    return tuple(prefix), occupation_from_qudits(prefix, m)


def sample_cc_a(u, n: int, rng) -> Sample:
    m = _data(u).shape[0]
    _check_n(n, m, CC_A_MAX, "sample_cc_a")
    r, occ = _chain(u, n, rng, lambda p: cc_a_weights(u, p, n))
    return Sample(r, (), occ)


def sample_cc_b(u, n: int, rng) -> Sample:
    m = _data(u).shape[0]
    _check_n(n, m, CC_B_MAX, "sample_cc_b")
    alpha = tuple(int(x) for x in rng.permutation(n))
    r, occ = _chain(u, n, rng, lambda p: cc_b_weights(u, p, alpha))
    return Sample(r, alpha, occ)


def sample_cc_c(u, n: int, rng, collision_free: bool = False) -> Sample:
    m = _data(u).shape[0]
    _check_n(n, m, CC_C_MAX, "sample_cc_c")
    alpha = tuple(int(x) for x in rng.permutation(n))
    r, occ = _chain(u, n, rng, lambda p: cc_c_weights(u, p, alpha), collision_free)
    return Sample(r, alpha, occ)


# shallow-circuit sampler


@dataclass(frozen=True, eq=False)
class ShallowBase:
    """Per-unitary preparation: the path over occupied columns and its Q tables.

    Node ``p`` of ``tree`` holds input column ``p``. ``support_rows[p]`` is
    the row set of node ``p`` before any restriction to a prefix.
    """

    matrix: ComplexMatrix
    n: int
    tree: TreeDecomposition
    q: dict
    support_rows: dict
    views: dict = field(default_factory=dict, repr=False)

    def q_values(self, p, rows, with_col: bool) -> np.ndarray:
        """Entries of node ``p``'s Q table restricted to ``rows`` (and its column if kept)."""
        key = (p, rows, with_col)
        values = self.views.get(key)
        if values is None:
            table = self.q[p]
            values = table.view(rows, table.cols if with_col else ()).values
            self.views[key] = values
        return values


@dataclass(frozen=True, eq=False)
class PreparedShallow:
    """A :class:`ShallowBase` with columns relabeled by a permutation ``alpha``.

    After relabeling, column label ``i`` lives in node ``alpha[i]``.
    """

    base: ShallowBase
    alpha: tuple
    tree: TreeDecomposition

    def q_provider(self, T: TreeDecomposition, t):
        if t not in self.base.q:
            return None
        rows, cols = T.rho[t], T.kappa[t]
        return Table(rows, cols, self.base.q_values(t, rows, bool(cols)))


def prepare_base(u: ComplexMatrix, n: int) -> ShallowBase:
    if not isinstance(u, ComplexMatrix) or u.structure is None:
        raise DomainError("the shallow sampler needs a unitary with structural band metadata")
    m = u.n_rows
    if not 1 <= n <= m:
        raise DomainError(f"need 1 <= n <= m, got n={n}, m={m}")
    mask = u.structure
    keep = [i for i in range(m) if mask[i, :n].any()]
    T = restrict(linear_banded_decomposition(u), keep, range(n))
    T = prune_redundant(T)
    if sorted(T.rho) != list(range(n)):
        raise DomainError("occupied columns do not form a path decomposition")
    q = {p: local_table(u, T.rho[p], T.kappa[p]) for p in T.rho}
    return ShallowBase(u, n, T, q, dict(T.rho))


def shallow_prepare(u: ComplexMatrix, n: int, alpha=None, base: ShallowBase | None = None) -> PreparedShallow:
    """Relabel the prepared path by ``alpha``; Q tables are reused unchanged."""
    if base is None:
        base = prepare_base(u, n)
    alpha = tuple(range(n)) if alpha is None else tuple(int(a) for a in alpha)
    return PreparedShallow(base, alpha, permute_columns(base.tree, alpha))


def _restricted_path(prep: PreparedShallow, prefix: Sequence[int], k: int) -> TreeDecomposition:
    T = restrict(prep.tree, prefix, range(k))
    covered = set()
    for t in T.rho:
        if T.kappa[t]:
            covered.update(T.rho[t])
    if not set(prefix) <= covered:
        raise DegenerateDistributionError("a prefix mode has no coupling to the active columns")
    return prune_redundant(T)


def laplace_subpermanents(prep: PreparedShallow, prefix: Sequence[int], evaluator: TableEvaluator | None = None):
    """Column-deleted permanents of the prefix block, walking the dummy root along the path.

    Returns the path nodes (input columns, left to right) and, for each, the
    permanent of the prefix block with that node's column removed.
    """
    k = len(prefix) + 1
    T = _restricted_path(prep, prefix, k)
    order = T.path_order()
    if evaluator is None:
        evaluator = TableEvaluator(prep.base.matrix, q_provider=prep.q_provider)
    subperms = np.empty(k, dtype=np.complex128)
    for j in range(k):
        Tj = replace_with_dummy(T, j)
        d = Tj.root
        subperms[j] = evaluator.p_tables(Tj)[d].get(Tj.rho[d], ())
    return order, subperms


def shallow_marginal_weights(prep: PreparedShallow, prefix: Sequence[int], include_prefix: bool = False) -> MarginalWeights:
    """Weights of the next photon over the modes it can reach.

    Prefix modes are left out of the support unless ``include_prefix`` is
    set, in which case they get the weight of a repeated output row. The
    sampler itself never draws them.
    """
    prefix = [int(r) for r in prefix]
    if len(set(prefix)) != len(prefix):
        raise CollisionError(f"prefix {prefix} repeats a mode")
    k = len(prefix) + 1
    if k > prep.base.n:
        raise DomainError(f"step {k} beyond n={prep.base.n}")
    order, subperms = laplace_subpermanents(prep, prefix)
    reach = set()
    for p in order:
        reach.update(prep.base.support_rows[p])
    support = np.array(sorted(reach if include_prefix else reach.difference(prefix)), dtype=np.int64)
    w = prep.base.matrix.data[:, order][support] @ subperms
    return MarginalWeights(support, w.real**2 + w.imag**2)


def sample_shallow(u: ComplexMatrix, n: int, rng, base: ShallowBase | None = None) -> Sample:
    if base is None:
        base = prepare_base(u, n)
    alpha = tuple(int(x) for x in rng.permutation(n))
    prep = shallow_prepare(u, n, alpha, base)
    prefix = []
    for _ in range(n):
        prefix.append(draw_from_weights(shallow_marginal_weights(prep, prefix), rng))
    return Sample(tuple(prefix), alpha, occupation_from_qudits(prefix, u.n_rows))


# streams and oracles


def sample_stream(algorithm: str, u, n: int, samples: int, seed: int):
    """Yield ``(index, Sample)``; sample ``i`` uses its own stream seeded by ``(seed, i)``."""
    if algorithm == "shallow":
        base = prepare_base(u, n)
        draw = lambda rng: sample_shallow(u, n, rng, base)  # noqa: E731
    else:
        fn = {"cc-a": sample_cc_a, "cc-b": sample_cc_b, "cc-c": sample_cc_c}.get(algorithm)
        if fn is None:
            raise ValueError(f"unknown algorithm {algorithm!r}")
        draw = lambda rng: fn(u, n, rng)  # noqa: E731
    for i in range(samples):
        yield i, draw(np.random.default_rng([seed, i]))


def cc_b_expected_marginal(u, prefix: Sequence[int], n: int) -> float:
    """Average of ``|per|^2 / k!`` over every permutation of the ``n`` input columns."""
    a = _data(u)
    k = len(prefix)
    rows = a[list(prefix)]
    total = 0.0
    for alpha in itertools.permutations(range(n)):
        v = _kernels.glynn_gray(np.ascontiguousarray(rows[:, list(alpha[:k])]))
        total += abs(v) ** 2
    return total / (math.factorial(n) * math.factorial(k))


def collision_free_distribution(u, n: int) -> dict:
    """Exact output law of the collision-free chain sampler, keyed by occupation.

    Enumerates every permutation and every sequence of distinct modes, using
    the dense weights with already used modes removed at each step.
    """
    a = _data(u)
    m = a.shape[0]
    out: dict = {}
    perms = list(itertools.permutations(range(n)))

    def walk(alpha, prefix, prob):
        if len(prefix) == n:
            occ = occupation_from_qudits(prefix, m)
            out[occ] = out.get(occ, 0.0) + prob
            return
        w = cc_b_weights(a, prefix, alpha)
        w[list(prefix)] = 0.0
        total = w.sum()
        if total <= 0:
            return
        for i in np.flatnonzero(w):
            walk(alpha, prefix + [int(i)], prob * w[i] / total)

    for alpha in perms:
        walk(alpha, [], 1.0 / len(perms))
    return dict(sorted(out.items()))
