"""Permanents by dynamic programming over a tree decomposition.

Every node ``t`` gets two dense tables indexed by a (row subset, column
subset) pair of its own labels:

* ``Q[t](R, C)`` is the permanent of ``M[R, C]`` (zero unless ``|R| = |C|``).
* ``P[t](R, C)`` is the permanent of the submatrix on ``R``, ``C`` together
  with every label that occurs only further down the subtree of ``t``.

Leaves have ``P = Q``. A parent combines its ``Q`` with each child's ``P``
through a subset convolution over the labels the two share, and the root
entry on all of its labels is the permanent of the whole matrix.

Table layout: bit ``i`` of the index selects ``rows[i]`` and bit
``len(rows) + j`` selects ``cols[j]``.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from . import _kernels
from .errors import CapacityError, OrderingError, ValidationError
from .instrument import COUNTERS
from .linalg import ComplexMatrix
from .treedec import TreeDecomposition, graph_of, validate

METHODS = ("naive", "ranked")
TABLE_BITS_MAX = 30  # labels per node; a dense table has 2**bits complex entries


class Table:
    """Dense table over a node's labels; see the module docstring for the layout."""

    __slots__ = ("rows", "cols", "values", "_pos")

    def __init__(self, rows, cols, values):
        self.rows = tuple(rows)
        self.cols = tuple(cols)
        self.values = values
        nr = len(self.rows)
        self._pos = (
            {r: i for i, r in enumerate(self.rows)},
            {c: nr + j for j, c in enumerate(self.cols)},
        )

    def __repr__(self):
        return f"Table(rows={self.rows}, cols={self.cols})"

    @property
    def nbits(self):
        return len(self.rows) + len(self.cols)

    def index(self, rows=(), cols=()) -> int:
        rp, cp = self._pos
        idx = 0
        for r in rows:
            idx |= 1 << rp[r]
        for c in cols:
            idx |= 1 << cp[c]
        return idx

    def get(self, rows=(), cols=()) -> complex:
        return complex(self.values[self.index(rows, cols)])

    def subset_index(self, rows, cols, extra=0) -> np.ndarray:
        """Indices into this table of every subset of ``rows + cols``, in that bit order."""
        rp, cp = self._pos
        pos = np.array([rp[r] for r in rows] + [cp[c] for c in cols], dtype=np.int64)
        return _kernels.subset_index(pos, int(extra))

    def view(self, rows, cols) -> "Table":
        """The same entries re-keyed over a subset of the labels, in a new order."""
        return Table(tuple(rows), tuple(cols), _kernels.gather(self.values, self.subset_index(rows, cols)))

    def relabel_cols(self, mapping) -> "Table":
        return Table(self.rows, tuple(mapping[c] for c in self.cols), self.values)


class ChildLink(NamedTuple):
    """Labels a child shares with its parent (``lam_*``) and labels only the child has (``delta_*``)."""

    child: int
    lam_rows: tuple
    lam_cols: tuple
    delta_rows: tuple
    delta_cols: tuple

    @classmethod
    def between(cls, T: TreeDecomposition, parent, child) -> "ChildLink":
        pr, pc = set(T.rho[parent]), set(T.kappa[parent])
        cr, cc = T.rho[child], T.kappa[child]
        return cls(
            child,
            tuple(r for r in cr if r in pr),
            tuple(c for c in cc if c in pc),
            tuple(r for r in cr if r not in pr),
            tuple(c for c in cc if c not in pc),
        )


def table_stats() -> dict:
    q, p = COUNTERS["q_tables"], COUNTERS["p_tables"]
    return {"q_tables": q, "p_tables": p, "total": q + p}


def reset_table_stats() -> None:
    COUNTERS["q_tables"] = 0
    COUNTERS["p_tables"] = 0


def local_table(m: ComplexMatrix, rows, cols) -> Table:
    """Q table over the given labels of ``m``."""
    if len(rows) + len(cols) > TABLE_BITS_MAX:
        raise CapacityError(f"node with {len(rows) + len(cols)} labels exceeds the cap of {TABLE_BITS_MAX}")
    COUNTERS["q_tables"] += 1
    if not cols:
        # only the empty selection is square
        values = np.zeros(1 << len(rows), dtype=np.complex128)
        values[0] = 1.0
        return Table(rows, cols, values)
    ri = [m.row_index(r) for r in rows]
    ci = [m.col_index(c) for c in cols]
    block = np.ascontiguousarray(m.data[np.ix_(ri, ci)]) if ri else np.zeros((0, len(ci)), np.complex128)
    return Table(rows, cols, _kernels.local_permanents(block))


def compute_Q(T: TreeDecomposition, t, m: ComplexMatrix) -> Table:
    return local_table(m, T.rho[t], T.kappa[t])


def helper_Qprime(q_t: Table, link: ChildLink) -> Table:
    """Parent table on the shared labels with sign ``(-1)^{|R|}``."""
    lam = q_t.view(link.lam_rows, link.lam_cols)
    signs = _kernels.row_signs(len(link.lam_rows), lam.nbits)
    return Table(lam.rows, lam.cols, lam.values * signs)


def helper_Qdoubleprime(p_c: Table | None, link: ChildLink) -> Table:
    """Child table on the shared labels, shifted to always include the child-only labels."""
    if p_c is None:
        raise OrderingError(f"P table of child {link.child} is not available yet")
    extra = p_c.index(link.delta_rows, link.delta_cols)
    idx = p_c.subset_index(link.lam_rows, link.lam_cols, extra)
    return Table(link.lam_rows, link.lam_cols, _kernels.gather(p_c.values, idx))


def convolve_subsets(a, b, nbits: int, method: str = "naive") -> np.ndarray:
    """Subset convolution of two tables over ``nbits`` labels."""
    if method == "ranked":
        return _kernels.subset_convolve_ranked(a, b, nbits)
    return _kernels.subset_convolve(a, b)


def subset_convolution(q_t: Table, links, child_tables, method: str = "naive") -> Table:
    """P table of a node from its Q table and its children's P tables.

    Children are folded in the order of ``links`` (ascending child id).
    """
    if method not in METHODS:
        raise ValueError(f"unknown convolution method {method!r}")
    ranked = method == "ranked"
    p = q_t.values
    qrp, qcp = q_t._pos
    for link in links:
        p_c = child_tables.get(link.child)
        if p_c is None:
            raise OrderingError(f"P table of child {link.child} is not available yet")
        crp, ccp = p_c._pos
        qpos = np.array([qrp[r] for r in link.lam_rows] + [qcp[c] for c in link.lam_cols], dtype=np.int64)
        cpos = np.array([crp[r] for r in link.lam_rows] + [ccp[c] for c in link.lam_cols], dtype=np.int64)
        extra = p_c.index(link.delta_rows, link.delta_cols)
        p = _kernels.child_combine(
            p, q_t.values, qpos, cpos, len(link.lam_rows), p_c.values, extra, ranked, q_t.nbits
        )
    if p is q_t.values:
        p = p.copy()
    COUNTERS["p_tables"] += 1
    return Table(q_t.rows, q_t.cols, p)


class TableEvaluator:
    """Computes and caches P tables for one matrix.

    A P table depends only on a node's labels and on the subtrees below it,
    so tables are cached under a key built from exactly that. Re-rooting a
    path therefore recomputes only the nodes whose child changed.

    Parameters
    ----------
    matrix : ComplexMatrix
        Source of entries for Q tables computed from scratch.
    q_provider : callable, optional
        ``q_provider(T, t)`` returns a precomputed Q table for node ``t`` or
        ``None``. Provided tables are not counted as computed.
    method : {"naive", "ranked"}
    """

    def __init__(self, matrix: ComplexMatrix | None, q_provider: Callable | None = None, method: str = "naive"):
        self.matrix = matrix
        self.q_provider = q_provider
        self.method = method
        self._intern: dict = {}
        self._p: list = []
        self._q: dict = {}

    def q_table(self, T: TreeDecomposition, t) -> Table:
        key = (t, T.rho[t], T.kappa[t])
        q = self._q.get(key)
        if q is None:
            q = self.q_provider(T, t) if self.q_provider is not None else None
            if q is None:
                q = compute_Q(T, t, self.matrix)
            self._q[key] = q
        return q

    def p_tables(self, T: TreeDecomposition, upto=None) -> dict:
        """P tables of every node in the subtree of ``upto`` (default: the root)."""
        start = T.root if upto is None else upto
        order, stack = [], [start]
        while stack:
            u = stack.pop()
            order.append(u)
            stack.extend(T.children[u])
        ids, tables = {}, {}
        for t in reversed(order):
            ch = T.children[t]
            key = (t, T.rho[t], T.kappa[t], tuple(ids[c] for c in ch))
            kid = self._intern.get(key)
            if kid is None:
                links = [ChildLink.between(T, t, c) for c in ch]
                table = subset_convolution(self.q_table(T, t), links, tables, self.method)
                kid = len(self._p)
                self._p.append(table)
                self._intern[key] = kid
            ids[t] = kid
            tables[t] = self._p[kid]
        return tables

    def root_value(self, T: TreeDecomposition) -> complex:
        p = self.p_tables(T)[T.root]
        return p.get(T.rho[T.root], T.kappa[T.root])


def permanent_from_tree(T: TreeDecomposition, m: ComplexMatrix, method: str = "naive") -> complex:
    """Permanent of ``m`` read from the root of a decomposition.

    Raises :class:`ValidationError` when an edge is uncovered or a label is
    disconnected. A row or column missing from every node is an all-zero
    line, so the permanent is 0.
    """
    v = validate(T, graph_of(m))
    if v is not None:
        if v.axiom == "T1":
            return 0j
        raise ValidationError(v)
    if m.n_rows != m.n_cols:
        return 0j
    return TableEvaluator(m, method=method).root_value(T)
