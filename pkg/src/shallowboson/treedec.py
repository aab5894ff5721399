"""Tree decompositions of the bipartite row/column graph of a matrix.

A node carries a set of row labels ``rho`` and a set of column labels
``kappa``. A decomposition is valid for a matrix when every row and column
appears somewhere (T1), every structural nonzero ``(r, c)`` shares a node
(T2), and the nodes containing any one label form a connected subtree (T3).

Decompositions are immutable: every transformation returns a new object.
Node ids are integers; dummy nodes get fresh negative ids.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, RedundancyError
from .linalg import DEFAULT_TOL, ComplexMatrix

_dummy_ids = itertools.count(-1, -1)


def fresh_dummy_id() -> int:
    return next(_dummy_ids)


@dataclass(frozen=True)
class BipartiteGraph:
    """Rows and columns as vertices, structural nonzeros as weighted edges."""

    rows: frozenset
    cols: frozenset
    edges: Mapping  # (row, col) -> complex weight

    def __post_init__(self):
        for r, c in self.edges:
            if r not in self.rows or c not in self.cols:
                raise DomainError(f"edge ({r}, {c}) references an undeclared vertex")


@dataclass(frozen=True)
class Violation:
    axiom: str  # "T1", "T2" or "T3"
    witness: tuple
    message: str

    def __str__(self):
        return f"{self.axiom}: {self.message}"


def graph_of(m: ComplexMatrix, structural_mask=None, tol=DEFAULT_TOL) -> BipartiteGraph:
    """Bipartite graph of ``m``; repeated labels become positional vertices."""
    if structural_mask is None:
        mask = m.nonzero_mask(tol)
    else:
        mask = np.asarray(structural_mask, dtype=bool)
    rows = m.row_labels if len(set(m.row_labels)) == m.n_rows else tuple(range(m.n_rows))
    cols = m.col_labels if len(set(m.col_labels)) == m.n_cols else tuple(range(m.n_cols))
    edges = {(rows[i], cols[j]): complex(m.data[i, j]) for i, j in zip(*np.nonzero(mask))}
    return BipartiteGraph(frozenset(rows), frozenset(cols), edges)


class TreeDecomposition:
    """Rooted tree with row labels ``rho[t]`` and column labels ``kappa[t]`` per node."""

    def __init__(self, rho: Mapping, kappa: Mapping, parent: Mapping, root=None, *, check=True):
        self.rho = {t: tuple(sorted(v)) for t, v in rho.items()}
        self.kappa = {t: tuple(sorted(kappa.get(t, ()))) for t in self.rho}
        self.parent = {t: parent.get(t) for t in self.rho}
        roots = [t for t, p in self.parent.items() if p is None]
        if root is None:
            if len(roots) != 1:
                raise DomainError(f"expected exactly one root, found {len(roots)}")
            root = roots[0]
        self.root = root
        self._children = None
        if check:
            self._check_tree(roots)

    @classmethod
    def _trusted(cls, rho, kappa, parent, root):
        """Build from already sorted label tuples without any checks."""
        T = cls.__new__(cls)
        T.rho, T.kappa, T.parent, T.root = rho, kappa, parent, root
        T._children = None
        return T

    def _check_tree(self, roots):
        if roots != [self.root]:
            raise DomainError("root must be the only node without a parent")
        for t, p in self.parent.items():
            if p is not None and p not in self.rho:
                raise DomainError(f"node {t} has unknown parent {p}")
        # every node must reach the root without revisiting
        for t in self.rho:
            seen = set()
            while t is not None:
                if t in seen:
                    raise DomainError("parent links contain a cycle")
                seen.add(t)
                t = self.parent[t]

    @property
    def nodes(self):
        return tuple(self.rho)

    def __len__(self):
        return len(self.rho)

    @property
    def children(self) -> dict:
        """Children of every node, in ascending id order."""
        ch = self._children
        if ch is None:
            lists = {t: [] for t in self.rho}
            for t, p in self.parent.items():
                if p is not None:
                    lists[p].append(t)
            ch = self._children = {t: tuple(sorted(v)) for t, v in lists.items()}
        return ch

    def postorder(self) -> list:
        """Nodes with every child before its parent; siblings by ascending id."""
        out, stack = [], [(self.root, False)]
        while stack:
            t, done = stack.pop()
            if done:
                out.append(t)
                continue
            stack.append((t, True))
            stack.extend((c, False) for c in reversed(self.children[t]))
        return out

    def all_rows(self) -> set:
        return set().union(*self.rho.values()) if self.rho else set()

    def all_cols(self) -> set:
        return set().union(*self.kappa.values()) if self.kappa else set()

    def subtree_labels(self, t) -> tuple[set, set]:
        rows, cols, stack = set(), set(), [t]
        while stack:
            u = stack.pop()
            rows.update(self.rho[u])
            cols.update(self.kappa[u])
            stack.extend(self.children[u])
        return rows, cols

    def path_order(self) -> list:
        """Nodes from the root down, for a decomposition that is a path."""
        order, t = [], self.root
        while True:
            order.append(t)
            ch = self.children[t]
            if not ch:
                return order
            if len(ch) > 1:
                raise DomainError("decomposition is not a path")
            t = ch[0]

    def with_changes(self, rho=None, kappa=None, parent=None, root=None, check=False):
        if not check:
            # inputs derived from an existing decomposition keep sorted tuples
            return TreeDecomposition._trusted(
                self.rho if rho is None else rho,
                self.kappa if kappa is None else kappa,
                self.parent if parent is None else parent,
                self.root if root is None else root,
            )
        return TreeDecomposition(
            self.rho if rho is None else rho,
            self.kappa if kappa is None else kappa,
            self.parent if parent is None else parent,
            self.root if root is None else root,
            check=check,
        )

    def dump(self) -> str:
        lines = []
        for t in self.postorder()[::-1]:
            p = self.parent[t]
            lines.append(
                f"{t}: rho={list(self.rho[t])} kappa={list(self.kappa[t])} parent={'-' if p is None else p}"
            )
        return "\n".join(lines)

    def __repr__(self):
        return f"TreeDecomposition(nodes={len(self)}, root={self.root}, width={treewidth(self)})"


def _label_connected(T: TreeDecomposition, holders: set) -> bool:
    # a label is connected iff exactly one holder has a parent that lacks it
    tops = sum(1 for t in holders if T.parent[t] not in holders)
    return tops == 1


def validate(T: TreeDecomposition, G: BipartiteGraph):
    """Return the first violated axiom as a :class:`Violation`, or ``None``."""
    rows, cols = T.all_rows(), T.all_cols()
    for r in sorted(G.rows - rows):
        return Violation("T1", ("row", r), f"row {r} is in no node")
    for c in sorted(G.cols - cols):
        return Violation("T1", ("col", c), f"column {c} is in no node")
    row_holders, col_holders = {}, {}
    for t in T.rho:
        for r in T.rho[t]:
            row_holders.setdefault(r, set()).add(t)
        for c in T.kappa[t]:
            col_holders.setdefault(c, set()).add(t)
    for r, c in sorted(G.edges):
        if not row_holders.get(r, set()) & col_holders.get(c, set()):
            return Violation("T2", (r, c), f"edge ({r}, {c}) is in no node")
    for kind, holders in (("row", row_holders), ("col", col_holders)):
        for label in sorted(holders):
            if not _label_connected(T, holders[label]):
                return Violation("T3", (kind, label), f"{kind} {label} spans a disconnected set of nodes")
    return None


def treewidth(T: TreeDecomposition) -> int:
    return max(len(T.rho[t]) + len(T.kappa[t]) for t in T.rho) - 1


def linear_banded_decomposition(m) -> TreeDecomposition:
    """Path decomposition with one node per column, rooted at the first column.

    Node ``p`` holds column ``p`` (by position) and the rows that are
    structurally nonzero in it. A row whose nonzeros span several columns is
    also placed in every node between them, so the rows of each label stay
    connected; for a banded matrix this adds nothing.
    """
    if isinstance(m, ComplexMatrix):
        mask = m.nonzero_mask()
        row_labels, col_labels = m.row_labels, m.col_labels
    else:
        mask = np.asarray(m, dtype=bool)
        row_labels, col_labels = range(mask.shape[0]), range(mask.shape[1])
    n_cols = mask.shape[1]
    rho = {p: set() for p in range(n_cols)}
    for i, label in enumerate(row_labels):
        nz = np.flatnonzero(mask[i])
        if nz.size:
            for p in range(nz[0], nz[-1] + 1):
                rho[p].add(label)
    kappa = {p: (col_labels[p],) for p in range(n_cols)}
    parent = {p: (p - 1 if p > 0 else None) for p in range(n_cols)}
    return TreeDecomposition(rho, kappa, parent, 0 if n_cols else None)


def permute_columns(T: TreeDecomposition, alpha) -> TreeDecomposition:
    """Relabel column ``j`` as ``alpha^{-1}(j)``; rows and tree are untouched.

    ``alpha`` is a sequence with ``alpha[i]`` the image of ``i``, or a mapping.
    After relabeling, column ``i`` sits in the node that held ``alpha(i)``.
    """
    items = alpha.items() if isinstance(alpha, Mapping) else enumerate(alpha)
    fwd = {int(i): int(a) for i, a in items}
    if sorted(fwd.values()) != sorted(fwd):
        raise DomainError("alpha is not a bijection on its domain")
    inv = {a: i for i, a in fwd.items()}
    missing = T.all_cols() - set(inv)
    if missing:
        raise DomainError(f"alpha does not cover column labels {sorted(missing)}")
    kappa = {t: tuple(sorted(inv[c] for c in cs)) for t, cs in T.kappa.items()}
    return T.with_changes(kappa=kappa)


def restrict(T: TreeDecomposition, rows: Iterable, cols: Iterable) -> TreeDecomposition:
    """Intersect every node's labels with ``rows`` and ``cols``."""
    rows, cols = set(rows), set(cols)
    rho = {t: tuple(r for r in rs if r in rows) for t, rs in T.rho.items()}
    kappa = {t: tuple(c for c in cs if c in cols) for t, cs in T.kappa.items()}
    return T.with_changes(rho=rho, kappa=kappa)


def is_redundant(T: TreeDecomposition, t) -> bool:
    if T.kappa[t]:
        return False
    if not T.rho[t]:
        return True
    others = set()
    for u, rs in T.rho.items():
        if u != t:
            others.update(rs)
    return set(T.rho[t]) <= others


def remove_redundant(T: TreeDecomposition, t) -> TreeDecomposition:
    """Drop a column-free node whose rows all appear elsewhere, reconnecting its neighbours.

    Children of ``t`` are attached to its parent. When ``t`` is the root its
    lowest-id child becomes the new root and adopts the other children.
    """
    if t not in T.rho:
        raise DomainError(f"unknown node {t}")
    if T.kappa[t]:
        raise RedundancyError(f"node {t} still carries columns {list(T.kappa[t])}")
    if not is_redundant(T, t):
        raise RedundancyError(f"node {t} owns a row found in no other node")
    return _splice_out(T, t)


def _splice_out(T: TreeDecomposition, t) -> TreeDecomposition:
    if len(T) == 1:
        raise RedundancyError("cannot remove the only node")
    ch = T.children[t]
    parent = dict(T.parent)
    del parent[t]
    root = T.root
    if t == T.root:
        root = ch[0]
        parent[root] = None
        for c in ch[1:]:
            parent[c] = root
    else:
        for c in ch:
            parent[c] = T.parent[t]
    rho = {u: v for u, v in T.rho.items() if u != t}
    kappa = {u: v for u, v in T.kappa.items() if u != t}
    out = TreeDecomposition._trusted(rho, kappa, parent, root)
    if len(ch) > 1:
        # splicing a branching node can disconnect a row shared by two children
        for r in T.rho[t]:
            holders = {u for u in out.rho if r in out.rho[u]}
            if not _label_connected(out, holders):
                raise RedundancyError(f"removing node {t} would disconnect row {r}")
    return out


def prune_redundant(T: TreeDecomposition) -> TreeDecomposition:
    """Remove redundant column-free nodes in ascending id order until none is left.

    Removing a node never makes another one redundant, so a single pass with
    running row counts finds them all.
    """
    counts = {}
    for rs in T.rho.values():
        for r in rs:
            counts[r] = counts.get(r, 0) + 1
    for t in sorted(T.rho):
        if len(T) == 1 or T.kappa[t] or any(counts[r] < 2 for r in T.rho[t]):
            continue
        rows = T.rho[t]
        try:
            T = _splice_out(T, t)
        except RedundancyError:
            continue
        for r in rows:
            counts[r] -= 1
    return T


def replace_with_dummy(T: TreeDecomposition, j: int, dummy_id=None) -> TreeDecomposition:
    """Replace the node at 0-based path position ``j`` by a column-free root.

    The nodes before ``j`` hang under the dummy in reverse order and the
    nodes after ``j`` keep their order. The dummy holds the rows shared by its
    two neighbours, or nothing when it has only one neighbour.
    """
    order = T.path_order()
    if not 0 <= j < len(order):
        raise DomainError(f"position {j} outside a path of length {len(order)}")
    d = fresh_dummy_id() if dummy_id is None else dummy_id
    left, right = order[:j], order[j + 1:]
    if left and right:
        shared = set(T.rho[left[-1]]) & set(T.rho[right[0]])
        rho_d = tuple(r for r in T.rho[left[-1]] if r in shared)
    else:
        rho_d = ()
    rho = {d: rho_d}
    kappa = {d: ()}
    parent = {d: None}
    prev = d
    for t in reversed(left):
        rho[t], kappa[t], parent[t] = T.rho[t], T.kappa[t], prev
        prev = t
    prev = d
    for t in right:
        rho[t], kappa[t], parent[t] = T.rho[t], T.kappa[t], prev
        prev = t
    return TreeDecomposition._trusted(rho, kappa, parent, d)
