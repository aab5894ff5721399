"""Labelled complex matrices and permanent kernels.

Rows and columns carry integer labels (global mode ids, 0-based) so that
submatrices keep track of where they came from. Permanent routines accept a
:class:`ComplexMatrix` or anything :func:`numpy.asarray` understands.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import CapacityError, LabelLookupError, SizeMismatchError
from .instrument import COUNTERS

NAIVE_MAX = 12
GLYNN_MAX = 30
DEFAULT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ComplexMatrix:
    """Dense complex matrix with row and column labels.

    Parameters
    ----------
    data : array_like
        Two-dimensional array of finite complex values.
    row_labels, col_labels : sequence of int, optional
        Global ids of the rows and columns. Default to ``0..n-1``.
        Labels may repeat only when ``allow_repeats`` is set, which is how
        several photons in one mode copy a row or column of the unitary.
    structure : array_like of bool, optional
        Structural nonzero pattern tracked symbolically by the circuit
        builder. When absent, magnitude thresholding is used instead.
    """

    data: np.ndarray
    row_labels: tuple = None
    col_labels: tuple = None
    structure: np.ndarray | None = None
    allow_repeats: bool = field(default=False, repr=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.complex128)
        if data.ndim != 2:
            raise SizeMismatchError(f"expected a 2-d array, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("matrix entries must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        rows = tuple(range(data.shape[0])) if self.row_labels is None else tuple(int(r) for r in self.row_labels)
        cols = tuple(range(data.shape[1])) if self.col_labels is None else tuple(int(c) for c in self.col_labels)
        if len(rows) != data.shape[0] or len(cols) != data.shape[1]:
            raise SizeMismatchError("label counts do not match the matrix shape")
        if not self.allow_repeats:
            if len(set(cols)) != len(cols):
                raise ValueError("duplicate column labels")
            if len(set(rows)) != len(rows):
                raise ValueError("duplicate row labels")
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)
        if self.structure is not None:
            mask = np.array(self.structure, dtype=bool)
            if mask.shape != data.shape:
                raise SizeMismatchError("structure mask shape differs from the data")
            mask.setflags(write=False)
            object.__setattr__(self, "structure", mask)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.data
        return self.data.astype(dtype)

    @property
    def shape(self):
        return self.data.shape

    @property
    def n_rows(self):
        return self.data.shape[0]

    @property
    def n_cols(self):
        return self.data.shape[1]

    def row_index(self, label):
        try:
            return self.row_labels.index(label)
        except ValueError:
            raise LabelLookupError(f"unknown row label {label!r}") from None

    def col_index(self, label):
        try:
            return self.col_labels.index(label)
        except ValueError:
            raise LabelLookupError(f"unknown column label {label!r}") from None

    def entry(self, row_label, col_label):
        return self.data[self.row_index(row_label), self.col_index(col_label)]

    def nonzero_mask(self, tol=DEFAULT_TOL):
        """Structural pattern if recorded, else ``|M_ij| > tol``."""
        if self.structure is not None:
            return self.structure
        return np.abs(self.data) > tol


class Bandwidths(NamedTuple):
    """Band shape of a square matrix.

    ``lower`` and ``upper`` are the usual bandwidths: every nonzero ``M[i, j]``
    has ``i - j <= lower`` and ``j - i <= upper``. ``width`` is the largest
    number of nonzeros in any single row or column, which is what bounds the
    node size of the linear tree decomposition. ``width <= lower + upper + 1``.
    """

    lower: int
    upper: int
    width: int

    @property
    def w1(self):
        return self.lower

    @property
    def w2(self):
        return self.upper

    @property
    def band(self):
        """Number of diagonals spanned, ``lower + upper + 1``."""
        return self.lower + self.upper + 1


def _as_array(m):
    return np.asarray(m, dtype=np.complex128)


def _require_square(a):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SizeMismatchError(f"permanent needs a square matrix, got shape {a.shape}")


_TABLE_MAX = 8  # permutation tables up to 8! rows are kept in memory


@functools.lru_cache(maxsize=None)
def _permutation_table(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int8).reshape(math.factorial(n), n)


def _sum_over_permutations(a: np.ndarray) -> complex:
    n = a.shape[0]
    return complex(np.prod(a[np.arange(n), _permutation_table(n)], axis=1).sum())


def per_naive(m) -> complex:
    """Permanent by summing over all permutations. Reference oracle, n <= 12."""
    a = _as_array(m)
    _require_square(a)
    n = a.shape[0]
    if n > NAIVE_MAX:
        raise CapacityError(f"per_naive is capped at n={NAIVE_MAX}, got {n}")
    if n <= _TABLE_MAX:
        return _sum_over_permutations(a)
    # choose images of the leading rows explicitly, the trailing block by table
    lead = n - _TABLE_MAX
    total = 0j
    for head in itertools.permutations(range(n), lead):
        coeff = np.prod(a[np.arange(lead), head])
        if coeff != 0:
            rest = [c for c in range(n) if c not in head]
            total += coeff * _sum_over_permutations(a[lead:, rest])
    return complex(total)


def per_ryser_glynn(m) -> complex:
    """Permanent by Glynn's formula in Gray-code order, O(n 2^n)."""
    a = np.ascontiguousarray(_as_array(m))
    _require_square(a)
    if a.shape[0] > GLYNN_MAX:
        raise CapacityError(f"per_ryser_glynn is capped at n={GLYNN_MAX}, got {a.shape[0]}")
    nz = a != 0
    if a.size and (not nz.any(axis=1).all() or not nz.any(axis=0).all()):
        return 0j  # exact zero instead of Glynn's cancellation residue
    return complex(_kernels.glynn_gray(a))


def per_rect(m) -> complex:
    """Permanent with the size-mismatch convention: 0 unless square, 1 for 0x0."""
    a = _as_array(m)
    if a.shape[0] != a.shape[1]:
        return 0j
    if a.shape[0] == 0:
        return 1 + 0j
    return per_ryser_glynn(a)


def subpermanent_family(w) -> np.ndarray:
    """Permanents of ``w`` with each column removed in turn.

    Parameters
    ----------
    w : array_like, shape (k - 1, k)

    Returns
    -------
    numpy.ndarray, shape (k,)
        Element ``j`` is the permanent of ``w`` without column ``j``.
    """
    a = np.ascontiguousarray(_as_array(w))
    if a.ndim != 2 or a.shape[0] != a.shape[1] - 1:
        raise SizeMismatchError(f"expected a (k-1) x k matrix, got shape {a.shape}")
    if a.shape[0] > GLYNN_MAX:
        raise CapacityError(f"subpermanent_family is capped at k-1={GLYNN_MAX}")
    COUNTERS["subpermanent_families"] += 1
    return _kernels.subpermanents_gray(a)


def laplace_extend(coeff_row, subperms) -> complex:
    """Laplace expansion along one row: ``sum_j coeff_row[j] * subperms[j]``."""
    c = np.asarray(coeff_row, dtype=np.complex128)
    s = np.asarray(subperms, dtype=np.complex128)
    if c.shape != s.shape or c.ndim != 1:
        raise SizeMismatchError(f"length mismatch: {c.shape} vs {s.shape}")
    return complex(np.dot(c, s))


def submatrix(m: ComplexMatrix, rows: Sequence[int], cols: Sequence[int]) -> ComplexMatrix:
    """Select rows and columns by label, in the requested order.

    A label may be requested more than once; the row or column is then
    copied, which is how several photons in one mode are represented.
    """
    ri = [m.row_index(r) for r in rows]
    ci = [m.col_index(c) for c in cols]
    data = m.data[np.ix_(ri, ci)] if ri and ci else np.zeros((len(ri), len(ci)), dtype=np.complex128)
    structure = None
    if m.structure is not None:
        structure = m.structure[np.ix_(ri, ci)] if ri and ci else np.zeros((len(ri), len(ci)), dtype=bool)
    return ComplexMatrix(
        data,
        row_labels=rows,
        col_labels=cols,
        structure=structure,
        allow_repeats=len(set(rows)) != len(rows) or len(set(cols)) != len(cols),
    )


def bandwidths_of(m, tol=DEFAULT_TOL) -> Bandwidths:
    """Bandwidths of a square matrix from its nonzero pattern."""
    if isinstance(m, ComplexMatrix):
        mask = m.nonzero_mask(tol)
    else:
        mask = np.abs(_as_array(m)) > tol
    if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
        raise SizeMismatchError(f"bandwidths need a square matrix, got shape {mask.shape}")
    return bandwidths_of_mask(mask)


def bandwidths_of_mask(mask) -> Bandwidths:
    mask = np.asarray(mask, dtype=bool)
    i, j = np.nonzero(mask)
    if i.size == 0:
        return Bandwidths(0, 0, 0)
    lower = int(max(0, np.max(i - j)))
    upper = int(max(0, np.max(j - i)))
    width = int(max(mask.sum(axis=0).max(), mask.sum(axis=1).max()))
    return Bandwidths(lower, upper, width)


def factorial_product(counts) -> int:
    return math.prod(math.factorial(int(c)) for c in counts)
