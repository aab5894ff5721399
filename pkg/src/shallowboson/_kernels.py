"""Numba kernels for the exponential inner loops.

Everything here works on plain contiguous ``complex128`` / ``int64`` arrays;
the public wrappers in :mod:`shallowboson.linalg` and
:mod:`shallowboson.cp_permanent` do the shape checking.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def _trailing_zeros(k):
    i = 0
    while (k & 1) == 0:
        k >>= 1
        i += 1
    return i


@numba.njit(cache=True)
def glynn_gray(a):
    """Glynn's formula summed in reflected-binary Gray-code order.

    The sign vector delta has delta[0] = +1 fixed; step k flips the row given
    by the lowest set bit of k, so the running column sums update in O(n).
    """
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    colsum = np.empty(n, dtype=np.complex128)
    for j in range(n):
        s = 0.0 + 0.0j
        for i in range(n):
            s += a[i, j]
        colsum[j] = s
    delta = np.ones(n, dtype=np.float64)
    prod = 1.0 + 0.0j
    for j in range(n):
        prod *= colsum[j]
    total = prod
    sign = 1.0
    for k in range(1, 1 << (n - 1)):
        row = _trailing_zeros(k) + 1
        delta[row] = -delta[row]
        f = 2.0 * delta[row]
        prod = 1.0 + 0.0j
        for j in range(n):
            colsum[j] += f * a[row, j]
            prod *= colsum[j]
        sign = -sign
        total += sign * prod
    return total / (1 << (n - 1))


@numba.njit(cache=True)
def subpermanents_gray(w):
    """All column-deleted permanents of a (k-1) x k matrix in one sweep.

    Uses Glynn's formula for every (k-1) x (k-1) minor simultaneously: the
    column sums are shared, and the product over all columns except j is
    taken from prefix/suffix products, so each Gray-code step costs O(k).
    """
    r = w.shape[0]
    k = w.shape[1]
    out = np.zeros(k, dtype=np.complex128)
    if r == 0:
        out[0] = 1.0
        return out
    colsum = np.empty(k, dtype=np.complex128)
    for j in range(k):
        s = 0.0 + 0.0j
        for i in range(r):
            s += w[i, j]
        colsum[j] = s
    delta = np.ones(r, dtype=np.float64)
    prefix = np.empty(k + 1, dtype=np.complex128)
    suffix = np.empty(k + 1, dtype=np.complex128)
    sign = 1.0
    for step in range(1 << (r - 1)):
        if step > 0:
            row = _trailing_zeros(step) + 1
            delta[row] = -delta[row]
            f = 2.0 * delta[row]
            for j in range(k):
                colsum[j] += f * w[row, j]
            sign = -sign
        prefix[0] = 1.0
        for j in range(k):
            prefix[j + 1] = prefix[j] * colsum[j]
        suffix[k] = 1.0
        for j in range(k - 1, -1, -1):
            suffix[j] = suffix[j + 1] * colsum[j]
        for j in range(k):
            out[j] += sign * prefix[j] * suffix[j + 1]
    scale = 1.0 / (1 << (r - 1))
    for j in range(k):
        out[j] *= scale
    return out


@numba.njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@numba.njit(cache=True)
def local_permanents(block):
    """Permanents of every (row subset, column subset) of ``block``.

    The result is indexed by ``row_mask | (col_mask << n_rows)``. Entries are
    filled in increasing mask order, expanding along the lowest row, so every
    smaller minor is already available. Non-square selections stay 0.
    """
    nr = block.shape[0]
    nc = block.shape[1]
    size = 1 << (nr + nc)
    out = np.zeros(size, dtype=np.complex128)
    out[0] = 1.0
    row_full = (1 << nr) - 1
    for mask in range(1, size):
        rm = mask & row_full
        cm = mask >> nr
        if rm == 0 or _popcount(rm) != _popcount(cm):
            continue
        r = _trailing_zeros(rm)
        rest = rm ^ (1 << r)
        s = 0.0 + 0.0j
        c = 0
        cc = cm
        while cc:
            if cc & 1:
                s += block[r, c] * out[rest | ((cm ^ (1 << c)) << nr)]
            cc >>= 1
            c += 1
        out[mask] = s
    return out


@numba.njit(cache=True)
def subset_convolve(a, b):
    """Naive subset convolution: out[S] = sum over T subset of S of a[T] b[S\\T]."""
    size = a.shape[0]
    out = np.zeros(size, dtype=np.complex128)
    for mask in range(size):
        s = mask
        acc = 0.0 + 0.0j
        while True:
            acc += a[s] * b[mask ^ s]
            if s == 0:
                break
            s = (s - 1) & mask
        out[mask] = acc
    return out


@numba.njit(cache=True)
def gather(values, index):
    out = np.empty(index.shape[0], dtype=np.complex128)
    for i in range(index.shape[0]):
        out[i] = values[index[i]]
    return out


@numba.njit(cache=True)
def subset_convolve_ranked(a, b, nbits):
    """Subset convolution through ranked zeta and Moebius transforms, O(n^2 2^n)."""
    size = 1 << nbits
    fa = np.zeros((nbits + 1, size), dtype=np.complex128)
    fb = np.zeros((nbits + 1, size), dtype=np.complex128)
    for s in range(size):
        r = _popcount(s)
        fa[r, s] = a[s]
        fb[r, s] = b[s]
    for i in range(nbits):
        bit = 1 << i
        for s in range(size):
            if s & bit:
                for r in range(nbits + 1):
                    fa[r, s] += fa[r, s ^ bit]
                    fb[r, s] += fb[r, s ^ bit]
    h = np.zeros((nbits + 1, size), dtype=np.complex128)
    for s in range(size):
        for r in range(nbits + 1):
            acc = 0.0 + 0.0j
            for i in range(r + 1):
                acc += fa[i, s] * fb[r - i, s]
            h[r, s] = acc
    for i in range(nbits):
        bit = 1 << i
        for s in range(size):
            if s & bit:
                for r in range(nbits + 1):
                    h[r, s] -= h[r, s ^ bit]
    out = np.empty(size, dtype=np.complex128)
    for s in range(size):
        out[s] = h[_popcount(s), s]
    return out


@numba.njit(cache=True)
def subset_index(pos, extra):
    """Index of every subset of the bits at ``pos`` (in that order), OR-ed with ``extra``."""
    nb = pos.shape[0]
    out = np.empty(1 << nb, dtype=np.int64)
    out[0] = extra
    for b in range(nb):
        bit = np.int64(1) << pos[b]
        half = 1 << b
        for s in range(half):
            out[half + s] = out[s] | bit
    return out


@numba.njit(cache=True)
def scatter_add_convolve(p, f_small, index, method_ranked, nbits):
    """Convolve ``p`` with ``f_small`` embedded at ``index`` in p's subset space."""
    f = np.zeros(p.shape[0], dtype=np.complex128)
    for s in range(index.shape[0]):
        f[index[s]] = f_small[s]
    if method_ranked:
        return subset_convolve_ranked(p, f, nbits)
    return subset_convolve(p, f)


@numba.njit(cache=True)
def row_signs(n_rows, nbits):
    """``(-1)^{number of row bits}`` for every mask over ``nbits`` bits, rows lowest."""
    size = 1 << nbits
    out = np.empty(size, dtype=np.float64)
    row_full = (1 << n_rows) - 1
    for s in range(size):
        out[s] = -1.0 if _popcount(s & row_full) & 1 else 1.0
    return out


@numba.njit(cache=True)
def extension_weights(prefix_block, cand_block):
    """``|per|^2`` of ``prefix_block`` with each row of ``cand_block`` appended last."""
    k = cand_block.shape[1]
    m = cand_block.shape[0]
    a = np.empty((k, k), dtype=np.complex128)
    for i in range(k - 1):
        for j in range(k):
            a[i, j] = prefix_block[i, j]
    out = np.empty(m, dtype=np.float64)
    for r in range(m):
        for j in range(k):
            a[k - 1, j] = cand_block[r, j]
        v = glynn_gray(a)
        out[r] = v.real * v.real + v.imag * v.imag
    return out


@numba.njit(cache=True)
def child_combine(p, q, lam_q_pos, lam_c_pos, n_lam_rows, pc, extra, ranked, nbits):
    """Fold one child into a parent's partial P table.

    Over the subsets S of the shared labels this forms the sign-twisted
    parent entries ``(-1)^{|rows of S|} q(S)`` and the child entries
    ``pc(S + child-only labels)``, convolves them, embeds the result in the
    parent's index space and convolves it into ``p``.
    """
    nl = lam_q_pos.shape[0]
    qidx = subset_index(lam_q_pos, np.int64(0))
    cidx = subset_index(lam_c_pos, np.int64(extra))
    signs = row_signs(n_lam_rows, nl)
    lsize = 1 << nl
    qp = np.empty(lsize, dtype=np.complex128)
    qpp = np.empty(lsize, dtype=np.complex128)
    for s in range(lsize):
        qp[s] = signs[s] * q[qidx[s]]
        qpp[s] = pc[cidx[s]]
    if ranked:
        f = subset_convolve_ranked(qp, qpp, nl)
    else:
        f = subset_convolve(qp, qpp)
    return scatter_add_convolve(p, f, qidx, ranked, nbits)
