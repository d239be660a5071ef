"""Brute-force barcode oracle via exact ranks of inclusion-induced maps.

Independent of the reduction: cohomology of every sublevel set is handled
with Fraction Gaussian elimination, and bar multiplicities come from the
inclusion-exclusion of persistent ranks. Only meant for small complexes.
"""

import math
from fractions import Fraction

from .complexes import facets


def exact_rank(rows):
    """Rank of a matrix given as a list of Fraction/int rows."""
    mat = [list(map(Fraction, r)) for r in rows]
    rank = 0
    ncols = len(mat[0]) if mat else 0
    col = 0
    while rank < len(mat) and col < ncols:
        piv = next((r for r in range(rank, len(mat)) if mat[r][col] != 0), None)
        if piv is None:
            col += 1
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pv = mat[rank][col]
        for r in range(rank + 1, len(mat)):
            if mat[r][col] != 0:
                q = mat[r][col] / pv
                mat[r] = [a - q * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
        col += 1
    return rank


def exact_nullspace(rows, ncols):
    """Basis of the kernel of a matrix (list of rows), as Fraction vectors."""
    mat = [list(map(Fraction, r)) for r in rows]
    pivots = []
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(mat)) if mat[r][col] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pv = mat[rank][col]
        mat[rank] = [a / pv for a in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][col] != 0:
                q = mat[r][col]
                mat[r] = [a - q * b for a, b in zip(mat[r], mat[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for r, pcol in enumerate(pivots):
            v[pcol] = -mat[r][fcol]
        basis.append(v)
    return basis


def _coboundary_rows(fc, size, k):
    """Coboundary matrix rows of the prefix subcomplex, plus column indices."""
    cols = [i for i in range(size) if fc.dims[i] == k]
    rows_idx = [i for i in range(size) if fc.dims[i] == k + 1]
    colpos = {i: p for p, i in enumerate(cols)}
    rows = []
    for i in rows_idx:
        row = [0] * len(cols)
        for face, sign in facets(fc.simplices[i]):
            row[colpos[fc.index[face]]] = sign
        rows.append(row)
    return rows, cols


def _persistent_rank(fc, size_i, size_j, k):
    """Rank of the restriction-induced map H^k(X_j) -> H^k(X_i), size_i <= size_j."""
    dk_j, cols_j = _coboundary_rows(fc, size_j, k)
    z_j = exact_nullspace(dk_j, len(cols_j))
    _, cols_i = _coboundary_rows(fc, size_i, k)
    colpos_i = {i: p for p, i in enumerate(cols_i)}
    # restrict each cocycle on X_j to the k-simplices of X_i
    restricted = []
    for v in z_j:
        r = [Fraction(0)] * len(cols_i)
        for p, idx in enumerate(cols_j):
            if idx in colpos_i:
                r[colpos_i[idx]] = v[p]
        restricted.append(r)
    # coboundaries on X_i
    if k == 0:
        cob = []
    else:
        dk1_i, cols_km1 = _coboundary_rows(fc, size_i, k - 1)
        # columns of delta^{k-1} are the coboundary generators
        cob = [list(col) for col in zip(*dk1_i)] if dk1_i else []
        cob = [c for c in cob]
    if not cols_i:
        return 0
    rank_b = exact_rank(cob) if cob else 0
    combined = restricted + cob
    rank_zb = exact_rank(combined) if combined else 0
    return rank_zb - rank_b


def brute_force_barcode(fc, max_degree):
    """Multiset of (degree, birth, death) via persistent-rank inclusion-exclusion."""
    thresholds = sorted(set(fc.values.tolist()))
    sizes = [fc.prefix_size(t) for t in thresholds]
    m = len(thresholds)
    bars = []
    for k in range(max_degree + 1):
        rank = {}
        for i in range(m):
            for j in range(i, m):
                rank[(i, j)] = _persistent_rank(fc, sizes[i], sizes[j], k)

        def r(i, j):
            if i < 0:
                return 0
            return rank[(i, j)]

        for i in range(m):
            for j in range(i + 1, m):
                mult = (r(i, j - 1) - r(i, j)) - (r(i - 1, j - 1) - r(i - 1, j))
                bars.extend([(k, thresholds[i], thresholds[j])] * mult)
            mult_inf = r(i, m - 1) - r(i - 1, m - 1)
            bars.extend([(k, thresholds[i], math.inf)] * mult_inf)
    return sorted(bars)


def barcode_multiset(barcode, max_degree=None):
    """The comparable (degree, birth, death) multiset of a computed barcode."""
    out = [
        (b.degree, b.birth, b.death)
        for b in barcode
        if max_degree is None or b.degree <= max_degree
    ]
    return sorted(out)


def h1_rank_at(fc, t):
    """dim H^1 of the sublevel set at t, by exact elimination."""
    size = fc.prefix_size(t)
    d1, cols1 = _coboundary_rows(fc, size, 1)
    d0, cols0 = _coboundary_rows(fc, size, 0)
    if not cols1:
        return 0
    z1 = len(cols1) - exact_rank(d1) if d1 else len(cols1)
    b1 = exact_rank(d0) if d0 else 0
    return z1 - b1
