"""Pure-Python persistent cohomology reduction over exact rationals.

Reference backend: processes simplices in filtration order, maintaining the
set of live cocycles. A new simplex either spawns a cocycle (all live
coboundary evaluations vanish) or kills the youngest cocycle with a nonzero
evaluation, correcting the others so they stay cocycles. Exact Fraction
arithmetic keeps pivot decisions drift-free; representatives are rescaled to
primitive integer vectors on output.
"""

from fractions import Fraction
from math import gcd


def _rescale(support):
    """Turn a {index: Fraction} map into sorted (indices, primitive int values)."""
    items = sorted(support.items())
    lcm = 1
    for _, v in items:
        d = v.denominator
        lcm = lcm // gcd(lcm, d) * d
    vals = [int(v * lcm) for _, v in items]
    g = 0
    for v in vals:
        g = gcd(g, abs(v))
    if g > 1:
        vals = [v // g for v in vals]
    return [i for i, _ in items], vals


def reduce_filtration(n, dims, facet_idx, facet_sgn, facet_off, max_degree):
    """Run the reduction; returns (pairs, essential).

    pairs: list of (birth_index, death_index, support_indices, int_values)
    essential: list of (birth_index, support_indices, int_values)
    """
    supports = {}  # cocycle id -> {simplex index: Fraction}
    births = {}  # cocycle id -> birth simplex index
    supporters = {}  # simplex index -> set of cocycle ids supporting it
    pairs = []

    for j in range(n):
        k1 = int(dims[j])
        if k1 > max_degree + 1:
            continue
        evals = {}
        for p in range(facet_off[j], facet_off[j + 1]):
            tau = int(facet_idx[p])
            sign = int(facet_sgn[p])
            for c in supporters.get(tau, ()):
                evals[c] = evals.get(c, Fraction(0)) + sign * supports[c][tau]
        evals = {c: e for c, e in evals.items() if e != 0}

        if not evals:
            if k1 <= max_degree:
                supports[j] = {j: Fraction(1)}
                births[j] = j
                supporters.setdefault(j, set()).add(j)
            continue

        young = max(evals, key=lambda c: births[c])
        e_y = evals[young]
        col_y = supports[young]
        for c, e_c in sorted(evals.items()):
            if c == young:
                continue
            q = e_c / e_y
            col = supports[c]
            for s, v in col_y.items():
                nv = col.get(s, Fraction(0)) - q * v
                if nv == 0:
                    if s in col:
                        del col[s]
                        supporters[s].discard(c)
                else:
                    if s not in col:
                        supporters.setdefault(s, set()).add(c)
                    col[s] = nv
        idxs, vals = _rescale(col_y)
        pairs.append((births[young], j, idxs, vals))
        for s in col_y:
            supporters[s].discard(young)
        del supports[young], births[young]

    essential = []
    for c in sorted(supports, key=lambda c: births[c]):
        idxs, vals = _rescale(supports[c])
        essential.append((births[c], idxs, vals))
    return pairs, essential
