# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled persistent cohomology reduction kernel.

Same algorithm as ``_reduction_py`` but with int64 rational arithmetic on
flat arrays. Every multiplication is guarded; an OverflowError tells the
caller to rerun with the arbitrary-precision pure backend.
"""

import numpy as np

from libc.stdint cimport int64_t

cdef int64_t LIMIT = (<int64_t>1) << 59


cdef inline int64_t c_gcd(int64_t a, int64_t b) noexcept:
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    cdef int64_t t
    while b:
        t = a % b
        a = b
        b = t
    return a


cdef inline int64_t checked_mul(int64_t a, int64_t b) except? -1:
    cdef int64_t aa, bb
    if a == 0 or b == 0:
        return 0
    aa = a if a > 0 else -a
    bb = b if b > 0 else -b
    if aa > LIMIT // bb:
        raise OverflowError("int64 rational overflow in reduction")
    return a * b


cdef struct Rat:
    int64_t num
    int64_t den


cdef inline Rat r_norm(int64_t n, int64_t d) except *:
    cdef Rat r
    cdef int64_t g
    if d < 0:
        n = -n
        d = -d
    g = c_gcd(n, d)
    if g > 1:
        n //= g
        d //= g
    if n > LIMIT or -n > LIMIT or d > LIMIT:
        raise OverflowError("int64 rational overflow in reduction")
    r.num = n
    r.den = d
    return r


cdef inline Rat r_add(Rat a, Rat b) except *:
    cdef int64_t g = c_gcd(a.den, b.den)
    cdef int64_t da = a.den // g
    cdef int64_t db = b.den // g
    cdef int64_t n = checked_mul(a.num, db) + checked_mul(b.num, da)
    cdef int64_t d = checked_mul(a.den, db)
    return r_norm(n, d)


cdef inline Rat r_mul(Rat a, Rat b) except *:
    cdef int64_t n = checked_mul(a.num, b.num)
    cdef int64_t d = checked_mul(a.den, b.den)
    return r_norm(n, d)


cdef inline Rat r_div(Rat a, Rat b) except *:
    cdef Rat inv
    inv.num = b.den
    inv.den = b.num
    if inv.den < 0:
        inv.num = -inv.num
        inv.den = -inv.den
    return r_mul(a, inv)


cdef inline Py_ssize_t bsearch(int64_t[:] arr, int64_t key) noexcept:
    cdef Py_ssize_t lo = 0, hi = arr.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    if lo < arr.shape[0] and arr[lo] == key:
        return lo
    return -1


def _rescale(int64_t[:] idx, int64_t[:] num, int64_t[:] den):
    cdef Py_ssize_t m = idx.shape[0], i
    cdef int64_t lcm = 1, g, v
    for i in range(m):
        g = c_gcd(lcm, den[i])
        lcm = checked_mul(lcm // g, den[i])
    vals = np.empty(m, dtype=np.int64)
    cdef int64_t[:] vv = vals
    g = 0
    for i in range(m):
        v = checked_mul(num[i], lcm // den[i])
        vv[i] = v
        g = c_gcd(g, v)
    if g > 1:
        for i in range(m):
            vv[i] //= g
    return [int(idx[i]) for i in range(m)], [int(vv[i]) for i in range(m)]


def reduce_filtration(Py_ssize_t n, dims_in, facet_idx_in, facet_sgn_in, facet_off_in,
                      Py_ssize_t max_degree):
    """Identical contract to _reduction_py.reduce_filtration."""
    cdef int64_t[:] dims = np.ascontiguousarray(dims_in, dtype=np.int64)
    cdef int64_t[:] fidx = np.ascontiguousarray(facet_idx_in, dtype=np.int64)
    cdef int64_t[:] fsgn = np.ascontiguousarray(facet_sgn_in, dtype=np.int64)
    cdef int64_t[:] foff = np.ascontiguousarray(facet_off_in, dtype=np.int64)

    # slot-addressed columns; live_by_deg buckets the live slots by degree
    idx_arrs, num_arrs, den_arrs = [], [], []
    births = []
    live_by_deg = [[] for _ in range(max_degree + 1)]
    pairs = []

    cdef Py_ssize_t j, p, c, pos, ia, ib, m, cap, slot, young
    cdef int64_t k1, tau
    cdef Rat acc, q, term, nv
    cdef int64_t[:] ci, cn, cd, yi, yn, yd, vni, vnn, vnd

    eval_slots = []
    eval_vals = []

    for j in range(n):
        k1 = dims[j]
        if k1 > max_degree + 1:
            continue
        eval_slots.clear()
        eval_vals.clear()
        if k1 > 0:
            for c in live_by_deg[k1 - 1]:
                ci = idx_arrs[c]
                cn = num_arrs[c]
                cd = den_arrs[c]
                acc.num = 0
                acc.den = 1
                for p in range(foff[j], foff[j + 1]):
                    tau = fidx[p]
                    pos = bsearch(ci, tau)
                    if pos >= 0:
                        term.num = cn[pos] if fsgn[p] > 0 else -cn[pos]
                        term.den = cd[pos]
                        acc = r_add(acc, term)
                if acc.num != 0:
                    eval_slots.append(c)
                    eval_vals.append((acc.num, acc.den))

        if not eval_slots:
            if k1 <= max_degree:
                slot = len(idx_arrs)
                idx_arrs.append(np.array([j], dtype=np.int64))
                num_arrs.append(np.array([1], dtype=np.int64))
                den_arrs.append(np.array([1], dtype=np.int64))
                births.append(j)
                live_by_deg[k1].append(slot)
            continue

        # youngest (largest birth) cocycle with nonzero evaluation dies
        young = eval_slots[0]
        for c in eval_slots:
            if births[c] > births[young]:
                young = c
        eval_map = dict(zip(eval_slots, eval_vals))
        ey = eval_map[young]
        term.num = ey[0]
        term.den = ey[1]
        yi = idx_arrs[young]
        yn = num_arrs[young]
        yd = den_arrs[young]

        for c in sorted(eval_slots):
            if c == young:
                continue
            ec = eval_map[c]
            acc.num = ec[0]
            acc.den = ec[1]
            q = r_div(acc, term)  # correction coefficient e_c / e_y
            ci = idx_arrs[c]
            cn = num_arrs[c]
            cd = den_arrs[c]
            cap = ci.shape[0] + yi.shape[0]
            nidx = np.empty(cap, dtype=np.int64)
            nnum = np.empty(cap, dtype=np.int64)
            nden = np.empty(cap, dtype=np.int64)
            vni = nidx
            vnn = nnum
            vnd = nden
            ia = 0
            ib = 0
            m = 0
            while ia < ci.shape[0] or ib < yi.shape[0]:
                if ib >= yi.shape[0] or (ia < ci.shape[0] and ci[ia] < yi[ib]):
                    vni[m] = ci[ia]
                    vnn[m] = cn[ia]
                    vnd[m] = cd[ia]
                    ia += 1
                    m += 1
                elif ia >= ci.shape[0] or yi[ib] < ci[ia]:
                    nv.num = yn[ib]
                    nv.den = yd[ib]
                    nv = r_mul(q, nv)
                    if nv.num != 0:
                        vni[m] = yi[ib]
                        vnn[m] = -nv.num
                        vnd[m] = nv.den
                        m += 1
                    ib += 1
                else:
                    nv.num = -yn[ib]
                    nv.den = yd[ib]
                    nv = r_mul(q, nv)
                    acc.num = cn[ia]
                    acc.den = cd[ia]
                    nv = r_add(acc, nv)
                    if nv.num != 0:
                        vni[m] = ci[ia]
                        vnn[m] = nv.num
                        vnd[m] = nv.den
                        m += 1
                    ia += 1
                    ib += 1
            idx_arrs[c] = nidx[:m].copy()
            num_arrs[c] = nnum[:m].copy()
            den_arrs[c] = nden[:m].copy()

        sidx, svals = _rescale(yi, yn, yd)
        pairs.append((births[young], j, sidx, svals))
        live_by_deg[k1 - 1].remove(young)
        idx_arrs[young] = None
        num_arrs[young] = None
        den_arrs[young] = None

    essential = []
    alive = sorted(
        (slot for bucket in live_by_deg for slot in bucket), key=lambda s: births[s]
    )
    for slot in alive:
        sidx, svals = _rescale(idx_arrs[slot], num_arrs[slot], den_arrs[slot])
        essential.append((births[slot], sidx, svals))
    return pairs, essential
