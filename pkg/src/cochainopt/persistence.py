"""Persistent cohomology: barcode, birth/death simplices, representative cocycles."""

import json
import math
import os
from dataclasses import dataclass, field

from . import _reduction_py
from .complexes import Cochain, restrict
from .errors import InputError, PreconditionError

# Backend selection: compiled kernel when available, pure Python otherwise.
# COCHAINOPT_PURE=1 forces the pure backend (useful for cross-checking).
if os.environ.get("COCHAINOPT_PURE"):
    _reduction_c = None
else:
    try:
        from . import _reduction as _reduction_c
    except ImportError:
        _reduction_c = None

BACKEND = "compiled" if _reduction_c is not None else "pure"

# number of reductions run so far; used to assert persistence-call budgets
REDUCTION_CALLS = 0


def reduction_backend():
    return BACKEND


@dataclass
class Bar:
    """A persistence interval [birth, death) with its witnesses.

    The representative is an integer-valued cocycle on the sublevel set just
    before death (the whole complex for essential bars); restricting it to any
    threshold in [birth, death) represents the class there.
    """

    degree: int
    birth: float
    death: float
    birth_simplex: tuple
    death_simplex: tuple | None
    representative: Cochain
    birth_index: int
    death_index: int | None
    fc: object = field(repr=False)

    @property
    def persistence(self):
        return self.death - self.birth

    @property
    def finite(self):
        return math.isfinite(self.death)

    def sort_key(self):
        return (self.degree, self.birth, self.death, self.birth_simplex)


class Barcode:
    """All bars of a filtration, grouped by degree."""

    def __init__(self, bars, fc, max_degree):
        self.bars = sorted(bars, key=Bar.sort_key)
        self.fc = fc
        self.max_degree = max_degree

    def __len__(self):
        return len(self.bars)

    def __iter__(self):
        return iter(self.bars)

    def in_degree(self, degree):
        return [b for b in self.bars if b.degree == degree]

    def to_csv_rows(self):
        rows = []
        for b in self.bars:
            rows.append(
                (
                    b.degree,
                    b.birth,
                    b.death,
                    "|".join(map(str, b.birth_simplex)),
                    "|".join(map(str, b.death_simplex)) if b.death_simplex else "",
                )
            )
        return rows

    def to_json_obj(self, representatives=True):
        out = []
        for b in self.bars:
            rec = {
                "degree": b.degree,
                "birth": b.birth,
                "death": None if not b.finite else b.death,
                "birth_simplex": list(b.birth_simplex),
                "death_simplex": list(b.death_simplex) if b.death_simplex else None,
            }
            if representatives:
                rec["representative"] = [
                    {"simplex": list(s), "value": v} for s, v in sorted(b.representative)
                ]
            out.append(rec)
        return out

    def to_json(self, **kw):
        return json.dumps(self.to_json_obj(**kw), indent=2)


def compute_persistence(fc, max_degree):
    """Barcode of a filtration up to the given degree, with representatives.

    Column reduction of the coboundary in filtration order; pivots are exact
    rationals so the pairing is drift-free. Zero-length pairs are dropped.
    """
    global REDUCTION_CALLS
    REDUCTION_CALLS += 1
    if max_degree < 0:
        raise InputError("max_degree must be >= 0")
    facet_idx, facet_sgn, facet_off = fc.facet_arrays()
    n = len(fc)
    args = (n, fc.dims, facet_idx, facet_sgn, facet_off, max_degree)
    if _reduction_c is not None:
        try:
            pairs, essential = _reduction_c.reduce_filtration(*args)
        except OverflowError:
            pairs, essential = _reduction_py.reduce_filtration(*args)
    else:
        pairs, essential = _reduction_py.reduce_filtration(*args)

    bars = []
    for bi, di, sidx, svals in pairs:
        if fc.values[bi] == fc.values[di]:
            continue
        degree = int(fc.dims[bi])
        rep = Cochain(
            degree,
            {fc.simplices[i]: float(v) for i, v in zip(sidx, svals)},
            prune=False,
        )
        bars.append(
            Bar(
                degree=degree,
                birth=float(fc.values[bi]),
                death=float(fc.values[di]),
                birth_simplex=fc.simplices[bi],
                death_simplex=fc.simplices[di],
                representative=rep,
                birth_index=bi,
                death_index=di,
                fc=fc,
            )
        )
    for bi, sidx, svals in essential:
        degree = int(fc.dims[bi])
        rep = Cochain(
            degree,
            {fc.simplices[i]: float(v) for i, v in zip(sidx, svals)},
            prune=False,
        )
        bars.append(
            Bar(
                degree=degree,
                birth=float(fc.values[bi]),
                death=math.inf,
                birth_simplex=fc.simplices[bi],
                death_simplex=None,
                representative=rep,
                birth_index=bi,
                death_index=None,
                fc=fc,
            )
        )
    return Barcode(bars, fc, max_degree)


def representative_at(bar, t):
    """Cocycle representing the bar's class on the sublevel set at t."""
    if not (bar.birth <= t < bar.death):
        raise PreconditionError(
            f"t={t} outside the bar [{bar.birth}, {bar.death})"
        )
    return restrict(bar.representative, bar.fc.snapshot(t))


def select_bar(barcode, degree, policy="longest"):
    """Pick bar(s) from one degree; ties broken deterministically.

    Order: persistence descending, then birth ascending, then lexicographic
    birth simplex. Policies: "longest" (most persistent finite bar),
    ("index", i), "all-finite".
    """
    finite = [b for b in barcode.in_degree(degree) if b.finite]
    finite.sort(key=lambda b: (-b.persistence, b.birth, b.birth_simplex))
    if policy == "longest":
        return finite[0] if finite else None
    if policy == "all-finite":
        return finite
    if isinstance(policy, tuple) and policy[0] == "index":
        i = policy[1]
        return finite[i] if i < len(finite) else None
    raise InputError(f"unknown bar policy {policy!r}")
