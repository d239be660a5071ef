"""Simplicial complexes, filtrations and cochain algebra.

Simplices are tuples of strictly increasing vertex ids; the ascending order
fixes the orientation and every coboundary sign is derived from it.
"""

import itertools

import numpy as np
import scipy.sparse as sp

from .errors import InputError

COCHAIN_PRUNE_TOL = 1e-12


def as_simplex(vertices):
    """Canonicalize a vertex iterable into a simplex tuple (strictly ascending)."""
    s = tuple(int(v) for v in vertices)
    if len(s) == 0:
        raise InputError("a simplex needs at least one vertex")
    if any(a >= b for a, b in zip(s, s[1:])):
        raise InputError(f"vertices must be strictly ascending, got {s}")
    return s


def facets(simplex):
    """All codimension-1 faces, paired with the sign (-1)^i of the omitted vertex."""
    if len(simplex) == 1:
        return []
    return [
        (simplex[:i] + simplex[i + 1 :], -1 if i % 2 else 1)
        for i in range(len(simplex))
    ]


class Cochain:
    """Sparse real-valued function on the k-simplices of a complex."""

    __slots__ = ("degree", "coeffs")

    def __init__(self, degree, coeffs=None, prune=True):
        self.degree = int(degree)
        self.coeffs = {}
        if coeffs:
            for s, v in coeffs.items():
                if len(s) - 1 != self.degree:
                    raise InputError(
                        f"simplex {s} has dimension {len(s) - 1}, expected {self.degree}"
                    )
                v = float(v)
                if not prune or abs(v) > COCHAIN_PRUNE_TOL:
                    self.coeffs[s] = v

    def __getitem__(self, simplex):
        return self.coeffs.get(simplex, 0.0)

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs.items())

    def __add__(self, other):
        out = dict(self.coeffs)
        for s, v in other.coeffs.items():
            out[s] = out.get(s, 0.0) + v
        return Cochain(self.degree, out)

    def __sub__(self, other):
        out = dict(self.coeffs)
        for s, v in other.coeffs.items():
            out[s] = out.get(s, 0.0) - v
        return Cochain(self.degree, out)

    def scale(self, c):
        return Cochain(self.degree, {s: c * v for s, v in self.coeffs.items()})

    def norm1(self):
        return sum(abs(v) for v in self.coeffs.values())

    def norm2(self):
        return np.sqrt(sum(v * v for v in self.coeffs.values()))

    def norminf(self):
        return max((abs(v) for v in self.coeffs.values()), default=0.0)

    def dot(self, other):
        small, big = self.coeffs, other.coeffs
        if len(big) < len(small):
            small, big = big, small
        return sum(v * big.get(s, 0.0) for s, v in small.items())

    def to_vector(self, simplices):
        vec = np.zeros(len(simplices))
        for i, s in enumerate(simplices):
            v = self.coeffs.get(s)
            if v is not None:
                vec[i] = v
        return vec

    @classmethod
    def from_vector(cls, degree, simplices, vec, prune=True):
        return cls(degree, dict(zip(simplices, vec)), prune=prune)

    def __repr__(self):
        return f"Cochain(degree={self.degree}, support={len(self.coeffs)})"


class FilteredComplex:
    """A finite simplicial complex with real filtration values.

    Simplices are kept in the total order (value asc, dimension asc, vertices
    lex). Monotonicity makes every sublevel set a prefix of that order, so a
    snapshot is just a prefix length.
    """

    def __init__(self, simplices, vertex_count=None):
        items = [(as_simplex(s), float(f)) for s, f in simplices]
        if not items:
            raise InputError("empty complex")
        items.sort(key=lambda p: (p[1], len(p[0]), p[0]))
        self.simplices = [s for s, _ in items]
        self.values = np.array([f for _, f in items], dtype=np.float64)
        if not np.all(np.isfinite(self.values)):
            raise InputError("non-finite filtration value")
        self.dims = np.array([len(s) - 1 for s in self.simplices], dtype=np.int32)
        self.index = {s: i for i, s in enumerate(self.simplices)}
        if len(self.index) != len(self.simplices):
            raise InputError("duplicate simplex in filtration")
        max_vertex = max(s[-1] for s in self.simplices)
        self.vertex_count = int(vertex_count) if vertex_count else max_vertex + 1
        if self.vertex_count <= max_vertex:
            raise InputError("vertex_count smaller than largest vertex id")
        self._validate()
        self._facet_cache = None

    def _validate(self):
        for s, f in zip(self.simplices, self.values):
            for face, _ in facets(s):
                j = self.index.get(face)
                if j is None:
                    raise InputError(f"face {face} of {s} missing: not closed under faces")
                if self.values[j] > f:
                    raise InputError(
                        f"filtration not monotone: f{face}={self.values[j]} > f{s}={f}"
                    )

    def __len__(self):
        return len(self.simplices)

    @property
    def max_value(self):
        return float(self.values[-1])

    @property
    def min_value(self):
        return float(self.values[0])

    def value_of(self, simplex):
        i = self.index.get(simplex)
        if i is None:
            raise InputError(f"simplex {simplex} not in complex")
        return float(self.values[i])

    def prefix_size(self, t):
        """Number of simplices with value <= t (closed sublevel convention)."""
        return int(np.searchsorted(self.values, t, side="right"))

    def snapshot(self, t):
        return Snapshot(self, t)

    def facet_arrays(self):
        """Flattened facet indices/signs per simplex, for the reduction kernel."""
        if self._facet_cache is None:
            offsets = np.zeros(len(self.simplices) + 1, dtype=np.int64)
            idx, sgn = [], []
            for i, s in enumerate(self.simplices):
                for face, sign in facets(s):
                    idx.append(self.index[face])
                    sgn.append(sign)
                offsets[i + 1] = len(idx)
            self._facet_cache = (
                np.array(idx, dtype=np.int64),
                np.array(sgn, dtype=np.int64),
                offsets,
            )
        return self._facet_cache

    def to_json_obj(self):
        return [
            {"vertices": list(s), "f": float(f)}
            for s, f in zip(self.simplices, self.values)
        ]

    def __repr__(self):
        return f"FilteredComplex({len(self)} simplices, {self.vertex_count} vertices)"


class Snapshot:
    """The closed sublevel set {simplex : f(simplex) <= t}, as a prefix."""

    __slots__ = ("parent", "threshold", "size")

    def __init__(self, parent, threshold):
        self.parent = parent
        self.threshold = float(threshold)
        self.size = parent.prefix_size(threshold)
        # face closure follows from monotonicity of the parent; cheap sanity check
        assert self.size == 0 or parent.dims[self.size - 1] >= 0

    def __len__(self):
        return self.size

    def contains(self, simplex):
        i = self.parent.index.get(simplex)
        return i is not None and i < self.size

    def simplex_indices(self, degree):
        """Parent indices of the degree-k simplices in this snapshot."""
        dims = self.parent.dims[: self.size]
        return np.flatnonzero(dims == degree)

    def simplices_of_degree(self, degree):
        return [self.parent.simplices[i] for i in self.simplex_indices(degree)]

    def is_subcomplex_of(self, other):
        return self.parent is other.parent and self.size <= other.size

    def __repr__(self):
        return f"Snapshot(t={self.threshold}, {self.size}/{len(self.parent)} simplices)"


class CoboundaryOperator:
    """Sparse matrix of the coboundary C^k -> C^{k+1} on a snapshot."""

    def __init__(self, matrix, cols, rows, degree):
        self.matrix = matrix  # csr, shape (len(rows), len(cols)), entries in {-1,0,1}
        self.cols = cols  # k-simplices
        self.rows = rows  # (k+1)-simplices
        self.degree = degree

    def apply(self, cochain):
        vec = cochain.to_vector(self.cols)
        return Cochain.from_vector(self.degree + 1, self.rows, self.matrix @ vec)


def coboundary(snap, k):
    """Coboundary operator of a snapshot in degree k."""
    cols = snap.simplices_of_degree(k)
    rows = snap.simplices_of_degree(k + 1)
    col_index = {s: j for j, s in enumerate(cols)}
    data, ri, ci = [], [], []
    for i, s in enumerate(rows):
        for face, sign in facets(s):
            data.append(sign)
            ri.append(i)
            ci.append(col_index[face])
    mat = sp.csr_matrix(
        (data, (ri, ci)), shape=(len(rows), len(cols)), dtype=np.float64
    )
    return CoboundaryOperator(mat, cols, rows, k)


def restrict(cochain, to):
    """Drop coefficients on simplices outside the target snapshot."""
    out = {}
    for s, v in cochain.coeffs.items():
        i = to.parent.index.get(s)
        if i is None:
            raise InputError(f"simplex {s} not in the snapshot's parent complex")
        if i < to.size:
            out[s] = v
    return Cochain(cochain.degree, out, prune=False)


def extend_by_zero(cochain, into):
    """View a cochain on a subcomplex as a cochain on a larger snapshot."""
    for s in cochain.coeffs:
        if not into.contains(s):
            raise InputError(f"simplex {s} not present at threshold {into.threshold}")
    return Cochain(cochain.degree, dict(cochain.coeffs), prune=False)


# ---------------------------------------------------------------------------
# builders


def _distance_matrix(points, metric, weights=None):
    diffs = points[:, None, :] - points[None, :, :]
    if metric == "euclidean":
        return np.sqrt((diffs**2).sum(axis=2))
    if metric == "l1":
        return np.abs(diffs).sum(axis=2)
    if metric == "weighted-l1":
        if weights is None:
            raise InputError("weighted-l1 metric needs per-coordinate weights")
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (points.shape[1],):
            raise InputError("weight vector length must match point dimension")
        return (np.abs(diffs) * w[None, None, :]).sum(axis=2)
    raise InputError(f"unknown metric {metric!r}")


def vr_from_distances(dists, max_dim=2, max_radius=None):
    """Vietoris-Rips filtration from a symmetric distance matrix.

    Cliques of the <=max_radius neighborhood graph, with f = diameter.
    """
    n = dists.shape[0]
    if max_radius is None:
        max_radius = float(dists.max()) if n > 1 else 1.0
    if max_radius <= 0:
        raise InputError("max_radius must be positive")
    simplices = [((i,), 0.0) for i in range(n)]
    if max_dim >= 1 and n > 1:
        adj = (dists <= max_radius) & ~np.eye(n, dtype=bool)
        ii, jj = np.nonzero(np.triu(adj))
        edges = list(zip(ii.tolist(), jj.tolist()))
        simplices.extend(((i, j), float(dists[i, j])) for i, j in edges)
        cliques = edges
        for dim in range(2, max_dim + 1):
            nxt = []
            for c in cliques:
                # common neighbors above the largest vertex keep enumeration canonical
                common = np.flatnonzero(np.all(adj[list(c)], axis=0))
                for k in common[common > c[-1]]:
                    s = c + (int(k),)
                    f = max(float(dists[a, b]) for a, b in itertools.combinations(s, 2))
                    simplices.append((s, f))
                    nxt.append(s)
            cliques = nxt
            if not cliques:
                break
    return FilteredComplex(simplices, vertex_count=n)


def build_vr(points, metric="euclidean", max_dim=2, max_radius=None, weights=None):
    """Vietoris-Rips filtration of a point cloud; f(simplex) = diameter."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[0] < 1:
        raise InputError("need at least one point")
    if not np.all(np.isfinite(points)):
        raise InputError("non-finite coordinates in point cloud")
    if max_dim < 0:
        raise InputError("max_dim must be >= 0")
    dists = _distance_matrix(points, metric, weights)
    return vr_from_distances(dists, max_dim=max_dim, max_radius=max_radius)


def build_lower_star(complex_simplices, vertex_values):
    """Lower-star filtration: f(simplex) = max vertex value."""
    values = dict(vertex_values) if not isinstance(vertex_values, dict) else vertex_values
    out = []
    for s in complex_simplices:
        s = as_simplex(s)
        try:
            f = max(values[v] for v in s)
        except KeyError as e:
            raise InputError(f"missing vertex value for vertex {e.args[0]}") from None
        out.append((s, float(f)))
    return FilteredComplex(out)


def triangulate_grid(rows, cols):
    """Triangulated rows x cols grid; each cell split along the down-right diagonal.

    Vertex ids are row-major. Returns the face-closed simplex list.
    """
    if rows < 1 or cols < 1:
        raise InputError("grid needs rows, cols >= 1")

    def vid(r, c):
        return r * cols + c

    simplices = [(vid(r, c),) for r in range(rows) for c in range(cols)]
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                simplices.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < rows:
                simplices.append((vid(r, c), vid(r + 1, c)))
            if r + 1 < rows and c + 1 < cols:
                simplices.append((vid(r, c), vid(r + 1, c + 1)))
                simplices.append(tuple(sorted((vid(r, c), vid(r, c + 1), vid(r + 1, c + 1)))))
                simplices.append(tuple(sorted((vid(r, c), vid(r + 1, c), vid(r + 1, c + 1)))))
    return simplices
