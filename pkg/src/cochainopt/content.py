"""Birth/death content of a bar: filtration values averaged by cochain weights.

The window around a birth (or death) value is the pair of sublevel snapshots
at b -+ epsilon; the content is the weighted mean of filtration values over
the support of the window's birth (death) cochain, with l1-normalized
absolute coefficients as weights. Edge-relaxed variants replace a simplex
value with the mean over its edges that are new inside the window.
"""

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InternalConsistencyError, PreconditionError
from .persistence import representative_at
from .solvers import PairProblem, birth_cochain, death_cochain

GENERIC_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class EpsilonFrame:
    """A bar with a window half-width epsilon and the four threshold snapshots."""

    bar: object
    epsilon: float
    mode: str = "absolute"  # "absolute" or "relative"
    epsilon0: float | None = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise PreconditionError("epsilon must be positive")
        if self.bar.finite and self.epsilon >= self.bar.persistence:
            raise PreconditionError(
                f"epsilon={self.epsilon} must be smaller than the bar length "
                f"{self.bar.persistence}"
            )

    @property
    def fc(self):
        return self.bar.fc

    def thresholds(self):
        b, d, e = self.bar.birth, self.bar.death, self.epsilon
        out = [b - e, b + e]
        if self.bar.finite:
            out += [d - e, d + e]
        return out

    def birth_pair(self):
        b, e = self.bar.birth, self.epsilon
        return PairProblem(self.fc.snapshot(b - e), self.fc.snapshot(b + e), self.bar.degree)

    def death_pair(self):
        if not self.bar.finite:
            raise PreconditionError("death window undefined for an essential bar")
        d, e = self.bar.death, self.epsilon
        return PairProblem(self.fc.snapshot(d - e), self.fc.snapshot(d + e), self.bar.degree)


def make_frame(bar, epsilon0=None, epsilon=None):
    """Build a frame in relative (epsilon = epsilon0 * bar length) or absolute mode."""
    if (epsilon0 is None) == (epsilon is None):
        raise InputError("pass exactly one of epsilon0, epsilon")
    if epsilon0 is not None:
        if not bar.finite:
            raise PreconditionError("relative epsilon needs a finite bar")
        return EpsilonFrame(bar, epsilon0 * bar.persistence, "relative", epsilon0)
    return EpsilonFrame(bar, epsilon, "absolute")


def is_generic(frame):
    """True when no window threshold coincides with a filtration value."""
    values = frame.fc.values
    for t in frame.thresholds():
        i = np.searchsorted(values, t)
        for j in (i - 1, i):
            if 0 <= j < len(values) and abs(values[j] - t) <= GENERIC_TOL:
                return False
    return True


def _weights(cochain):
    n1 = cochain.norm1()
    if n1 == 0:
        raise InternalConsistencyError("window cochain is zero")
    w = {s: abs(v) / n1 for s, v in cochain}
    if abs(sum(w.values()) - 1.0) > WEIGHT_SUM_TOL:
        raise InternalConsistencyError("weights do not sum to one")
    return w


def _assert_window_support(frame, cochain, lo_size, hi_size):
    fc = frame.fc
    for s in cochain.coeffs:
        i = fc.index[s]
        if not (lo_size <= i < hi_size):
            raise InternalConsistencyError(
                f"support {s} escaped the window [{lo_size}, {hi_size})"
            )


def birth_window_cochain(frame):
    """The window birth cochain: minimum-norm, vanishing below b - epsilon."""
    p = frame.birth_pair()
    alpha = representative_at(frame.bar, frame.bar.birth + frame.epsilon)
    eta = birth_cochain(p, alpha)
    _assert_window_support(frame, eta, p.K.size, p.L.size)
    return eta


def death_window_cochain(frame):
    """The window death cochain of the class restricted just before death."""
    if not frame.bar.finite:
        raise PreconditionError("death content undefined for an essential bar")
    p = frame.death_pair()
    beta = representative_at(frame.bar, frame.bar.death - frame.epsilon)
    sol = death_cochain(p, beta)
    if sol.cochain.norm1() == 0:
        raise InternalConsistencyError(
            "death cochain vanished although the class dies inside the window"
        )
    _assert_window_support(frame, sol.cochain, p.K.size, p.L.size)
    return sol.cochain


def _plain_value(frame, weights):
    fc = frame.fc
    return sum(fc.value_of(s) * w for s, w in weights.items())


def _new_edges(frame, simplex, which):
    """Edges of a simplex entering the window around birth or death."""
    fc = frame.fc
    t = frame.bar.birth if which == "birth" else frame.bar.death
    lo = fc.prefix_size(t - frame.epsilon)
    hi = fc.prefix_size(t + frame.epsilon)
    out = []
    for u, v in itertools.combinations(simplex, 2):
        i = fc.index.get((u, v))
        if i is not None and lo <= i < hi:
            out.append((u, v))
    return out


def _relaxed_value(frame, weights, which):
    fc = frame.fc
    total = 0.0
    for s, w in weights.items():
        if len(s) >= 2:
            new = _new_edges(frame, s, which)
            if new:
                f = sum(fc.value_of(e) for e in new) / len(new)
            else:
                warnings.warn(f"simplex {s} has no new edge in the window; using f(s)")
                f = fc.value_of(s)
        else:
            f = fc.value_of(s)
        total += f * w
    return total


def birth_content(frame, relaxed=False):
    """Weighted mean filtration value of the window birth cochain's support."""
    eta = birth_window_cochain(frame)
    w = _weights(eta)
    value = _relaxed_value(frame, w, "birth") if relaxed else _plain_value(frame, w)
    return value, w


def death_content(frame, relaxed=False):
    """Weighted mean filtration value of the window death cochain's support."""
    omega = death_window_cochain(frame)
    w = _weights(omega)
    value = _relaxed_value(frame, w, "death") if relaxed else _plain_value(frame, w)
    return value, w


def relaxed_content(frame, which):
    """Edge-relaxed content; which is "birth" or "death"."""
    if which == "birth":
        return birth_content(frame, relaxed=True)
    if which == "death":
        return death_content(frame, relaxed=True)
    raise InputError(f"which must be 'birth' or 'death', got {which!r}")


def multi_content(bar, epsilon0_set, which, relaxed=False):
    """Mean content over a set of relative window sizes."""
    vals = []
    for e0 in sorted(epsilon0_set):
        try:
            frame = make_frame(bar, epsilon0=e0)
            if which == "birth":
                v, _ = birth_content(frame, relaxed=relaxed)
            else:
                v, _ = death_content(frame, relaxed=relaxed)
        except (PreconditionError, InternalConsistencyError) as exc:
            raise PreconditionError(f"epsilon0={e0} failed: {exc}") from exc
        vals.append(v)
    return float(np.mean(vals))


@dataclass
class ContentReport:
    """Contents, weights and the filtration-value gradient for one frame."""

    B: float
    D: float | None
    B_relaxed: float
    D_relaxed: float | None
    birth_weights: dict
    death_weights: dict | None
    grad_f: dict
    generic: bool
    epsilon: float
    birth_grad: dict = field(default_factory=dict)
    death_grad: dict = field(default_factory=dict)

    def to_json_obj(self):
        def enc(m):
            return (
                [{"simplex": list(s), "value": v} for s, v in sorted(m.items())]
                if m is not None
                else None
            )

        return {
            "B": self.B,
            "D": self.D,
            "B_relaxed": self.B_relaxed,
            "D_relaxed": self.D_relaxed,
            "epsilon": self.epsilon,
            "generic": self.generic,
            "birth_weights": enc(self.birth_weights),
            "death_weights": enc(self.death_weights),
            "grad_f": enc(self.grad_f),
        }


def content_gradient(frame, weights, which, relaxed=False):
    """d(content)/d(filtration value) with the window cochain held fixed.

    Unrelaxed contents are linear in the support values, so the gradient is
    the weight map itself. Relaxed contents spread each simplex weight evenly
    over its new window edges, so the gradient lives on edges.
    """
    if not relaxed:
        return dict(weights)
    grad = {}
    for s, w in weights.items():
        if len(s) >= 2:
            new = _new_edges(frame, s, which)
            if new:
                share = w / len(new)
                for e in new:
                    grad[e] = grad.get(e, 0.0) + share
                continue
        grad[s] = grad.get(s, 0.0) + w
    return grad


def content_report(frame, relaxed_birth=False, relaxed_death=True):
    """Assemble contents, weights and the persistence-content gradient.

    grad_f is the gradient of (death content - birth content) using the
    relaxed variants chosen for the objective; non-generic frames are flagged
    but still produce a gradient.
    """
    generic = is_generic(frame)
    if not generic:
        warnings.warn("window thresholds touch filtration values; gradient may jump")
    B, bw = birth_content(frame, relaxed=False)
    B_rel = _relaxed_value(frame, bw, "birth")
    bgrad = content_gradient(frame, bw, "birth", relaxed=relaxed_birth)
    if frame.bar.finite:
        D, dw = death_content(frame, relaxed=False)
        D_rel = _relaxed_value(frame, dw, "death")
        dgrad = content_gradient(frame, dw, "death", relaxed=relaxed_death)
    else:
        D, D_rel, dw, dgrad = None, None, None, {}
    grad = {}
    for s, g in dgrad.items():
        grad[s] = grad.get(s, 0.0) + g
    for s, g in bgrad.items():
        grad[s] = grad.get(s, 0.0) - g
    return ContentReport(
        B=B,
        D=D,
        B_relaxed=B_rel,
        D_relaxed=D_rel,
        birth_weights=bw,
        death_weights=dw,
        grad_f=grad,
        generic=generic,
        epsilon=frame.epsilon,
        birth_grad=bgrad,
        death_grad=dgrad,
    )


# ---------------------------------------------------------------------------
# chain-rule adapters from filtration values to the underlying variables


def _route_to_edges(fc, grad_map):
    """Push simplex-value gradients down to edges via the max-edge rule.

    The diameter of a higher simplex is the value of its largest edge; exact
    ties split the weight equally. Vertices carry constant value 0 in a
    Vietoris-Rips filtration and contribute nothing.
    """
    edge_grad = {}
    for s, g in grad_map.items():
        if len(s) == 1:
            continue
        if len(s) == 2:
            edge_grad[s] = edge_grad.get(s, 0.0) + g
            continue
        f = fc.value_of(s)
        tied = [
            e for e in itertools.combinations(s, 2) if fc.value_of(e) == f
        ]
        share = g / len(tied)
        for e in tied:
            edge_grad[e] = edge_grad.get(e, 0.0) + share
    return edge_grad


def grad_to_points(fc, grad_map, points, metric="euclidean", weights=None):
    """Gradient with respect to point coordinates for a Vietoris-Rips cloud."""
    points = np.asarray(points, dtype=np.float64)
    out = np.zeros_like(points)
    for (u, v), g in _route_to_edges(fc, grad_map).items():
        diff = points[u] - points[v]
        if metric == "euclidean":
            dist = np.linalg.norm(diff)
            if dist == 0:
                continue
            d_u = diff / dist
        elif metric == "l1":
            d_u = np.sign(diff)
        elif metric == "weighted-l1":
            d_u = np.asarray(weights) * np.sign(diff)
        else:
            raise InputError(f"unknown metric {metric!r}")
        out[u] += g * d_u
        out[v] -= g * d_u
    return out


def grad_to_vertex_values(fc, grad_map):
    """Gradient with respect to vertex values for a lower-star filtration.

    Each simplex value is its maximal vertex value; ties split equally.
    """
    out = {}
    for s, g in grad_map.items():
        f = fc.value_of(s)
        tied = [v for v in s if fc.value_of((v,)) == f]
        if not tied:
            raise InputError(
                f"simplex {s} value is not attained by a vertex; "
                "not a lower-star filtration"
            )
        share = g / len(tied)
        for v in tied:
            out[v] = out.get(v, 0.0) + share
    return out


def grad_to_weights(fc, grad_map, block_dists):
    """Gradient with respect to feature weights of a weighted-l1 cloud.

    block_dists[b, i, j] is the unweighted block-l1 distance between points i
    and j for feature b, so d(i, j) = sum_b w_b * block_dists[b, i, j].
    """
    out = np.zeros(block_dists.shape[0])
    for (u, v), g in _route_to_edges(fc, grad_map).items():
        out += g * block_dists[:, u, v]
    return out
