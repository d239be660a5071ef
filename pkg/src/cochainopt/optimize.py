"""Gradient ascent/descent drivers for point clouds, images and feature weights."""

import math
from dataclasses import dataclass, field

import numpy as np

from .complexes import build_lower_star, build_vr, triangulate_grid, vr_from_distances
from .content import (
    birth_content,
    content_gradient,
    death_content,
    grad_to_points,
    grad_to_vertex_values,
    grad_to_weights,
    make_frame,
)
from .errors import InputError, PreconditionError
from .persistence import compute_persistence, select_bar

EARLY_STOP_PERSISTENCE = 1e-6
DEFAULT_EPSILON_SET = (0.01, 0.05, 0.1)


@dataclass
class OptConfig:
    """Settings for one optimization run."""

    learning_rate: float = 0.02
    iterations: int = 1000
    method: str = "cochains"  # simplices | cochains | multi-cochains | one-step
    epsilon0: float = 0.05
    epsilon_set: tuple = DEFAULT_EPSILON_SET
    epsilon_absolute: float | None = None
    degree: int = 1
    bar_policy: str = "longest"
    penalty: bool = True
    seed: int = 0
    track_thresholds: bool = True
    early_stop: float = EARLY_STOP_PERSISTENCE
    window: int = 250

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InputError("learning rate must be positive")
        if self.iterations < 0:
            raise InputError("iterations must be >= 0")


@dataclass
class IterationRecord:
    iteration: int
    loss: float
    birth: float
    death: float
    normalized_persistence: float
    thresholds: list = field(default_factory=list)
    filtration_values: list = field(default_factory=list)
    variables: object = None


@dataclass
class OptRun:
    """Per-iteration trace plus the final variables of one run."""

    records: list
    final_variables: object
    status: str
    config: OptConfig
    events: list = field(default_factory=list)

    @property
    def iterations_completed(self):
        return max(0, len(self.records) - 1)


def penalty_ball(points):
    """Quadratic penalty for leaving the unit ball, with its gradient."""
    points = np.asarray(points, dtype=np.float64)
    norms = np.linalg.norm(points, axis=1)
    excess = np.maximum(0.0, norms - 1.0)
    value = float(np.sum(excess**2))
    grad = np.zeros_like(points)
    outside = norms > 1.0
    if outside.any():
        grad[outside] = (2.0 * excess[outside] / norms[outside])[:, None] * points[outside]
    return value, grad


def min_threshold_gap(thresholds, values):
    """Smallest distance from any tracked threshold to any filtration value."""
    if not thresholds or not len(values):
        return math.inf
    values = np.asarray(values)
    return float(min(np.abs(values - t).min() for t in thresholds))


def _cloud_gradient_cochains(fc, bar, epsilon0, points):
    frame = make_frame(bar, epsilon0=epsilon0)
    B, bw = birth_content(frame)
    D, dw = death_content(frame, relaxed=True)
    bgrad = content_gradient(frame, bw, "birth", relaxed=False)
    dgrad = content_gradient(frame, dw, "death", relaxed=True)
    g = grad_to_points(fc, dgrad, points) - grad_to_points(fc, bgrad, points)
    return (D - B), g, frame.thresholds()


def _cloud_gradient_simplices(fc, bar, points):
    g = grad_to_points(fc, {bar.death_simplex: 1.0, bar.birth_simplex: -1.0}, points)
    return bar.persistence, g


def run_point_cloud(points, cfg):
    """Maximize persistence (simplices) or window persistence content (cochains).

    Vanilla gradient ascent with a fixed step; the targeted bar is re-selected
    every iteration and content cochains are recomputed from scratch.
    """
    points = np.array(points, dtype=np.float64)
    records = []
    events = []
    status = "completed"

    i = 0
    while True:
        fc = build_vr(points, max_dim=cfg.degree + 1)
        barcode = compute_persistence(fc, cfg.degree)
        bar = select_bar(barcode, cfg.degree, cfg.bar_policy)
        if bar is None:
            events.append((i, "no finite bar in target degree"))
            status = "no_bar"
            break
        if bar.persistence < cfg.early_stop:
            events.append((i, "selected bar below persistence floor"))
            status = "degenerate_bar"
            break
        pval, pgrad = penalty_ball(points) if cfg.penalty else (0.0, 0.0)
        thresholds = []
        if cfg.method == "simplices":
            content, g = _cloud_gradient_simplices(fc, bar, points)
            thresholds = [bar.birth, bar.death]
        elif cfg.method == "cochains":
            content, g, thresholds = _cloud_gradient_cochains(fc, bar, cfg.epsilon0, points)
        elif cfg.method == "multi-cochains":
            parts = [_cloud_gradient_cochains(fc, bar, e0, points) for e0 in cfg.epsilon_set]
            content = float(np.mean([p[0] for p in parts]))
            g = np.mean([p[1] for p in parts], axis=0)
            thresholds = [t for p in parts for t in p[2]]
        else:
            raise InputError(f"unknown method {cfg.method!r}")
        loss = content - pval
        norm = np.linalg.norm(points)
        rec = IterationRecord(
            iteration=i,
            loss=loss,
            birth=bar.birth,
            death=bar.death,
            normalized_persistence=bar.persistence / norm if norm else 0.0,
            thresholds=thresholds,
            filtration_values=(
                sorted(fc.values[fc.dims == 1].tolist()) if cfg.track_thresholds else []
            ),
            variables=points.copy(),
        )
        records.append(rec)
        if i >= cfg.iterations:
            break
        points = points + cfg.learning_rate * (g - pgrad)
        i += 1

    return OptRun(records=records, final_variables=points, status=status,
                  config=cfg, events=events)


def _image_loss_and_gradient(pixels, grid, cfg):
    rows, cols = pixels.shape
    fc = build_lower_star(grid, dict(enumerate(pixels.ravel())))
    barcode = compute_persistence(fc, 0)
    finite = select_bar(barcode, 0, "all-finite")
    loss = 0.0
    grad = np.zeros(pixels.size)
    for bar in finite:
        if cfg.method == "simplices":
            loss += bar.death
            vg = grad_to_vertex_values(fc, {bar.death_simplex: 1.0})
        else:
            eps = cfg.epsilon_absolute if cfg.epsilon_absolute is not None else 0.1
            eps = min(eps, 0.5 * bar.persistence)
            frame = make_frame(bar, epsilon=eps)
            D, dw = death_content(frame)
            loss += D
            vg = grad_to_vertex_values(fc, content_gradient(frame, dw, "death"))
        for v, g in vg.items():
            grad[v] += g
    return loss, grad.reshape(rows, cols), len(finite), barcode


def run_image_repair(image, cfg):
    """Gradient descent on pixel values targeting every finite component-merge bar.

    The loss is the sum of death values (simplices) or death contents
    (cochains); pixels are clamped to [0, 1] after each step.
    """
    pixels = np.array(image, dtype=np.float64)
    if pixels.ndim != 2:
        raise InputError("image must be a 2-d array")
    if pixels.min() < 0 or pixels.max() > 1:
        raise InputError("pixel values must lie in [0, 1]")
    grid = triangulate_grid(*pixels.shape)
    records = []
    events = []
    status = "completed"
    i = 0
    while True:
        loss, grad, n_finite, barcode = _image_loss_and_gradient(pixels, grid, cfg)
        if n_finite == 0:
            events.append((i, "no finite bars; nothing to repair"))
            status = "no_bar"
            records.append(
                IterationRecord(i, 0.0, math.nan, math.nan, 0.0, [], [], pixels.copy())
            )
            break
        finite = [b for b in barcode.in_degree(0) if b.finite]
        top = max(finite, key=lambda b: b.persistence)
        records.append(
            IterationRecord(
                iteration=i,
                loss=loss,
                birth=top.birth,
                death=top.death,
                normalized_persistence=top.persistence,
                thresholds=[],
                filtration_values=[],
                variables=pixels.copy(),
            )
        )
        if i >= cfg.iterations:
            break
        pixels = np.clip(pixels - cfg.learning_rate * grad, 0.0, 1.0)
        i += 1
    return OptRun(records=records, final_variables=pixels, status=status,
                  config=cfg, events=events)


# ---------------------------------------------------------------------------
# feature weights on sliding-window embeddings


@dataclass
class SlidingWindowCloud:
    """Window embedding of a multivariate series with per-feature l1 blocks."""

    points: np.ndarray  # n x (d*L), unweighted embedding
    block_dists: np.ndarray  # d x n x n unweighted block-l1 distances
    n_features: int
    window: int

    def distances(self, weights):
        return np.tensordot(np.asarray(weights), self.block_dists, axes=1)


def sliding_window(series, weights, window):
    """Embed a d x T series into R^{d*window} points with the weighted-l1 metric."""
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 2:
        raise InputError("series must be a d x T array")
    d, T = series.shape
    if window > T:
        raise InputError(f"window {window} exceeds series length {T}")
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (d,) or w.min() < 0 or abs(w.sum() - 1.0) > 1e-9:
        raise InputError("weights must lie on the probability simplex")
    n = T - window + 1
    blocks = np.stack([
        np.lib.stride_tricks.sliding_window_view(series[b], window) for b in range(d)
    ])  # d x n x window
    points = np.concatenate([blocks[b] for b in range(d)], axis=1)
    block_dists = np.zeros((d, n, n))
    for b in range(d):
        diff = blocks[b][:, None, :] - blocks[b][None, :, :]
        block_dists[b] = np.abs(diff).sum(axis=2)
    return SlidingWindowCloud(points=points, block_dists=block_dists,
                              n_features=d, window=window)


def project_simplex(v):
    """Euclidean projection onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=np.float64)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u + (1.0 - css) / np.arange(1, len(v) + 1) > 0)[0][-1]
    lam = (1.0 - css[rho]) / (rho + 1.0)
    return np.maximum(v + lam, 0.0)


def _weights_gradient(cloud, weights, cfg):
    dists = cloud.distances(weights)
    fc = vr_from_distances(dists, max_dim=2)
    barcode = compute_persistence(fc, 1)
    bar = select_bar(barcode, 1, "longest")
    if bar is None:
        return None, 0.0, 0.0
    if cfg.method == "simplices":
        g = grad_to_weights(fc, {bar.death_simplex: 1.0, bar.birth_simplex: -1.0},
                            cloud.block_dists)
        return g, bar.persistence, bar.persistence
    total = np.zeros(cloud.n_features)
    contents = []
    for e0 in cfg.epsilon_set:
        frame = make_frame(bar, epsilon0=e0)
        B, bw = birth_content(frame)
        D, dw = death_content(frame, relaxed=True)
        bgrad = content_gradient(frame, bw, "birth", relaxed=False)
        dgrad = content_gradient(frame, dw, "death", relaxed=True)
        total += grad_to_weights(fc, dgrad, cloud.block_dists)
        total -= grad_to_weights(fc, bgrad, cloud.block_dists)
        contents.append(D - B)
    n = len(cfg.epsilon_set)
    return total / n, float(np.mean(contents)), bar.persistence


def run_feature_weights(series, cfg):
    """Maximize degree-1 persistence (or its content) over simplex-projected weights."""
    series = np.asarray(series, dtype=np.float64)
    d = series.shape[0]
    cloud = sliding_window(series, np.full(d, 1.0 / d), cfg.window)
    w = np.full(d, 1.0 / d)
    records = []
    events = []
    status = "completed"
    i = 0
    while True:
        g, loss, persistence = _weights_gradient(cloud, w, cfg)
        if g is None:
            events.append((i, "no finite degree-1 bar"))
            status = "no_bar"
            break
        records.append(
            IterationRecord(
                iteration=i,
                loss=loss,
                birth=math.nan,
                death=math.nan,
                normalized_persistence=persistence,
                thresholds=[],
                filtration_values=[],
                variables=w.copy(),
            )
        )
        if i >= cfg.iterations:
            break
        w = project_simplex(w + cfg.learning_rate * g)
        i += 1
    return OptRun(records=records, final_variables=w, status=status,
                  config=cfg, events=events)


def one_step_weights(series, epsilon_set=DEFAULT_EPSILON_SET, window=250):
    """Single-gradient feature selection: push the projected persistence-content
    gradient at uniform weights to the simplex boundary.

    Performs exactly one persistence computation; returns (weights, gradient).
    """
    series = np.asarray(series, dtype=np.float64)
    d = series.shape[0]
    uniform = np.full(d, 1.0 / d)
    cloud = sliding_window(series, uniform, window)
    cfg = OptConfig(method="multi-cochains", epsilon_set=tuple(epsilon_set),
                    iterations=1, learning_rate=1.0)
    g, _, _ = _weights_gradient(cloud, uniform, cfg)
    if g is None:
        raise PreconditionError("no finite degree-1 bar at uniform weights")
    tangent = g - g.mean()
    if np.abs(tangent).max() == 0.0:
        return uniform, tangent
    neg = tangent < 0
    t_star = np.min(uniform[neg] / -tangent[neg])
    w = uniform + t_star * tangent
    w[w < 1e-14] = 0.0
    w /= w.sum()
    return w, tangent


def mask_from_gradient(grad, rule="top-half-positive"):
    """Binary mask of entries at or above the median of the positive gradients."""
    import warnings

    if rule != "top-half-positive":
        raise InputError(f"unknown mask rule {rule!r}")
    grad = np.asarray(grad, dtype=np.float64)
    positive = grad[grad > 0]
    if positive.size == 0:
        warnings.warn("no positive gradient entries; mask is all zero")
        return np.zeros(grad.shape, dtype=np.int64)
    med = np.median(positive)
    return ((grad > 0) & (grad >= med)).astype(np.int64)


def power_iteration_pca(points, n_components=2, iterations=300, seed=0):
    """Top principal components by deflated power iteration on the covariance."""
    X = np.asarray(points, dtype=np.float64)
    X = X - X.mean(axis=0)
    cov = X.T @ X / max(1, X.shape[0] - 1)
    rng = np.random.default_rng(seed)
    comps = []
    for _ in range(n_components):
        v = rng.normal(size=cov.shape[0])
        v /= np.linalg.norm(v)
        for _ in range(iterations):
            v = cov @ v
            n = np.linalg.norm(v)
            if n == 0:
                break
            v /= n
        comps.append(v)
        cov = cov - np.outer(v, cov @ v)
    comps = np.array(comps)
    return X @ comps.T, comps
