"""Structural property checks: polygon criticality, dihedral equivariance,
and run-stability diagnostics."""

import math

import numpy as np

from .complexes import build_vr
from .content import (
    birth_content,
    content_gradient,
    death_content,
    grad_to_points,
    is_generic,
    make_frame,
)
from .errors import PreconditionError
from .optimize import min_threshold_gap
from .persistence import compute_persistence, select_bar
from .synthetic import regular_polygon


def polygon_content_gradient(points, epsilon0):
    """Gradient of the window persistence content (relaxed death, plain birth)
    of the most persistent degree-1 bar, with respect to the points."""
    fc = build_vr(points, max_dim=2)
    barcode = compute_persistence(fc, 1)
    bar = select_bar(barcode, 1, "longest")
    if bar is None:
        raise PreconditionError("no finite degree-1 bar")
    frame = make_frame(bar, epsilon0=epsilon0)
    if not is_generic(frame):
        raise PreconditionError(
            "window thresholds hit filtration values; perturb epsilon0"
        )
    _, bw = birth_content(frame)
    _, dw = death_content(frame, relaxed=True)
    bgrad = content_gradient(frame, bw, "birth", relaxed=False)
    dgrad = content_gradient(frame, dw, "death", relaxed=True)
    return grad_to_points(fc, dgrad, points) - grad_to_points(fc, bgrad, points)


def critical_point_check(n, epsilon0):
    """Norm of the content gradient at a regular n-gon, projected onto the
    tangent space of the mean-squared-radius constraint. Should vanish."""
    pts = regular_polygon(n)
    g = polygon_content_gradient(pts, epsilon0)
    radial = pts * (np.sum(g * pts) / np.sum(pts * pts))
    return float(np.linalg.norm(g - radial))


def _dihedral_actions(n):
    """Vertex permutations of the dihedral group with orientation signs."""
    actions = []
    for k in range(n):
        actions.append(({i: (i + k) % n for i in range(n)}, 1.0))
        actions.append(({i: (-i + k) % n for i in range(n)}, -1.0))
    return actions


def _pullback(cochain, perm):
    """Pullback along a vertex permutation, with the sorting parity sign."""
    out = {}
    for s, v in cochain:
        image = [perm[u] for u in s]
        order = np.argsort(image)
        sign = 1.0
        # parity of the permutation sorting the image
        seen = list(order)
        for i in range(len(seen)):
            while seen[i] != i:
                j = seen[i]
                seen[i], seen[j] = seen[j], seen[i]
                sign = -sign
        out[tuple(sorted(image))] = sign * v
    return out


def dihedral_symmetry_check(n, epsilon0=None, epsilon=None):
    """Max deviation of the window birth/death cochains from sign-equivariance
    under all 2n symmetries of the regular n-gon."""
    from .content import birth_window_cochain, death_window_cochain

    pts = regular_polygon(n)
    fc = build_vr(pts, max_dim=2)
    barcode = compute_persistence(fc, 1)
    bars = [b for b in barcode.in_degree(1)]
    assert len(bars) == 1, "regular polygon must carry a single degree-1 bar"
    bar = bars[0]
    frame = make_frame(bar, epsilon0=epsilon0, epsilon=epsilon)
    if not is_generic(frame):
        raise PreconditionError("window thresholds hit filtration values")
    eta = birth_window_cochain(frame)
    omega = death_window_cochain(frame)
    worst = 0.0
    for perm, orient in _dihedral_actions(n):
        for c in (eta, omega):
            pulled = _pullback(c, perm)
            dev = 0.0
            for s in set(pulled) | set(c.coeffs):
                dev = max(dev, abs(pulled.get(s, 0.0) - orient * c[s]))
            worst = max(worst, dev / max(c.norminf(), 1e-300))
    return worst


def stability_rows(run):
    """Per-iteration diagnostic rows: bar endpoints, window thresholds and the
    sorted filtration values, plus the minimum threshold-to-value gap."""
    rows = []
    for rec in run.records:
        gap = min_threshold_gap(rec.thresholds, rec.filtration_values)
        rows.append(
            {
                "iteration": rec.iteration,
                "birth": rec.birth,
                "death": rec.death,
                "gap": gap if math.isfinite(gap) else float("nan"),
                "thresholds": list(rec.thresholds),
                "values": list(rec.filtration_values),
            }
        )
    return rows


def write_stability_csv(run, path):
    from .io_utils import fmt

    rows = stability_rows(run)
    n_thr = max((len(r["thresholds"]) for r in rows), default=0)
    n_val = max((len(r["values"]) for r in rows), default=0)
    with open(path, "w") as fh:
        header = (
            ["iteration", "birth", "death", "min_gap"]
            + [f"thr_{i}" for i in range(n_thr)]
            + [f"val_{i}" for i in range(n_val)]
        )
        fh.write(",".join(header) + "\n")
        for r in rows:
            cells = [str(r["iteration"]), fmt(r["birth"]), fmt(r["death"]), fmt(r["gap"])]
            cells += [fmt(x) for x in r["thresholds"]]
            cells += [""] * (n_thr - len(r["thresholds"]))
            cells += [fmt(x) for x in r["values"]]
            cells += [""] * (n_val - len(r["values"]))
            fh.write(",".join(cells) + "\n")
    return path


def write_stability_svg(run, path):
    from .svg import line_plot

    rows = stability_rows(run)
    xs = [r["iteration"] for r in rows]
    series = []
    n_val = max((len(r["values"]) for r in rows), default=0)
    for j in range(n_val):
        ys = [r["values"][j] if j < len(r["values"]) else math.nan for r in rows]
        series.append((None, xs, ys, "#bbbbbb"))
    n_thr = max((len(r["thresholds"]) for r in rows), default=0)
    for j in range(n_thr):
        ys = [r["thresholds"][j] if j < len(r["thresholds"]) else math.nan for r in rows]
        series.append((f"thr{j}" if j < 4 else None, xs, ys, "#cc3333"))
    series.append(("birth", xs, [r["birth"] for r in rows], "#3355cc"))
    series.append(("death", xs, [r["death"] for r in rows], "#3355cc"))
    line_plot(series, path, title="window thresholds vs filtration values",
              xlabel="iteration", ylabel="value")
    return path
