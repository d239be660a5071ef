"""Seeded synthetic datasets for the experiments and tests."""

import numpy as np

from .errors import InputError


def noisy_circle(n_points, noise_sigma=0.1, seed=0):
    """Evenly spaced points on the unit circle plus Gaussian jitter.

    Even spacing keeps the initial cloud an honest loop (one prominent
    degree-1 class, no near-coincident pairs) for every seed.
    """
    rng = np.random.default_rng(seed)
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    return pts + rng.normal(scale=noise_sigma, size=pts.shape)


def regular_polygon(n, radius=1.0):
    """Vertices of a regular n-gon on a circle of the given radius."""
    if n < 3:
        raise InputError("polygon needs at least 3 vertices")
    theta = 2.0 * np.pi * np.arange(n) / n
    return radius * np.column_stack([np.cos(theta), np.sin(theta)])


def two_blob_image(size=16, blob_value=0.08, band_value=0.5, background=0.92,
                   noise_amplitude=1e-3, seed=0):
    """Two dark discs separated by a mid-gray horizontal band, dark = low value.

    Sublevel filtration of the result has two early components that merge at
    the band value, plus an essential component.
    """
    rng = np.random.default_rng(seed)
    img = np.full((size, size), background)
    yy, xx = np.mgrid[0:size, 0:size]
    r = size / 5.0
    top = (size // 4, size // 2)
    bottom = (3 * size // 4, size // 2)
    for (cy, cx) in (top, bottom):
        img[(yy - cy) ** 2 + (xx - cx) ** 2 <= r * r] = blob_value
    band = size // 2
    img[band - 1 : band + 1, :] = np.maximum(img[band - 1 : band + 1, :], band_value)
    img += rng.uniform(-noise_amplitude, noise_amplitude, img.shape)
    return np.clip(img, 0.0, 1.0)


def corrupt_image(image, band_rows=2, band_value=0.75, noise_amplitude=1e-3, seed=0):
    """Overwrite a centered horizontal band and add small uniform noise."""
    rng = np.random.default_rng(seed)
    img = np.array(image, dtype=np.float64)
    mid = img.shape[0] // 2
    lo = max(0, mid - band_rows // 2)
    img[lo : lo + band_rows, :] = band_value
    img += rng.uniform(-noise_amplitude, noise_amplitude, img.shape)
    return np.clip(img, 0.0, 1.0)


def periodic_feature_series(n_features=10, length=300, period=50.0,
                            n_periodic=3, noise_sigma=1.5, seed=0):
    """Phase-shifted sinusoids; features beyond the first n_periodic are
    value-shuffled to destroy periodicity, then everything is noised."""
    rng = np.random.default_rng(seed)
    t = np.arange(1, length + 1, dtype=np.float64)
    shifts = rng.uniform(0.0, period, n_features)
    series = np.array([
        np.sin(2.0 * np.pi / period * (t - shifts[i])) for i in range(n_features)
    ])
    for i in range(n_periodic, n_features):
        series[i] = rng.permutation(series[i])
    series += rng.normal(scale=noise_sigma, size=series.shape)
    return series


def loop_dataset(n_points=40, n_blocks=12, block_size=8, n_signal=6,
                 noise_sigma=0.05, seed=0):
    """A noisy loop in a high-dimensional space, built from two asymmetric
    half-cycles: each signal block carries a bump response centered somewhere
    along the cycle, with different sharpness on the two halves. The remaining
    blocks are pure noise.

    Returns (points, block_size); points has shape n_points x (n_blocks*block_size).
    """
    rng = np.random.default_rng(seed)
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    dim = n_blocks * block_size
    pts = rng.normal(scale=noise_sigma, size=(n_points, dim))
    centers = 2.0 * np.pi * np.arange(n_signal) / n_signal
    for b in range(n_signal):
        ang = theta - centers[b]
        resp = np.cos(ang)
        sharp = np.where(np.sin(ang) >= 0.0, 1.0, 3.0)  # asymmetric halves
        profile = np.sign(resp) * np.abs(resp) ** sharp
        cols = slice(b * block_size, (b + 1) * block_size)
        pts[:, cols] += profile[:, None]
    return pts, block_size
