import numpy as np
import pytest

from cochainopt.complexes import FilteredComplex


def random_filtration(rng, max_vertices=8):
    """Face-closed random filtration with small integer values (ties likely)."""
    n = int(rng.integers(1, max_vertices + 1))
    simplices = {(i,): 0.0 for i in range(n)}
    if n >= 2:
        for _ in range(int(rng.integers(0, 2 * n))):
            i, j = sorted(rng.choice(n, 2, replace=False).tolist())
            simplices.setdefault((i, j), float(rng.integers(1, 5)))
    if n >= 3:
        for _ in range(int(rng.integers(0, n))):
            tri = tuple(sorted(rng.choice(n, 3, replace=False).tolist()))
            f = float(rng.integers(1, 5))
            for a in range(3):
                for b in range(a + 1, 3):
                    f = max(f, simplices.setdefault((tri[a], tri[b]), f))
            simplices[tri] = f
    return FilteredComplex(list(simplices.items()))


def random_graph_filtration(rng, n_vertices=6, injective=True):
    """Random connected-ish graph with injective vertex values."""
    if injective:
        vals = np.sort(rng.uniform(0, 1, n_vertices))
    else:
        vals = rng.integers(0, 3, n_vertices).astype(float)
    simplices = [((i,), float(vals[i])) for i in range(n_vertices)]
    seen = set()
    for _ in range(int(rng.integers(n_vertices, 3 * n_vertices))):
        i, j = sorted(rng.choice(n_vertices, 2, replace=False).tolist())
        if (i, j) in seen:
            continue
        seen.add((i, j))
        f = max(vals[i], vals[j]) + float(rng.uniform(0, 0.5))
        simplices.append(((i, j), f))
    return FilteredComplex(simplices)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def central_difference(func, x, step=1e-6):
    """Central finite-difference gradient of a scalar function of an array."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        xp = x.copy()
        xp[idx] += step
        xm = x.copy()
        xm[idx] -= step
        grad[idx] = (func(xp) - func(xm)) / (2 * step)
        it.iternext()
    return grad
