"""Named verification suites exercising the library's structural guarantees.

Each suite returns CheckResult rows with the measured residual and its bound;
`inject` deliberately corrupts one quantity so a red report is reachable in
tests.
"""

from dataclasses import dataclass

import numpy as np

from .complexes import Cochain, FilteredComplex, build_vr
from .content import birth_content, death_content, make_frame, multi_content
from .oracle import barcode_multiset, brute_force_barcode
from .persistence import compute_persistence, select_bar
from .solvers import (
    PairProblem,
    death_cochain,
    explicit_death_cochain,
    schur_death_norm,
    verify_dirichlet,
)


@dataclass
class CheckResult:
    suite: str
    name: str
    value: float
    bound: float

    @property
    def passed(self):
        return self.value <= self.bound


def random_filtration(rng, max_vertices=8):
    """Small random face-closed filtration with integer values and ties."""
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


def random_pair_problem(rng, degree):
    """Random snapshot pair with a random cocycle on K in the given degree."""
    from .solvers import _cocycle_basis

    for _ in range(60):
        fc = random_filtration(rng)
        values = sorted(set(fc.values.tolist()))
        if len(values) < 2:
            continue
        ti, tj = sorted(rng.choice(len(values), 2, replace=False).tolist())
        K = fc.snapshot(values[ti])
        L = fc.snapshot(values[tj])
        p = PairProblem(K, L, degree)
        k_simplices = K.simplices_of_degree(degree)
        k1 = K.simplices_of_degree(degree + 1)
        if not k_simplices:
            continue
        basis = _cocycle_basis(k1, k_simplices, degree)
        if basis.shape[1] == 0:
            continue
        coeff = rng.normal(size=basis.shape[1])
        vec = basis @ coeff
        if np.abs(vec).max() < 1e-9:
            continue
        beta = Cochain.from_vector(degree, k_simplices, vec)
        return p, beta
    raise RuntimeError("could not build a random pair problem")


def suite_solvers(seed=0, trials=25, inject=False):
    rng = np.random.default_rng(seed)
    out = []
    worst_dirichlet = worst_schur = worst_explicit = worst_indep = 0.0
    for t in range(trials):
        degree = int(rng.integers(0, 2))
        p, beta = random_pair_problem(rng, degree)
        sol = death_cochain(p, beta)
        worst_dirichlet = max(worst_dirichlet, verify_dirichlet(p, sol, beta))
        w2 = sol.cochain.norm2() ** 2
        q = schur_death_norm(p, beta, "full")
        worst_schur = max(worst_schur, abs(q - w2) / max(1.0, w2))
        explicit = explicit_death_cochain(p, beta)
        worst_explicit = max(worst_explicit, (explicit - sol.cochain).norminf())
        # representative independence: shift beta by a coboundary of K
        km1 = p.K.simplices_of_degree(degree - 1) if degree >= 1 else []
        if km1:
            h = Cochain.from_vector(degree - 1, km1, rng.normal(size=len(km1)))
            from .complexes import coboundary

            dh = coboundary(p.K, degree - 1).apply(h)
            sol2 = death_cochain(p, beta + dh)
            worst_indep = max(worst_indep, (sol2.cochain - sol.cochain).norminf())
    if inject:
        worst_dirichlet += 1e-3
    out.append(CheckResult("solvers", "dirichlet_residual", worst_dirichlet, 1e-8))
    out.append(CheckResult("solvers", "schur_identity_relative", worst_schur, 1e-8))
    out.append(CheckResult("solvers", "explicit_vs_iterative", worst_explicit, 1e-8))
    out.append(CheckResult("solvers", "representative_independence", worst_indep, 1e-8))
    return out


def suite_content(seed=0, trials=10, inject=False):
    rng = np.random.default_rng(seed)
    worst = 0.0
    norm_dev = 0.0
    tested = 0
    for _ in range(trials):
        pts = rng.normal(size=(int(rng.integers(8, 14)), 2))
        fc = build_vr(pts, max_dim=2)
        bar = select_bar(compute_persistence(fc, 1), 1, "longest")
        if bar is None:
            continue
        for e0 in (0.05, 0.2):
            frame = make_frame(bar, epsilon0=e0)
            B, bw = birth_content(frame)
            D, dw = death_content(frame)
            Br, _ = birth_content(frame, relaxed=True)
            Dr, _ = death_content(frame, relaxed=True)
            eps, pers = frame.epsilon, bar.persistence
            for DD, BB in ((D, B), (Dr, Br)):
                worst = max(worst, (DD - BB - eps) - pers, pers - (DD - BB + eps))
            norm_dev = max(
                norm_dev,
                abs(sum(bw.values()) - 1.0),
                abs(sum(dw.values()) - 1.0),
            )
            tested += 1
        mB = multi_content(bar, (0.01, 0.05, 0.1), "birth")
        mD = multi_content(bar, (0.01, 0.05, 0.1), "death")
        eps_mean = float(np.mean([e0 * bar.persistence for e0 in (0.01, 0.05, 0.1)]))
        worst = max(worst, (mD - mB - eps_mean) - bar.persistence,
                    bar.persistence - (mD - mB + eps_mean))
    if inject:
        worst += 1.0
    return [
        CheckResult("content", "persistence_sandwich_slack", worst, 1e-12),
        CheckResult("content", "weight_normalization", norm_dev, 1e-9),
    ]


def suite_symmetry(seed=0, inject=False):
    from .checks import dihedral_symmetry_check

    worst = max(dihedral_symmetry_check(n, epsilon0=0.05) for n in (5, 6, 7))
    if inject:
        worst += 1e-3
    return [CheckResult("symmetry", "dihedral_equivariance", worst, 1e-8)]


def suite_critical(seed=0, inject=False):
    from .checks import critical_point_check

    worst = max(critical_point_check(n, 0.05) for n in (8, 10))
    if inject:
        worst += 1e-3
    return [CheckResult("critical", "projected_gradient_at_polygon", worst, 1e-6)]


def suite_oracle(seed=0, trials=30, inject=False):
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(trials):
        fc = random_filtration(rng)
        if brute_force_barcode(fc, 2) != barcode_multiset(compute_persistence(fc, 2), 2):
            mismatches += 1
    if inject:
        mismatches += 1
    return [CheckResult("oracle", "barcode_vs_brute_force_mismatches", mismatches, 0.0)]


SUITES = {
    "solvers": suite_solvers,
    "content": suite_content,
    "symmetry": suite_symmetry,
    "critical": suite_critical,
    "oracle": suite_oracle,
}


def run_suites(names, seed=0, inject=False):
    results = []
    for name in names:
        results.extend(SUITES[name](seed=seed, inject=inject))
    return results
