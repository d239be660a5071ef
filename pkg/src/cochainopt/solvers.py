"""Constrained l2 solvers for birth cochains, death cochains and potentials.

Both problems minimize a quadratic over an affine set of cochains on a
snapshot pair K <= L:

* birth: the minimum-norm representative of a class born between K and L,
  among representatives vanishing identically on K;
* death: the coboundary of a minimum-Dirichlet-energy extension of a cocycle
  prescribed on K (the extension is a "death potential").

Dense normal-equation solves are used below 2000 unknowns, LSMR above.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .complexes import Cochain, facets
from .errors import InputError, InternalConsistencyError, PreconditionError

COCYCLE_TOL = 1e-9
FEASIBILITY_TOL = 1e-8
PINV_CUTOFF = 1e-10
DENSE_LIMIT = 2000


@dataclass(frozen=True)
class PairProblem:
    """A subcomplex pair K <= L (snapshots of one filtration) and a degree."""

    K: object
    L: object
    degree: int

    def __post_init__(self):
        if not self.K.is_subcomplex_of(self.L):
            raise InputError("K must be a subcomplex of L from the same filtration")
        if self.degree < 0:
            raise InputError("degree must be >= 0")


@dataclass
class DeathSolution:
    """Death potential, its coboundary (the death cochain) and the solver residual."""

    potential: Cochain
    cochain: Cochain
    residual: float


def _simplex_lists(p):
    """k-simplices of L with K membership flags, plus the (k+1)-simplices of L."""
    fc = p.L.parent
    k_idx = p.L.simplex_indices(p.degree)
    k_simplices = [fc.simplices[i] for i in k_idx]
    in_k = k_idx < p.K.size
    k1_idx = p.L.simplex_indices(p.degree + 1)
    k1_simplices = [fc.simplices[i] for i in k1_idx]
    return k_simplices, np.asarray(in_k), k1_simplices, k1_idx


def _coboundary_dense_rows(row_simplices, col_positions, ncols):
    mat = np.zeros((len(row_simplices), ncols))
    for r, s in enumerate(row_simplices):
        for face, sign in facets(s):
            c = col_positions.get(face)
            if c is not None:
                mat[r, c] = sign
    return mat


def _coboundary_sparse(row_simplices, col_positions, ncols):
    data, ri, ci = [], [], []
    for r, s in enumerate(row_simplices):
        for face, sign in facets(s):
            c = col_positions.get(face)
            if c is not None:
                data.append(float(sign))
                ri.append(r)
                ci.append(c)
    return sp.csr_matrix((data, (ri, ci)), shape=(len(row_simplices), ncols))


def _lstsq(A, b):
    """Minimum-norm least squares; dense below DENSE_LIMIT unknowns."""
    if A.shape[1] == 0:
        return np.zeros(0)
    if A.shape[0] == 0:
        return np.zeros(A.shape[1])
    if A.shape[1] <= DENSE_LIMIT:
        A = A.toarray() if sp.issparse(A) else A
        x, *_ = np.linalg.lstsq(A, b, rcond=None)
        return x
    A = sp.csr_matrix(A)
    out = spla.lsmr(A, b, atol=1e-10, btol=1e-10, maxiter=10 * A.shape[1])
    return out[0]


def _nullspace(mat):
    """Orthonormal kernel basis (columns); rows of `mat` are the constraints.

    The cutoff is floored at the unit scale: constraint rows here are built
    from {-1,0,1} incidences and orthonormal bases, so singular values far
    below 1 are rounding residue even when the whole matrix is residue.
    """
    if mat.shape[0] == 0 or mat.shape[1] == 0:
        return np.eye(mat.shape[1])
    _, sv, vt = np.linalg.svd(mat, full_matrices=True)
    tol = PINV_CUTOFF * max(1.0, sv[0] if len(sv) else 1.0)
    rank = int(np.sum(sv > tol))
    return vt[rank:].T


def _cocycle_basis(k_simplices, km1_simplices, degree):
    """Basis of the degree-(k-1) cocycles of a complex given by simplex lists.

    Degree 0 is done exactly (component indicators, so coboundaries of the
    basis vectors are exact zeros inside a component); higher degrees fall
    back to an SVD kernel.
    """
    if degree < 0:
        return np.zeros((0, 0))
    if degree == 0:
        parent = {s[0]: s[0] for s in km1_simplices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for s in k_simplices:
            parent[find(s[0])] = find(s[1])
        roots = sorted({find(v) for v in parent})
        root_col = {r: j for j, r in enumerate(roots)}
        basis = np.zeros((len(km1_simplices), len(roots)))
        for i, s in enumerate(km1_simplices):
            basis[i, root_col[find(s[0])]] = 1.0
        return basis
    pos = {s: i for i, s in enumerate(km1_simplices)}
    mat = _coboundary_dense_rows(k_simplices, pos, len(km1_simplices))
    return _nullspace(mat)


def _check_cocycle(p_or_snap, degree, vec, simplices, what):
    """delta(vec) must vanish; scale-relative infinity-norm check."""
    pos = {s: i for i, s in enumerate(simplices)}
    residual = 0.0
    fc = p_or_snap.parent
    size = p_or_snap.size
    for i in range(size):
        if fc.dims[i] != degree + 1:
            continue
        s = fc.simplices[i]
        val = 0.0
        for face, sign in facets(s):
            j = pos.get(face)
            if j is not None:
                val += sign * vec[j]
        residual = max(residual, abs(val))
    scale = max(1.0, np.abs(vec).max() if len(vec) else 0.0)
    if residual > COCYCLE_TOL * scale:
        raise PreconditionError(
            f"{what} is not a cocycle: ||delta||_inf = {residual:.3e}"
        )


def birth_cochain(p, alpha):
    """Minimum-norm representative of [alpha] on L that vanishes identically on K.

    Two stages: (i) subtract a coboundary so the input restricts to zero on K
    (feasible exactly when the class is born between K and L); (ii) minimize
    over the remaining coboundary directions that preserve vanishing on K,
    i.e. delta(w) for w whose restriction to K is a cocycle of K.
    """
    k = p.degree
    fc = p.L.parent
    k_simplices, in_k, k1_simplices, _ = _simplex_lists(p)
    pos_k = {s: i for i, s in enumerate(k_simplices)}
    for s in alpha.coeffs:
        if s not in pos_k:
            raise InputError(f"alpha has support {s} outside L in degree {k}")
    a = alpha.to_vector(k_simplices)
    _check_cocycle(p.L, k, a, k_simplices, "alpha")

    if k == 0:
        # degree-0 classes have unique cocycle representatives
        if in_k.any() and np.abs(a[in_k]).max() > FEASIBILITY_TOL * max(1.0, np.abs(a).max()):
            raise PreconditionError(
                "class is not born between K and L: restriction to K is a "
                f"nonzero 0-cocycle (max |alpha|_K| = {np.abs(a[in_k]).max():.3e})"
            )
        out = a.copy()
        out[in_k] = 0.0
        return Cochain.from_vector(k, k_simplices, out)

    km1_idx_L = p.L.simplex_indices(k - 1)
    km1_simplices = [fc.simplices[i] for i in km1_idx_L]
    km1_in_k = km1_idx_L < p.K.size
    pos_km1 = {s: i for i, s in enumerate(km1_simplices)}

    # stage (i): solve delta_K f = alpha|_K on K, then remove delta_L(extend f)
    k_simplices_K = [s for s, m in zip(k_simplices, in_k) if m]
    a_K = a[in_k]
    if len(k_simplices_K) and np.abs(a_K).max() > 0:
        cols_K = [s for s, m in zip(km1_simplices, km1_in_k) if m]
        posK = {s: i for i, s in enumerate(cols_K)}
        dK = _coboundary_dense_rows(k_simplices_K, posK, len(cols_K))
        f = _lstsq(dK, a_K)
        res = np.abs(dK @ f - a_K).max() if len(a_K) else 0.0
        if res > FEASIBILITY_TOL * max(1.0, np.abs(a_K).max()):
            raise PreconditionError(
                "class is not born between K and L: restriction to K is not a "
                f"coboundary (residual {res:.3e})"
            )
        f_full = np.zeros(len(km1_simplices))
        f_full[km1_in_k] = f
        dL = _coboundary_dense_rows(k_simplices, pos_km1, len(km1_simplices))
        a0 = a - dL @ f_full
    else:
        dL = _coboundary_dense_rows(k_simplices, pos_km1, len(km1_simplices))
        a0 = a.copy()

    lead = np.abs(a0[in_k]).max() if in_k.any() else 0.0
    if lead > FEASIBILITY_TOL * max(1.0, np.abs(a0).max()):
        raise InternalConsistencyError(
            f"stage (i) left mass {lead:.3e} on K"
        )
    a0[in_k] = 0.0

    # stage (ii): coboundary directions delta(w) with (w|_K) a cocycle on K.
    # Basis: indicators of (k-1)-simplices outside K, plus zero-extended
    # cocycles of K. Such delta(w) vanish on K automatically, so the rows of
    # the least squares can be restricted to L \ K.
    free_cols = np.flatnonzero(~km1_in_k)
    cols_km1_K = [s for s, m in zip(km1_simplices, km1_in_k) if m]
    k_simplices_K_rows = [s for s, m in zip(k_simplices, in_k) if m]
    null_K = _cocycle_basis(k_simplices_K_rows, cols_km1_K, k - 1)
    w_basis = np.zeros((len(km1_simplices), len(free_cols) + null_K.shape[1]))
    for j, c in enumerate(free_cols):
        w_basis[c, j] = 1.0
    if null_K.shape[1]:
        w_basis[np.flatnonzero(km1_in_k), len(free_cols):] = null_K

    rows_free = np.flatnonzero(~in_k)
    A = (dL @ w_basis)[rows_free]
    # entries that are exactly zero in exact arithmetic may carry SVD noise;
    # left uncleaned they invite huge cancelling coefficients from lstsq
    A[np.abs(A) < 1e-12] = 0.0
    rhs = -a0[rows_free]
    g = _lstsq(A, rhs)
    eta = np.zeros(len(k_simplices))
    eta[rows_free] = a0[rows_free] + A @ g
    out = Cochain.from_vector(k, k_simplices, eta)
    _check_cocycle(p.L, k, eta, k_simplices, "birth cochain")
    return out


def death_cochain(p, beta):
    """Death cochain for a cocycle prescribed on K: delta_L of the best extension.

    Minimizes ||delta_L(extend(beta) + gamma)||_2 over gamma supported off K.
    The cochain is unique and representative-independent; the potential is any
    minimizer. A zero cochain means the class extends (it does not die).
    """
    k = p.degree
    k_simplices, in_k, k1_simplices, k1_idx = _simplex_lists(p)
    pos_k = {s: i for i, s in enumerate(k_simplices)}
    k_simplices_K = [s for s, m in zip(k_simplices, in_k) if m]
    for s in beta.coeffs:
        i = pos_k.get(s)
        if i is None or not in_k[i]:
            raise InputError(f"beta has support {s} outside K in degree {k}")
    b_vec_K = beta.to_vector(k_simplices_K)
    _check_cocycle(p.K, k, b_vec_K, k_simplices_K, "beta")

    b_full = np.zeros(len(k_simplices))
    b_full[in_k] = b_vec_K
    use_sparse = len(k1_simplices) * max(1, len(k_simplices)) > 250_000
    builder = _coboundary_sparse if use_sparse else _coboundary_dense_rows
    D = builder(k1_simplices, pos_k, len(k_simplices))
    b0 = D @ b_full

    free = np.flatnonzero(~in_k)
    A_free = D[:, free] if len(free) else D[:, :0]
    if sp.issparse(A_free):
        rows_mask = np.asarray((A_free != 0).sum(axis=1)).ravel() > 0
    else:
        rows_mask = np.abs(A_free).sum(axis=1) > 0
    rows_mask |= b0 != 0
    rows = np.flatnonzero(rows_mask)
    gamma = _lstsq(A_free[rows], -b0[rows])

    omega = b0.copy()
    if len(free):
        omega += A_free @ gamma
    # structurally a relative cocycle: zero on the (k+1)-simplices of K
    k1_in_K = k1_idx < p.K.size
    leak = np.abs(omega[k1_in_K]).max() if k1_in_K.any() else 0.0
    scale = max(1.0, np.abs(omega).max() if len(omega) else 0.0)
    if leak > COCYCLE_TOL * scale:
        raise InternalConsistencyError(f"death cochain leaks {leak:.3e} onto K")
    omega[k1_in_K] = 0.0

    potential = b_full.copy()
    if len(free):
        potential[free] = gamma
    # solver residual: the Dirichlet condition (Delta_up potential)|_{L \ K}
    lap = D.T @ omega
    residual = float(np.abs(lap[~in_k]).max()) if (~in_k).any() else 0.0

    return DeathSolution(
        potential=Cochain.from_vector(k, k_simplices, potential),
        cochain=Cochain.from_vector(k + 1, k1_simplices, omega),
        residual=residual,
    )


def verify_dirichlet(p, sol, beta):
    """Max |(up-Laplacian of the potential)| over simplices of L outside K."""
    k = p.degree
    k_simplices, in_k, k1_simplices, _ = _simplex_lists(p)
    pos_k = {s: i for i, s in enumerate(k_simplices)}
    D = _coboundary_dense_rows(k1_simplices, pos_k, len(k_simplices))
    pot = sol.potential.to_vector(k_simplices)
    lap = D.T @ (D @ pot)
    outside = ~in_k
    return float(np.abs(lap[outside]).max()) if outside.any() else 0.0


def _up_laplacian_blocks(p):
    k_simplices, in_k, k1_simplices, _ = _simplex_lists(p)
    pos_k = {s: i for i, s in enumerate(k_simplices)}
    D = _coboundary_dense_rows(k1_simplices, pos_k, len(k_simplices))
    lap = D.T @ D
    return k_simplices, in_k, k1_simplices, D, lap


def schur_death_norm(p, beta, mode="full"):
    """Squared death-cochain norm as a quadratic form, without solving for it.

    mode="full": Schur complement of the up Laplacian on the zero-extended
    cochains of K. mode="harmonic": quadratic form of the persistent up
    Laplacian of the pair, valid when beta is harmonic on K.
    """
    k = p.degree
    k_simplices, in_k, k1_simplices, D, lap = _up_laplacian_blocks(p)
    k_simplices_K = [s for s, m in zip(k_simplices, in_k) if m]
    b_vec_K = beta.to_vector(k_simplices_K)
    _check_cocycle(p.K, k, b_vec_K, k_simplices_K, "beta")
    U = np.flatnonzero(in_k)
    Pc = np.flatnonzero(~in_k)

    if mode == "full":
        luu = lap[np.ix_(U, U)]
        lup = lap[np.ix_(U, Pc)]
        lpp = lap[np.ix_(Pc, Pc)]
        schur = luu - lup @ np.linalg.pinv(lpp, rcond=PINV_CUTOFF) @ lup.T
        return float(b_vec_K @ schur @ b_vec_K)

    if mode != "harmonic":
        raise InputError(f"unknown mode {mode!r}")

    # harmonic precondition: beta also lies in the kernel of the down adjoint
    if k >= 1:
        km1_K = [p.L.parent.simplices[i] for i in p.K.simplex_indices(k - 1)]
        pos_km1 = {s: i for i, s in enumerate(km1_K)}
        dK = _coboundary_dense_rows(k_simplices_K, pos_km1, len(km1_K))
        down = dK.T @ b_vec_K
        if len(down) and np.abs(down).max() > COCYCLE_TOL * max(1.0, np.abs(b_vec_K).max()):
            raise PreconditionError(
                f"beta is not harmonic on K: ||(delta*)beta||_inf = {np.abs(down).max():.3e}"
            )
        Q = _nullspace(dK.T) if len(km1_K) else np.eye(len(k_simplices_K))
    else:
        Q = np.eye(len(k_simplices_K))

    # persistent up Laplacian by definition: restrict the adjoint of delta_L
    # to the cochains it maps into the zero-extension of ker(down adjoint).
    n_k1 = len(k1_simplices)
    if n_k1 == 0:
        return 0.0
    Dt = D.T  # C^{k+1}(L) -> C^k(L)
    cons_outside = Dt[Pc]
    if Q.shape[1] < len(U):
        proj_out = np.eye(len(U)) - Q @ Q.T
        cons_inside = proj_out @ Dt[U]
        constraints = np.vstack([cons_outside, cons_inside])
    else:
        constraints = cons_outside
    Xi = _nullspace(constraints)
    if Xi.shape[1] == 0:
        return 0.0
    B = Q.T @ (Dt[U] @ Xi)  # the pair boundary in orthonormal bases
    q = Q.T @ b_vec_K
    scale = max(1.0, np.abs(b_vec_K).max() if len(b_vec_K) else 0.0)
    if len(b_vec_K) and np.abs(Q @ q - b_vec_K).max() > FEASIBILITY_TOL * scale:
        raise PreconditionError("beta does not lie in the harmonic subspace of K")
    return float((B.T @ q) @ (B.T @ q))


def explicit_death_cochain(p, beta):
    """Closed-form death cochain via the block pseudoinverse of the up Laplacian."""
    k = p.degree
    k_simplices, in_k, k1_simplices, D, lap = _up_laplacian_blocks(p)
    k_simplices_K = [s for s, m in zip(k_simplices, in_k) if m]
    b_vec_K = beta.to_vector(k_simplices_K)
    _check_cocycle(p.K, k, b_vec_K, k_simplices_K, "beta")
    U = np.flatnonzero(in_k)
    Pc = np.flatnonzero(~in_k)
    ext = np.zeros(len(k_simplices))
    ext[U] = b_vec_K
    pot = ext.copy()
    if len(Pc):
        lpp = lap[np.ix_(Pc, Pc)]
        lpu = lap[np.ix_(Pc, U)]
        pot[Pc] = -np.linalg.pinv(lpp, rcond=PINV_CUTOFF) @ (lpu @ b_vec_K)
    omega = D @ pot
    return Cochain.from_vector(k + 1, k1_simplices, omega)


def solve_debug_obj(p, result, beta=None):
    """JSON-ready record of a solve: thresholds, residuals, objective, cochain.

    `result` is a birth cochain or a DeathSolution.
    """
    cochain = result.cochain if isinstance(result, DeathSolution) else result
    obj = {
        "K_threshold": p.K.threshold,
        "L_threshold": p.L.threshold,
        "degree": p.degree,
        "objective": cochain.norm2() ** 2,
        "cochain": [
            {"simplex": list(s), "value": v} for s, v in sorted(cochain)
        ],
        "residuals": {},
    }
    if isinstance(result, DeathSolution):
        obj["residuals"]["dirichlet"] = verify_dirichlet(p, result, beta)
        if beta is not None:
            restr = {
                s: result.potential[s] - beta[s]
                for s in beta.coeffs
            }
            obj["residuals"]["restriction"] = max(
                (abs(v) for v in restr.values()), default=0.0
            )
    else:
        leak = max(
            (abs(v) for s, v in cochain if p.K.contains(s)), default=0.0
        )
        obj["residuals"]["vanishing_on_K"] = leak
    return obj


def degree0_birth_cochain(p, bar):
    """Closed-form degree-0 birth cochain: the indicator of the birth vertex's
    merge cluster, clipped to the vertices present in L.

    Requires injective vertex values; otherwise falls back to the general
    solver with a warning.
    """
    import warnings

    from .persistence import representative_at

    if p.degree != 0:
        raise InputError("closed form only applies in degree 0")
    fc = p.L.parent
    vertex_idx = np.flatnonzero(fc.dims == 0)
    vertex_values = fc.values[vertex_idx]
    if len(np.unique(vertex_values)) != len(vertex_values):
        warnings.warn(
            "vertex values are not injective; falling back to the general solver"
        )
        return birth_cochain(p, representative_at(bar, p.L.threshold))

    # merge cluster: component of the birth vertex in the 1-skeleton strictly
    # below the death value
    parent = list(range(fc.vertex_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    death = bar.death
    for i in range(len(fc)):
        if fc.dims[i] == 1 and fc.values[i] < death:
            u, v = fc.simplices[i]
            parent[find(u)] = find(v)
    v0 = bar.birth_simplex[0]
    root = find(v0)
    coeffs = {}
    for i in vertex_idx:
        if i < p.L.size and find(fc.simplices[i][0]) == root:
            coeffs[fc.simplices[i]] = 1.0
    return Cochain(0, coeffs)
