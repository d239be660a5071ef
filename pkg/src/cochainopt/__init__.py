"""Birth/death cochains, window content and differentiable topological losses."""

from .complexes import (
    Cochain,
    FilteredComplex,
    Snapshot,
    build_lower_star,
    build_vr,
    coboundary,
    extend_by_zero,
    restrict,
    triangulate_grid,
    vr_from_distances,
)
from .content import (
    ContentReport,
    EpsilonFrame,
    birth_content,
    content_gradient,
    content_report,
    death_content,
    grad_to_points,
    grad_to_vertex_values,
    grad_to_weights,
    is_generic,
    make_frame,
    multi_content,
    relaxed_content,
)
from .errors import (
    CochainoptError,
    InputError,
    InternalConsistencyError,
    PreconditionError,
)
from .optimize import (
    OptConfig,
    OptRun,
    mask_from_gradient,
    one_step_weights,
    penalty_ball,
    project_simplex,
    run_feature_weights,
    run_image_repair,
    run_point_cloud,
    sliding_window,
)
from .persistence import (
    Bar,
    Barcode,
    compute_persistence,
    reduction_backend,
    representative_at,
    select_bar,
)
from .solvers import (
    DeathSolution,
    PairProblem,
    birth_cochain,
    death_cochain,
    degree0_birth_cochain,
    explicit_death_cochain,
    schur_death_norm,
    verify_dirichlet,
)

__version__ = "0.1.0"
