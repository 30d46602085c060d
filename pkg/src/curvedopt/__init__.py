"""Gauges and support functions of convex bodies, curved (strongly convex)
approximations of them, curvature certificates, and Follow the Leader regret
certificates for online linear optimization."""

__version__ = "0.1.0"

from .bodies import (
    Ball,
    ConvexBody,
    Ellipsoid,
    HalfspacePolytope,
    LpBall,
    Membership,
    SandwichRadii,
    VertexPolytope,
    gauge,
    gauge_subgradient,
    membership,
    polar,
    sandwich_radii,
    support,
    support_argmax,
)
from .certify import (
    ModulusReport,
    Notion,
    check_fn_strong_convexity,
    check_nonmidpoint,
    check_set_strong_convexity,
    check_sphere_lipschitz,
    check_two_convex,
    check_two_smooth,
)
from .curving import (
    CurvedBody,
    DecompositionCertificate,
    MinkowskiRounding,
    TChoice,
    WeakOptResult,
    WeakOptStatus,
    choose_t_for_eps,
    curved_gauge,
    curved_gauge_subgradient,
    polar_decomposition_max,
    weak_optimize,
)
from .errors import *  # noqa: F401,F403
from .frank_wolfe import FwTrace, Quadratic, StepRule, fw_solve, linear_oracle
from .online import (
    AlternatingBad,
    FollowTheLeader,
    GameTrace,
    GrowthCondition,
    Hinted,
    NonNegative,
    RegretReport,
    ftl_step,
    hints_reduction,
    log_estimate_check,
    nonneg_linearization,
    play_game,
    regret_report,
)
from .specfile import body_from_spec, dump_body, load_body
