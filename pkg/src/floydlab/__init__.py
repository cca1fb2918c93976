"""Trajectory representation of 1-D quantum motion for the free particle,
the finite square well and the linear potential, with tools to study the
E -> infinity and hbar -> 0 correspondence limits."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AiryOverflowError,
    BracketError,
    ConfigError,
    DomainError,
    EigenvalueError,
    EvalError,
    FloydlabError,
    NoLevelError,
    QuadratureError,
    SingularError,
    StepError,
    UnwrapError,
)
from .core import (  # noqa: E402
    InitialValues,
    Microstate,
    PhysicalContext,
    classical_reference,
    make_microstate,
    microstate_from_initial_values,
    microstate_to_initial_values,
)
from .specfun import AiryValues, Quadrature, airy_eval, cycle_average, find_root, numeric_derivative  # noqa: E402
from .basis import (  # noqa: E402
    BasisPair,
    FreePotential,
    LinearPotential,
    SquareWellPotential,
    basis_family,
    basis_free,
    basis_linear,
    basis_square_well,
    make_basis,
)
from .qshje import (  # noqa: E402
    QshjePoint,
    conjugate_momentum,
    qshje_point,
    qshje_residual,
    reduced_action,
    schwarzian,
)
from .dynamics import (  # noqa: E402
    Trajectory,
    TransitionWidth,
    averaged_free_action,
    averaged_free_time,
    principal_function,
    trajectory,
    trajectory_time,
    trajectory_time_linear_closed,
    transition_width,
)
from .correspondence import (  # noqa: E402
    CycleStats,
    SweepResult,
    SweepScenario,
    cycle_stats,
    indeterminacy_envelope,
    limit_sweep,
)
from .squarewell import (  # noqa: E402
    Level,
    TimingReport,
    WellSpectrum,
    dwell_time,
    fractional_forbidden_time,
    libration_period,
    solve_symmetric_levels,
)
