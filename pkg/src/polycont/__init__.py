"""Numerical solver for square polynomial systems by homotopy continuation.

The package tracks solution paths of a one-parameter family of systems in
software extended precision (double, double-double, quad-double), and layers
several tools on top of the core tracker:

* blackbox solving of square systems from total-degree starts,
* witness sets, monodromy factorization and numerical membership tests
  for positive-dimensional solution components,
* exact monomial-map solutions of binomial systems via Smith normal form,
* an interactive tangent-circle (Apollonius) session with warm restarts,
* a command line front end and a small JSON-over-HTTP service.
"""

from .xnum import DomainError, ExtendedComplex, ExtendedReal, Precision
from .poly import (
    Coeff,
    DimensionMismatchError,
    Monomial,
    Polynomial,
    PolySystem,
    format_system,
    parse_system,
)
from .homotopy import (
    Homotopy,
    NotSquareError,
    StartSolutionSet,
    SupportMismatchError,
    ZeroDegreePolynomialError,
    coefficient_homotopy,
    make_homotopy,
    total_degree_start,
)
from .tracker import (
    PathResult,
    PathStatus,
    SolutionRecord,
    TrackerConfig,
    default_config,
    track_batch,
)
from .solver import (
    SolveReport,
    SolverOptions,
    bench_cyclic,
    bench_to_csv,
    dedupe,
    families_cyclic,
    format_solution,
    format_solutions,
    parse_solution_string,
    qualityup,
    solve_blackbox,
)
from .witness import (
    FactorPartition,
    LoopFailure,
    PathFailure,
    WitnessSet,
    embed,
    format_witness,
    membership_test,
    monodromy_breakup,
    move_slices,
    parse_witness,
    random_slices,
    read_witness,
    trace_test,
    witness_solve,
    write_witness,
)
from .maps import (
    MonomialMap,
    NotBinomialError,
    evaluate_map,
    format_map,
    parse_map,
    smith_normal_form,
    solve_binomials,
)
from .apollonius import (
    ApolloniusInput,
    ApolloniusOutput,
    Circle,
    IllPosedError,
    InvalidInputError,
    SessionCache,
    TangentCircle,
    apollonius_solve,
    apollonius_system,
    input_from_floats,
)
from .cli import main as cli_main

__all__ = [
    "ApolloniusInput",
    "ApolloniusOutput",
    "Circle",
    "Coeff",
    "DimensionMismatchError",
    "DomainError",
    "ExtendedComplex",
    "ExtendedReal",
    "FactorPartition",
    "Homotopy",
    "IllPosedError",
    "InvalidInputError",
    "LoopFailure",
    "Monomial",
    "MonomialMap",
    "NotBinomialError",
    "NotSquareError",
    "PathFailure",
    "PathResult",
    "PathStatus",
    "PolySystem",
    "Polynomial",
    "Precision",
    "SessionCache",
    "SolutionRecord",
    "SolveReport",
    "SolverOptions",
    "StartSolutionSet",
    "SupportMismatchError",
    "TangentCircle",
    "TrackerConfig",
    "WitnessSet",
    "ZeroDegreePolynomialError",
    "apollonius_solve",
    "apollonius_system",
    "bench_cyclic",
    "bench_to_csv",
    "cli_main",
    "coefficient_homotopy",
    "default_config",
    "dedupe",
    "embed",
    "evaluate_map",
    "families_cyclic",
    "format_map",
    "format_solution",
    "format_solutions",
    "format_system",
    "format_witness",
    "input_from_floats",
    "make_homotopy",
    "membership_test",
    "monodromy_breakup",
    "move_slices",
    "parse_map",
    "parse_solution_string",
    "parse_system",
    "parse_witness",
    "qualityup",
    "random_slices",
    "read_witness",
    "smith_normal_form",
    "solve_binomials",
    "solve_blackbox",
    "total_degree_start",
    "trace_test",
    "track_batch",
    "witness_solve",
    "write_witness",
]
