"""Recursion-formula toolkit.

Layered architectures as recursion formulas: parse them, expand output
derivatives into propagation-path polynomials, compile them into
architecture graphs, verify the symbolic algebra against exact Jacobians
of small matrix networks, and run rank-based significance analysis on
accuracy tables.
"""

from .algebra import (
    BlockSymbol,
    CensusBin,
    PathPolynomial,
    PathTerm,
    StateExpansion,
    census,
    poly_add,
    poly_mul,
    render_poly,
)
from .archgraph import (
    ArchGraph,
    StructuralReport,
    build_graph,
    count_paths,
    direct_propagation_check,
    export,
    structural_equal,
)
from .builtins import BUILTIN_NAMES, builtin_spec
from .errors import (
    ActivationError,
    DegenerateError,
    DepthError,
    FormulaSyntaxError,
    NonAffineError,
    NonCausalError,
    RangeError,
    RecurError,
    SizeError,
    UnrealizableError,
)
from .expansion import (
    DEFAULT_DEPTH_CAP,
    DerivativeQuery,
    StructureReport,
    check_structure,
    derivative,
    derivative_bruteforce,
    unroll,
    value_equivalence,
    value_equivalence_report,
    verify_chain_identity,
)
from .numeric import (
    ConcreteNet,
    JacobianCheckResult,
    check_derivative,
    eval_polynomial,
    finite_diff_check,
    forward,
    instantiate,
    jacobian_exact,
)
from .parser import (
    ArchitectureSpec,
    BaseCase,
    CoefficientExpr,
    RecursionRule,
    RuleTerm,
    parse,
    parse_file,
    render,
)
from .stats import (
    AccuracyTable,
    FriedmanGraphData,
    FriedmanResult,
    NemenyiResult,
    RankMatrix,
    betainc,
    f_distribution_sf,
    fixture_table,
    friedman,
    friedman_graph_data,
    load_table,
    nemenyi,
    rank,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyTable",
    "ActivationError",
    "ArchGraph",
    "ArchitectureSpec",
    "BUILTIN_NAMES",
    "BaseCase",
    "BlockSymbol",
    "CensusBin",
    "CoefficientExpr",
    "ConcreteNet",
    "DEFAULT_DEPTH_CAP",
    "DegenerateError",
    "DepthError",
    "DerivativeQuery",
    "FormulaSyntaxError",
    "FriedmanGraphData",
    "FriedmanResult",
    "JacobianCheckResult",
    "NemenyiResult",
    "NonAffineError",
    "NonCausalError",
    "PathPolynomial",
    "PathTerm",
    "RangeError",
    "RankMatrix",
    "RecurError",
    "RecursionRule",
    "RuleTerm",
    "SizeError",
    "StateExpansion",
    "StructuralReport",
    "StructureReport",
    "UnrealizableError",
    "betainc",
    "build_graph",
    "builtin_spec",
    "census",
    "check_derivative",
    "check_structure",
    "count_paths",
    "derivative",
    "derivative_bruteforce",
    "direct_propagation_check",
    "eval_polynomial",
    "export",
    "f_distribution_sf",
    "finite_diff_check",
    "fixture_table",
    "forward",
    "friedman",
    "friedman_graph_data",
    "instantiate",
    "jacobian_exact",
    "load_table",
    "nemenyi",
    "parse",
    "parse_file",
    "poly_add",
    "poly_mul",
    "rank",
    "render",
    "render_poly",
    "structural_equal",
    "unroll",
    "value_equivalence",
    "value_equivalence_report",
    "verify_chain_identity",
]
