"""Symbolic Euler-Lagrange equations, the jet-space Hessian of a Lagrangian,
and sampled second-order extremum tests for variational problems."""

from .analysis import (
    ClassificationReport,
    NecessaryVerdict,
    Numerics,
    Problem,
    SufficientVerdict,
    check_critical,
    classify,
    necessary_verdict,
    second_variation_oracle,
    sufficient_verdict,
)
from .errors import (
    BadBounds,
    DomainError,
    ExpressionSyntaxError,
    InvalidCoordinate,
    MissingKey,
    MissingSection,
    NonFiniteEntry,
    OrderExceeded,
    ParseError,
    TooManyNodes,
    UnboundCoordinate,
    UnknownIdentifier,
    VarcondError,
)
from .expr import Expression, Point, diff_wrt_coord, diff_wrt_indep, evaluate, free_coordinates, simplify, substitute
from .hessian import HessianMatrix, NecessarySums, build_hessian, build_necessary_sums, evaluate_hessian_at
from .jet import JetCoordinate, JetSpec, enumerate_order, jet_dimension, order_size, prolong_candidate, rank, unrank
from .numerics import BoxDomain, Definiteness, DefinitenessKind, classify_definiteness, integrate_box, symmetric_eigenvalues
from .parser import parse_expression, parse_problem
from .varops import EulerLagrangeSystem, euler_lagrange_system, euler_operator, total_derivative

__version__ = "0.1.0"
