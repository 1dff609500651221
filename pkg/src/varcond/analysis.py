"""Second-order classification of a candidate extremal.

For a problem ``J[u] = integral over a box of L(x, u^(s)(x)) dx`` and a closed-form
candidate ``u``, :func:`classify` runs

* the Euler-Lagrange residual check on a grid of cell midpoints,
* the sufficient test: the matrix of second partials of L in the jet
  coordinates, evaluated along the candidate, is positive (negative)
  definite at every grid point,
* the necessary test: the signs of the diagonal-block sums ``B_l``,
* optionally, a finite-difference check of the second variation against the
  integrated quadratic form, with random polynomial perturbations.

Every verdict is evidence from sampled points, not a proof.
"""

from __future__ import annotations

import enum
import functools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from .errors import DomainError
from .expr import (
    Constant,
    Expression,
    Point,
    compile_expression,
    free_coordinates,
    max_order,
    mul,
    power,
    sub,
    var,
)
from .hessian import HessianMatrix, NecessarySums, build_hessian, build_necessary_sums, evaluate_hessian_at
from .jet import JetSpec, prolong_candidate
from .numerics import BoxDomain, Definiteness, DefinitenessKind, box_rule, classify_definiteness
from .varops import EulerLagrangeSystem, euler_lagrange_system

DEFAULT_GRID = 9
DEFAULT_QUAD_NODES = 16
DEFAULT_TOL_PD = 1e-9
DEFAULT_TOL_RESIDUAL = 1e-7
DEFAULT_SEED = 42
ORACLE_STEP = 1e-4
PERTURBATION_DEGREE = 3


@dataclass(frozen=True)
class Numerics:
    grid: tuple[int, ...]
    quad_nodes: int = DEFAULT_QUAD_NODES
    tol_pd: float = DEFAULT_TOL_PD
    tol_residual: float = DEFAULT_TOL_RESIDUAL
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(int(g) for g in self.grid))
        if any(g < 1 for g in self.grid):
            raise ValueError("grid counts must be >= 1")
        if self.quad_nodes < 2:
            raise ValueError("quad_nodes must be >= 2")
        if not (self.tol_pd > 0 and self.tol_residual >= 0):
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class Problem:
    spec: JetSpec
    lagrangian: Expression
    domain: BoxDomain
    candidate: tuple[Expression, ...]
    numerics: Numerics = None

    def __post_init__(self):
        object.__setattr__(self, "candidate", tuple(self.candidate))
        if self.numerics is None:
            object.__setattr__(self, "numerics", Numerics((DEFAULT_GRID,) * self.spec.n))
        if self.domain.n != self.spec.n:
            raise ValueError(f"domain has {self.domain.n} axes, problem has n={self.spec.n}")
        if len(self.numerics.grid) != self.spec.n:
            raise ValueError(f"grid needs {self.spec.n} counts")
        if len(self.candidate) != self.spec.m:
            raise ValueError(f"expected {self.spec.m} candidate functions, got {len(self.candidate)}")
        for j, e in enumerate(self.candidate, 1):
            if free_coordinates(e):
                raise ValueError(f"candidate {j} must depend on the independent variables only")
        if max_order(self.lagrangian) > self.spec.s:
            raise ValueError(f"Lagrangian has order {max_order(self.lagrangian)} > s={self.spec.s}")
        bad = [c for c in free_coordinates(self.lagrangian) if c.dep > self.spec.m or c.n != self.spec.n]
        if bad:
            raise ValueError(f"Lagrangian uses coordinates outside the jet space: {bad}")

    def scaled(self, factor: float) -> "Problem":
        return replace(self, lagrangian=mul(Constant(factor), self.lagrangian))

    def with_numerics(self, **changes) -> "Problem":
        return replace(self, numerics=replace(self.numerics, **changes))


def worker_count() -> int:
    """Thread cap from ``VARCOND_THREADS`` (default: up to 4 CPUs)."""
    default = min(4, os.cpu_count() or 1)
    raw = os.environ.get("VARCOND_THREADS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


def _pmap(fn, items):
    # ordered results regardless of worker count
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class _Derived:
    el: EulerLagrangeSystem
    hessian: HessianMatrix
    sums: NecessarySums
    jet_fns: tuple  # (coordinate, compiled candidate derivative) up to order 2s
    el_fns: tuple


@functools.lru_cache(maxsize=32)
def _derive(p: Problem) -> _Derived:
    el = euler_lagrange_system(p.lagrangian, p.spec)
    hessian = build_hessian(p.lagrangian, p.spec)
    sums = build_necessary_sums(hessian)
    prolonged = prolong_candidate(p.spec, p.candidate, order=2 * p.spec.s)
    jet_fns = tuple((c, compile_expression(e)) for c, e in prolonged.items())
    el_fns = tuple(compile_expression(e) for e in el.equations)
    return _Derived(el, hessian, sums, jet_fns, el_fns)


def _fmt_point(x):
    return "(" + ", ".join(f"{v:.17g}" for v in x) + ")"


def _candidate_jet(d: _Derived, x, max_ord=None):
    jet = {}
    for c, f in d.jet_fns:
        if max_ord is None or c.order <= max_ord:
            jet[c] = f(x, jet)
    return jet


def grid_points(p: Problem) -> np.ndarray:
    return p.domain.midpoint_grid(p.numerics.grid)


def _at_point(fn, x):
    try:
        return fn(x)
    except DomainError as exc:
        raise DomainError(f"{exc} at x = {_fmt_point(x)}", point=tuple(x)) from exc


def check_critical(p: Problem) -> tuple[float, ...]:
    """Largest absolute Euler-Lagrange residual per dependent variable over
    the midpoint grid."""
    d = _derive(p)

    def residuals(x):
        x = tuple(float(v) for v in x)
        jet = _candidate_jet(d, x)
        return [abs(f(x, jet)) for f in d.el_fns]

    rows = _pmap(lambda x: _at_point(residuals, x), grid_points(p))
    return tuple(float(max(r[j] for r in rows)) for j in range(p.spec.m))


def is_critical(p: Problem, residuals=None) -> bool:
    residuals = check_critical(p) if residuals is None else residuals
    return all(r <= p.numerics.tol_residual for r in residuals)


@dataclass(frozen=True)
class GridPointResult:
    x: tuple[float, ...]
    definiteness: DefinitenessKind
    lambda_min: float
    lambda_max: float
    B: tuple[float, ...]


def hessian_along_candidate(p: Problem, x) -> np.ndarray:
    d = _derive(p)
    x = tuple(float(v) for v in x)
    return evaluate_hessian_at(d.hessian, Point(x, _candidate_jet(d, x, p.spec.s)))


def analyze_points(p: Problem) -> tuple[GridPointResult, ...]:
    """Spectrum extremes, definiteness class and ``B_l`` at every grid point,
    in grid order."""
    d = _derive(p)

    def one(x):
        x = tuple(float(v) for v in x)
        pt = Point(x, _candidate_jet(d, x, p.spec.s))
        a = evaluate_hessian_at(d.hessian, pt)
        cls: Definiteness = classify_definiteness(a, p.numerics.tol_pd)
        b = d.sums.evaluate_at(pt)
        return GridPointResult(x, cls.kind, cls.lambda_min, cls.lambda_max, tuple(float(v) for v in b))

    return tuple(_pmap(lambda x: _at_point(one, x), grid_points(p)))


class SufficientVerdict(str, enum.Enum):
    LOCAL_MIN = "LocalMinEvidence"
    LOCAL_MAX = "LocalMaxEvidence"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


class NecessaryVerdict(str, enum.Enum):
    MIN_HOLDS = "MinNecessaryHolds"
    MAX_HOLDS = "MaxNecessaryHolds"
    BOTH_FAIL = "BothFail"
    DEGENERATE = "BothHoldDegenerate"
    SKIPPED = "Skipped"

    def __str__(self):
        return self.value


NOT_CRITICAL = "NotCritical"


def _sufficient_from_points(points) -> SufficientVerdict:
    kinds = {pt.definiteness for pt in points}
    if kinds == {DefinitenessKind.POSITIVE_DEFINITE}:
        return SufficientVerdict.LOCAL_MIN
    if kinds == {DefinitenessKind.NEGATIVE_DEFINITE}:
        return SufficientVerdict.LOCAL_MAX
    return SufficientVerdict.INCONCLUSIVE


def _necessary_from_points(points, tol) -> NecessaryVerdict:
    any_pos = any_neg = False
    for pt in points:
        thr = tol * max(1.0, max(abs(b) for b in pt.B))
        any_pos |= any(b > thr for b in pt.B)
        any_neg |= any(b < -thr for b in pt.B)
    if any_pos and any_neg:
        return NecessaryVerdict.BOTH_FAIL
    if any_neg:
        return NecessaryVerdict.MAX_HOLDS
    if any_pos:
        return NecessaryVerdict.MIN_HOLDS
    return NecessaryVerdict.DEGENERATE


def sufficient_verdict(p: Problem, residuals=None, points=None):
    """``(verdict, points, flags)`` for the pointwise-definiteness test.

    A candidate whose residual exceeds ``tol_residual`` is not tested: the
    verdict is Inconclusive and flags contain ``"NotCritical"``.
    """
    critical = is_critical(p, residuals)
    points = analyze_points(p) if points is None else points
    if not critical:
        return SufficientVerdict.INCONCLUSIVE, points, (NOT_CRITICAL,)
    return _sufficient_from_points(points), points, ()


def necessary_verdict(p: Problem, residuals=None, points=None):
    """``(verdict, points, flags)`` from the signs of ``B_l`` over the grid."""
    critical = is_critical(p, residuals)
    points = analyze_points(p) if points is None else points
    if not critical:
        return NecessaryVerdict.SKIPPED, points, (NOT_CRITICAL,)
    return _necessary_from_points(points, p.numerics.tol_pd), points, ()


# -- second-variation oracle ---------------------------------------------------


def random_perturbation(spec: JetSpec, rng: np.random.Generator, degree: int = PERTURBATION_DEGREE):
    """One tensor polynomial per dependent variable, per-axis degree <= ``degree``,
    coefficients uniform in [-1, 1]."""
    out = []
    for _ in range(spec.m):
        terms = Constant(0)
        for powers in product(range(degree + 1), repeat=spec.n):
            c = float(rng.uniform(-1.0, 1.0))
            mono = Constant(c)
            for i, a in enumerate(powers, 1):
                mono = mul(mono, power(var(i), a))
            terms = terms + mono
        out.append(terms)
    return tuple(out)


def boundary_weight(domain: BoxDomain, s: int) -> Expression:
    """``prod_i ((x_i - a_i)(b_i - x_i))^s``; kills boundary terms up to order s-1."""
    w = Constant(1)
    for i, (a, b) in enumerate(domain.bounds, 1):
        w = mul(w, power(mul(sub(var(i), Constant(a)), sub(Constant(b), var(i))), s))
    return w


class _Quadrature:
    """Candidate and perturbation jets tabulated at the quadrature nodes."""

    def __init__(self, p: Problem):
        self.p = p
        self.d = _derive(p)
        self.nodes, self.weights = box_rule(p.domain, p.numerics.quad_nodes)
        self.xs = [tuple(float(v) for v in x) for x in self.nodes]
        self.coords = p.spec.coordinates
        s = p.spec.s
        self.ubar = _pmap(lambda x: _at_point(lambda y: _candidate_jet(self.d, y, s), x), self.xs)
        self._hess = None
        self.L = compile_expression(p.lagrangian)

    def hessians(self):
        if self._hess is None:
            h = self.d.hessian
            self._hess = _pmap(
                lambda q: _at_point(lambda x: evaluate_hessian_at(h, Point(x, self.ubar[q])), self.xs[q]),
                range(len(self.xs)),
            )
        return self._hess

    def perturbation_jets(self, phi):
        fns = [(c, compile_expression(e)) for c, e in prolong_candidate(self.p.spec, phi).items()]
        return _pmap(lambda x: _at_point(lambda y: {c: f(y, {}) for c, f in fns}, x), self.xs)

    def functional(self, phi_jets, eps: float) -> float:
        def at(q):
            x = self.xs[q]
            ub = self.ubar[q]
            ph = phi_jets[q]
            jet = {c: ub[c] + eps * ph[c] for c in self.coords}
            return _at_point(lambda y: self.L(y, jet), x)

        values = np.array(_pmap(at, range(len(self.xs))), dtype=float)
        return float(np.sum(self.weights * values))

    def quadratic_form(self, phi_jets) -> float:
        hs = self.hessians()
        values = np.empty(len(self.xs))
        for q, a in enumerate(hs):
            v = np.array([phi_jets[q][c] for c in self.coords])
            values[q] = v @ a @ v
        return float(np.sum(self.weights * values))


def second_variation(p: Problem, phi, h: float = ORACLE_STEP, _quad=None) -> tuple[float, float]:
    """``(FD, QF)`` for perturbation ``phi`` (one expression in x per dependent).

    FD is the central second difference of ``F(eps) = J[u + eps*phi]`` with
    step ``h``; QF integrates ``phi^(s) . A(x, u^(s)) . phi^(s)``.  Both use
    the problem's quadrature rule.
    """
    quad = _quad or _Quadrature(p)
    jets = quad.perturbation_jets(tuple(phi))
    f0 = quad.functional(jets, 0.0)
    fd = (quad.functional(jets, h) - 2.0 * f0 + quad.functional(jets, -h)) / (h * h)
    return fd, quad.quadratic_form(jets)


def first_variation(p: Problem, phi, h: float = ORACLE_STEP, _quad=None) -> float:
    """Central first difference ``(F(h) - F(-h)) / 2h`` of ``J[u + eps*phi]``."""
    quad = _quad or _Quadrature(p)
    jets = quad.perturbation_jets(tuple(phi))
    return (quad.functional(jets, h) - quad.functional(jets, -h)) / (2.0 * h)


@dataclass(frozen=True)
class OracleTrial:
    fd_second: float
    quadratic_form: float
    rel_gap: float
    first_variation: float


@dataclass(frozen=True)
class OracleRecord:
    """Worst-trial summary plus every trial, in draw order."""

    fd_second: float
    quadratic_form: float
    rel_gap: float
    first_variation: float
    seed: int
    step: float
    trials: tuple[OracleTrial, ...] = field(default=())


def second_variation_oracle(p: Problem, trials: int = 8, seed: int | None = None, h: float = ORACLE_STEP) -> OracleRecord:
    """Compare the finite-difference second variation with the integrated
    quadratic form over ``trials`` seeded random perturbations.

    Each trial also measures the first variation along the same
    perturbation multiplied by :func:`boundary_weight`; it should vanish at
    a critical candidate.  Trial ``i`` draws from the ``i``-th child of the
    seed sequence, so results do not depend on the trial count.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seed = p.numerics.seed if seed is None else seed
    quad = _Quadrature(p)
    weight = boundary_weight(p.domain, p.spec.s)
    out = []
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        phi = random_perturbation(p.spec, rng)
        fd, qf = second_variation(p, phi, h, _quad=quad)
        fv = first_variation(p, tuple(mul(e, weight) for e in phi), h, _quad=quad)
        gap = abs(fd - qf) / max(1.0, abs(qf))
        out.append(OracleTrial(fd, qf, gap, fv))
    worst = max(out, key=lambda t: t.rel_gap)
    return OracleRecord(
        fd_second=worst.fd_second,
        quadratic_form=worst.quadratic_form,
        rel_gap=worst.rel_gap,
        first_variation=max(abs(t.first_variation) for t in out),
        seed=seed,
        step=h,
        trials=tuple(out),
    )


# -- orchestration -------------------------------------------------------------


@dataclass(frozen=True)
class ClassificationReport:
    problem: Problem
    residuals: tuple[float, ...]
    points: tuple[GridPointResult, ...]
    verdict_sufficient: SufficientVerdict
    verdict_necessary: NecessaryVerdict
    flags: tuple[str, ...] = ()
    oracle: OracleRecord | None = None

    @property
    def critical(self) -> bool:
        return NOT_CRITICAL not in self.flags

    def first_offending_point(self) -> GridPointResult | None:
        """First grid point that is not strictly definite in the direction of
        the majority, for reporting an Inconclusive verdict."""
        if self.verdict_sufficient is not SufficientVerdict.INCONCLUSIVE or not self.points:
            return None
        want = self.points[0].definiteness
        if want not in (DefinitenessKind.POSITIVE_DEFINITE, DefinitenessKind.NEGATIVE_DEFINITE):
            return self.points[0]
        for pt in self.points:
            if pt.definiteness is not want:
                return pt
        return None


def classify(p: Problem, oracle_trials: int = 0, seed: int | None = None) -> ClassificationReport:
    residuals = check_critical(p)
    points = analyze_points(p)
    suff, _, flags = sufficient_verdict(p, residuals, points)
    nec, _, _ = necessary_verdict(p, residuals, points)
    oracle = second_variation_oracle(p, oracle_trials, seed) if oracle_trials > 0 else None
    return ClassificationReport(p, residuals, points, suff, nec, flags, oracle)


__all__ = [
    "ClassificationReport",
    "GridPointResult",
    "NecessaryVerdict",
    "Numerics",
    "OracleRecord",
    "OracleTrial",
    "Problem",
    "SufficientVerdict",
    "analyze_points",
    "boundary_weight",
    "check_critical",
    "classify",
    "first_variation",
    "grid_points",
    "hessian_along_candidate",
    "is_critical",
    "necessary_verdict",
    "random_perturbation",
    "second_variation",
    "second_variation_oracle",
    "sufficient_verdict",
    "worker_count",
]
