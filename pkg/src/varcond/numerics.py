"""Numerical kernels: box quadrature, a cyclic Jacobi eigensolver and
definiteness classification of symmetric matrices."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import BadBounds, NonFiniteEntry, TooManyNodes

MAX_QUADRATURE_NODES = 10**7


@dataclass(frozen=True)
class BoxDomain:
    """Open box ``]a_1, b_1[ x ... x ]a_n, b_n[``."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        bounds = tuple((float(a), float(b)) for a, b in self.bounds)
        if not bounds:
            raise BadBounds("domain needs at least one axis")
        for i, (a, b) in enumerate(bounds, 1):
            if not (math.isfinite(a) and math.isfinite(b)):
                raise BadBounds(f"axis {i}: bounds must be finite, got {a} {b}")
            if not a < b:
                raise BadBounds(f"axis {i}: lower bound {a} must be < upper bound {b}")
        object.__setattr__(self, "bounds", bounds)

    @property
    def n(self) -> int:
        return len(self.bounds)

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in self.bounds)

    def midpoint_grid(self, counts) -> np.ndarray:
        """Cell midpoints ``a + (t + 1/2)(b - a)/g`` on a ``g_1 x ... x g_n``
        grid, shape ``(prod g, n)``, first axis varying slowest."""
        if len(counts) != self.n:
            raise ValueError(f"grid needs {self.n} counts, got {len(counts)}")
        axes = []
        for (a, b), g in zip(self.bounds, counts):
            if g < 1:
                raise ValueError("grid counts must be >= 1")
            axes.append([a + (t + 0.5) * (b - a) / g for t in range(g)])
        return np.array(list(product(*axes)), dtype=float).reshape(-1, self.n)


def gauss_legendre(nodes: int, a: float = -1.0, b: float = 1.0):
    """Nodes and weights of the ``nodes``-point Gauss-Legendre rule on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def box_rule(domain: BoxDomain, nodes_per_axis: int):
    """Tensor-product Gauss-Legendre nodes ``(N, n)`` and weights ``(N,)``."""
    if nodes_per_axis < 2:
        raise ValueError("nodes_per_axis must be >= 2")
    total = nodes_per_axis ** domain.n
    if total > MAX_QUADRATURE_NODES:
        raise TooManyNodes(f"{total} quadrature nodes exceed the limit of {MAX_QUADRATURE_NODES}")
    rules = [gauss_legendre(nodes_per_axis, a, b) for a, b in domain.bounds]
    pts = np.array(list(product(*(r[0] for r in rules))), dtype=float)
    wts = np.array([math.prod(ws) for ws in product(*(r[1] for r in rules))], dtype=float)
    return pts, wts


def integrate_box(f, domain: BoxDomain, nodes_per_axis: int, workers: int = 1, vectorized: bool = False) -> float:
    """Integrate ``f`` over ``domain`` with tensor-product Gauss-Legendre.

    Parameters
    ----------
    f : callable
        ``f(x)`` for a single point ``x`` of length n, or, with
        ``vectorized=True``, ``f(X)`` for the full ``(N, n)`` node array
        returning ``N`` values.
    nodes_per_axis : int
        Exact for polynomials of per-axis degree ``2*nodes_per_axis - 1``.
    workers : int
        Threads used to evaluate nodes when not vectorized.  The sum is
        always taken over the same node order, so the result does not
        depend on this.
    """
    pts, wts = box_rule(domain, nodes_per_axis)
    if vectorized:
        values = np.asarray(f(pts), dtype=float)
    elif workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = np.fromiter(pool.map(f, pts), dtype=float, count=len(pts))
    else:
        values = np.fromiter((f(x) for x in pts), dtype=float, count=len(pts))
    return float(np.sum(wts * values))


def _off_norm2(a):
    n = len(a)
    return sum(a[p, q] * a[p, q] for p in range(n) for q in range(p + 1, n)) * 2.0


def symmetric_eigenvalues(m, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix, ascending, by cyclic Jacobi.

    Sweeps rotate away every off-diagonal pair in row order until the
    off-diagonal Frobenius norm drops below ``1e-12 * ||M||_F``.
    """
    a = np.array(m, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteEntry("matrix has non-finite entries")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0)
    a = 0.5 * (a + a.T)
    target = 1e-12 * float(np.linalg.norm(a))
    for _ in range(max_sweeps):
        if math.sqrt(_off_norm2(a)) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) Givens rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
    return np.sort(np.diag(a))


class DefinitenessKind(str, enum.Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    NEGATIVE_DEFINITE = "NegativeDefinite"
    POSITIVE_SEMIDEFINITE = "PositiveSemidefinite"
    NEGATIVE_SEMIDEFINITE = "NegativeSemidefinite"
    INDEFINITE = "Indefinite"
    ZERO = "Zero"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Definiteness:
    kind: DefinitenessKind
    lambda_min: float
    lambda_max: float
    threshold: float


def classify_definiteness(m, tol: float) -> Definiteness:
    """Classify a symmetric matrix from its extreme eigenvalues.

    Eigenvalues within ``tol * max(1, ||M||_F)`` of zero count as zero.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    m = np.asarray(m, dtype=float)
    lam = symmetric_eigenvalues(m)
    thr = tol * max(1.0, float(np.linalg.norm(m)))
    lo = float(lam[0]) if lam.size else 0.0
    hi = float(lam[-1]) if lam.size else 0.0
    if abs(lo) <= thr and abs(hi) <= thr:
        kind = DefinitenessKind.ZERO
    elif lo > thr:
        kind = DefinitenessKind.POSITIVE_DEFINITE
    elif hi < -thr:
        kind = DefinitenessKind.NEGATIVE_DEFINITE
    elif lo < -thr and hi > thr:
        kind = DefinitenessKind.INDEFINITE
    elif lo >= -thr:
        kind = DefinitenessKind.POSITIVE_SEMIDEFINITE
    else:
        kind = DefinitenessKind.NEGATIVE_SEMIDEFINITE
    return Definiteness(kind, lo, hi, thr)
