"""Total derivatives, the variational derivative and Euler-Lagrange systems."""

from __future__ import annotations

from dataclasses import dataclass

from .expr import (
    ZERO,
    Expression,
    JetCoord,
    add,
    diff_wrt_coord,
    diff_wrt_indep,
    free_coordinates,
    max_order,
    mul,
    neg,
)
from .jet import JetSpec


def total_derivative(e: Expression, i: int, spec: JetSpec) -> Expression:
    """``D_{x_i} e``: explicit x-derivative plus the chain rule through every
    jet coordinate present in ``e``.  The result has order ``order(e) + 1``."""
    if not 1 <= i <= spec.n:
        raise ValueError(f"axis {i} outside 1..{spec.n}")
    out = diff_wrt_indep(e, i)
    for c in sorted(free_coordinates(e), key=lambda c: c.sort_key()):
        out = add(out, mul(diff_wrt_coord(e, c), JetCoord(c.raised(i))))
    return out


def repeated_total_derivative(e: Expression, k, spec: JetSpec) -> Expression:
    """Apply ``D_{x_1}^{k_1} ... D_{x_n}^{k_n}`` (x_1 first)."""
    for i, ki in enumerate(k, 1):
        for _ in range(ki):
            e = total_derivative(e, i, spec)
    return e


def euler_operator(e: Expression, j: int, spec: JetSpec) -> Expression:
    """Variational derivative of ``e`` with respect to ``u^j``.

    Sums ``(-1)^|k| D^k (de/du^j_k)`` over the coordinates ``u^j_k`` that
    occur in ``e``; absent coordinates contribute nothing.
    """
    if not 1 <= j <= spec.m:
        raise ValueError(f"dependent index {j} outside 1..{spec.m}")
    out = ZERO
    coords = sorted((c for c in free_coordinates(e) if c.dep == j), key=lambda c: c.sort_key())
    for c in coords:
        term = repeated_total_derivative(diff_wrt_coord(e, c), c.idx, spec)
        out = add(out, neg(term) if c.order % 2 else term)
    return out


@dataclass(frozen=True)
class EulerLagrangeSystem:
    equations: tuple[Expression, ...]
    max_order: int

    def __iter__(self):
        return iter(self.equations)

    def __len__(self):
        return len(self.equations)

    def __getitem__(self, j):
        return self.equations[j]


def euler_lagrange_system(lagrangian: Expression, spec: JetSpec) -> EulerLagrangeSystem:
    eqs = tuple(euler_operator(lagrangian, j, spec) for j in range(1, spec.m + 1))
    return EulerLagrangeSystem(eqs, max((max_order(e) for e in eqs), default=0))
