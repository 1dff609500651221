"""The block matrix of second partials of a Lagrangian in the jet coordinates,
and the diagonal-block sums used by the necessary condition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import ZERO, Constant, Expression, Point, add, compile_expression, diff_wrt_coord, free_coordinates
from .jet import JetSpec


@dataclass(frozen=True)
class HessianMatrix:
    """``entries[r][c]`` is the second partial of L by the coordinates of flat
    rank ``r`` and ``c`` (dependent-major, then order, then position)."""

    spec: JetSpec
    entries: tuple[tuple[Expression, ...], ...]

    @property
    def dim(self) -> int:
        return self.spec.dimension

    def _rows(self, j, k):
        spec = self.spec
        sl = spec.order_slice(k)
        base = (j - 1) * spec.block_size
        return range(base + sl.start, base + sl.stop)

    def block(self, j: int, jp: int, k: int, kp: int) -> tuple[tuple[Expression, ...], ...]:
        """Sub-block for dependents ``j, jp`` (1-based) and orders ``k, kp``,
        of shape ``p_k x p_kp``."""
        if not (1 <= j <= self.spec.m and 1 <= jp <= self.spec.m):
            raise IndexError(f"dependent indices {j}, {jp} outside 1..{self.spec.m}")
        return tuple(tuple(self.entries[r][c] for c in self._rows(jp, kp)) for r in self._rows(j, k))

    def block_shape(self, j: int, jp: int, k: int, kp: int) -> tuple[int, int]:
        b = self.block(j, jp, k, kp)
        return len(b), len(b[0]) if b else 0

    def nonzero_mask(self) -> np.ndarray:
        """Structural sparsity: True where the entry is not the constant 0."""
        return np.array([[e != ZERO for e in row] for row in self.entries], dtype=bool).reshape(self.dim, self.dim)


def build_hessian(lagrangian: Expression, spec: JetSpec) -> HessianMatrix:
    present = free_coordinates(lagrangian)
    dim = spec.dimension
    coords = spec.coordinates
    grid = [[ZERO] * dim for _ in range(dim)]
    for r in range(dim):
        if coords[r] not in present:
            continue
        first = diff_wrt_coord(lagrangian, coords[r])
        for c in range(r, dim):
            grid[r][c] = grid[c][r] = diff_wrt_coord(first, coords[c])
    return HessianMatrix(spec, tuple(tuple(row) for row in grid))


def evaluate_hessian_at(a: HessianMatrix, p: Point) -> np.ndarray:
    """Numeric ``A(p)``, symmetrized as ``(M + M^T)/2``."""
    dim = a.dim
    m = np.zeros((dim, dim))
    for r, row in enumerate(a.entries):
        for c, e in enumerate(row):
            if c < r and e is a.entries[c][r]:
                m[r, c] = m[c, r]
            elif isinstance(e, Constant):
                m[r, c] = e.value
            else:
                m[r, c] = compile_expression(e)(p.indep, p.jet)
    return 0.5 * (m + m.T)


@dataclass(frozen=True)
class NecessarySums:
    """``B[l]`` sums every entry of the order-(l, l) super-block over all
    dependent pairs."""

    B: tuple[Expression, ...]

    def evaluate_at(self, p: Point) -> np.ndarray:
        return np.array([compile_expression(b)(p.indep, p.jet) for b in self.B], dtype=float)


def build_necessary_sums(a: HessianMatrix) -> NecessarySums:
    spec = a.spec
    sums = []
    for l in range(spec.s + 1):
        total = ZERO
        for j in range(1, spec.m + 1):
            for jp in range(1, spec.m + 1):
                for row in a.block(j, jp, l, l):
                    for e in row:
                        total = add(total, e)
        sums.append(total)
    return NecessarySums(tuple(sums))
