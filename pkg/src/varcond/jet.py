"""Jet-space coordinates: multi-index enumeration, ranking and prolongation.

A jet coordinate ``u^j_k`` is identified by the dependent index ``j``
(1-based) and a multi-index ``k = (k_1, ..., k_n)`` counting how often each
independent variable is differentiated.  Within one order ``l`` the
coordinates are listed as the nondecreasing variable sequences of length
``l`` in lexicographic order, e.g. for ``n = 2``::

    u_x1x1, u_x1x2, u_x2x2

and the flat jet vector is ordered dependent-major, then by order, then by
position inside the order table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations_with_replacement
from math import comb

from .errors import InvalidCoordinate

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")


@dataclass(frozen=True)
class JetCoordinate:
    dep: int
    idx: tuple[int, ...]

    @property
    def order(self) -> int:
        return sum(self.idx)

    @property
    def n(self) -> int:
        return len(self.idx)

    def raised(self, i: int) -> "JetCoordinate":
        """The coordinate obtained by one more derivative along axis ``i`` (1-based)."""
        k = list(self.idx)
        k[i - 1] += 1
        return JetCoordinate(self.dep, tuple(k))

    def sort_key(self):
        # descending lexicographic count vectors == lexicographic sorted sequences
        return (self.dep, self.order, tuple(-ki for ki in self.idx))

    def name(self, dep_names=None, indep_names=None) -> str:
        dname = dep_names[self.dep - 1] if dep_names else f"u{self.dep}"
        if self.order == 0:
            return dname
        parts = []
        for i, ki in enumerate(self.idx):
            iname = indep_names[i] if indep_names else f"x{i + 1}"
            parts.append(iname * ki)
        return f"{dname}_{''.join(parts)}"

    def __str__(self):
        return self.name()


def order_size(n: int, l: int) -> int:
    """Number of distinct order-``l`` partial derivatives in ``n`` variables."""
    if n < 1 or l < 0:
        raise ValueError(f"order_size needs n >= 1 and l >= 0, got n={n}, l={l}")
    return comb(n + l - 1, l)


def closed_form_order(n: int, l: int) -> list[tuple[int, ...]]:
    out = []
    for seq in combinations_with_replacement(range(n), l):
        k = [0] * n
        for i in seq:
            k[i] += 1
        out.append(tuple(k))
    return out


def recursive_order(n: int, l: int) -> list[tuple[int, ...]]:
    """Order-``l`` multi-indices built by repeated differentiation.

    Each entry of the order-``l-1`` list is differentiated by x1, ..., xn in
    turn and entries already produced are dropped, keeping first
    occurrences.  Kept as an independent check of :func:`closed_form_order`.
    """
    if l == 0:
        return [(0,) * n]
    current = [tuple(int(i == j) for i in range(n)) for j in range(n)]
    for _ in range(l - 1):
        seen = set()
        nxt = []
        for k in current:
            for i in range(n):
                kk = k[:i] + (k[i] + 1,) + k[i + 1:]
                if kk not in seen:
                    seen.add(kk)
                    nxt.append(kk)
        current = nxt
    return current


def _check_names(names, what):
    for name in names:
        if not _NAME_RE.match(name):
            raise ValueError(f"invalid {what} name {name!r}")
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate {what} names in {names!r}")


@dataclass(frozen=True)
class JetSpec:
    """Geometry of the jet space with ``n`` independent, ``m`` dependent
    variables and derivatives up to order ``s``.

    Optional ``indep_names`` / ``dep_names`` are display and parsing
    vocabulary only; they do not take part in coordinate identity.
    """

    n: int
    m: int
    s: int
    indep_names: tuple[str, ...] | None = None
    dep_names: tuple[str, ...] | None = None
    _tables: tuple = field(init=False, repr=False, compare=False, hash=False)
    _position: dict = field(init=False, repr=False, compare=False, hash=False)
    _offsets: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.s < 0:
            raise ValueError(f"need n, m >= 1 and s >= 0, got {self.n}, {self.m}, {self.s}")
        if self.indep_names is not None:
            object.__setattr__(self, "indep_names", tuple(self.indep_names))
            if len(self.indep_names) != self.n:
                raise ValueError("indep_names must have n entries")
            _check_names(self.indep_names, "independent")
        if self.dep_names is not None:
            object.__setattr__(self, "dep_names", tuple(self.dep_names))
            if len(self.dep_names) != self.m:
                raise ValueError("dep_names must have m entries")
            _check_names(self.dep_names, "dependent")
        tables = tuple(tuple(closed_form_order(self.n, l)) for l in range(self.s + 1))
        position = {}
        offsets = []
        off = 0
        for l, table in enumerate(tables):
            offsets.append(off)
            for h, k in enumerate(table):
                position[k] = (l, h, off + h)
            off += len(table)
        object.__setattr__(self, "_tables", tables)
        object.__setattr__(self, "_position", position)
        object.__setattr__(self, "_offsets", tuple(offsets))

    @property
    def block_size(self) -> int:
        """Coordinates per dependent variable, C(n+s, s)."""
        return comb(self.n + self.s, self.s)

    @property
    def dimension(self) -> int:
        return self.m * self.block_size

    def with_order(self, s: int) -> "JetSpec":
        return JetSpec(self.n, self.m, s, self.indep_names, self.dep_names)

    def order_table(self, l: int) -> tuple[tuple[int, ...], ...]:
        if not 0 <= l <= self.s:
            raise ValueError(f"order {l} outside 0..{self.s}")
        return self._tables[l]

    def order_slice(self, l: int) -> slice:
        """Flat positions of order ``l`` inside one dependent block."""
        start = self._offsets[l]
        return slice(start, start + len(self._tables[l]))

    def locate(self, c: JetCoordinate) -> tuple[int, int]:
        """``(l, h)`` of ``c``: its order and 0-based position in that order's table."""
        self._validate(c)
        l, h, _ = self._position[c.idx]
        return l, h

    def _validate(self, c):
        if not isinstance(c, JetCoordinate) or not 1 <= c.dep <= self.m or c.n != self.n:
            raise InvalidCoordinate(f"{c!r} is not a coordinate of {self}")
        if c.idx not in self._position:
            raise InvalidCoordinate(f"{c} has order {c.order} > s={self.s}")

    def rank(self, c: JetCoordinate) -> int:
        self._validate(c)
        return (c.dep - 1) * self.block_size + self._position[c.idx][2]

    def unrank(self, r: int) -> JetCoordinate:
        if not 0 <= r < self.dimension:
            raise InvalidCoordinate(f"flat index {r} outside 0..{self.dimension - 1}")
        dep, within = divmod(r, self.block_size)
        for l, table in enumerate(self._tables):
            if within < len(table):
                return JetCoordinate(dep + 1, table[within])
            within -= len(table)
        raise AssertionError("unreachable")

    @cached_property
    def coordinates(self) -> tuple[JetCoordinate, ...]:
        return tuple(self.unrank(r) for r in range(self.dimension))

    def coord(self, dep: int, *idx: int) -> JetCoordinate:
        """Convenience constructor; ``spec.coord(1, 1, 1)`` is ``u1_x1x2`` for n=2."""
        if not idx:
            idx = (0,) * self.n
        c = JetCoordinate(dep, tuple(idx))
        if c.n != self.n or not 1 <= dep <= self.m:
            raise InvalidCoordinate(f"{c!r} is not a coordinate of {self}")
        return c

    def coord_name(self, c: JetCoordinate) -> str:
        return c.name(self.dep_names, self.indep_names)

    def indep_name(self, i: int) -> str:
        return self.indep_names[i - 1] if self.indep_names else f"x{i}"


def enumerate_order(spec: JetSpec, l: int) -> list[tuple[int, ...]]:
    return list(spec.order_table(l))


def jet_dimension(spec: JetSpec) -> int:
    return spec.dimension


def rank(spec: JetSpec, c: JetCoordinate) -> int:
    return spec.rank(c)


def unrank(spec: JetSpec, r: int) -> JetCoordinate:
    return spec.unrank(r)


def prolong_candidate(spec: JetSpec, candidate, order: int | None = None):
    """Map every jet coordinate up to ``order`` (default ``spec.s``) to the
    corresponding partial derivative of the candidate functions.

    ``candidate`` holds one expression in the independent variables per
    dependent variable.
    """
    from .expr import diff_wrt_indep, free_coordinates

    if len(candidate) != spec.m:
        raise ValueError(f"expected {spec.m} candidate expressions, got {len(candidate)}")
    for j, e in enumerate(candidate, 1):
        if free_coordinates(e):
            raise ValueError(f"candidate {j} contains jet coordinates")
    order = spec.s if order is None else order
    out = {}
    for j, e in enumerate(candidate, 1):
        out[JetCoordinate(j, (0,) * spec.n)] = e
        for l in range(1, order + 1):
            for k in closed_form_order(spec.n, l):
                # differentiate the lower coordinate along its first nonzero axis
                i = next(a for a, ka in enumerate(k) if ka)
                lower = k[:i] + (k[i] - 1,) + k[i + 1:]
                out[JetCoordinate(j, k)] = diff_wrt_indep(out[JetCoordinate(j, lower)], i + 1)
    return out
