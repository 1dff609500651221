"""
Jet coordinates and prolongation
================================

A Lagrangian of order s sees a function only through its jet: the values of
u and all its partial derivatives up to order s.  Here we list the jet
coordinates in their canonical order and prolong a closed-form function.
"""

from math import comb

import numpy as np

from varcond import JetSpec, enumerate_order, jet_dimension, order_size, prolong_candidate, rank, unrank
from varcond.parser import parse_expression

# With three independent variables, order-3 derivatives come in
# C(3+3-1, 3) = 10 distinct flavours.  Each is a count vector: (2, 1, 0)
# means two x1-derivatives and one x2-derivative.
spec = JetSpec(n=3, m=1, s=3)
for l in range(4):
    print(l, order_size(3, l), enumerate_order(spec, l))

# The full jet of m dependents up to order s has m * C(n+s, s) entries.
for n, m, s in [(1, 1, 1), (2, 1, 2), (3, 2, 2)]:
    print((n, m, s), jet_dimension(JetSpec(n, m, s)), m * comb(n + s, s))

# Every coordinate has a rank in the flat jet vector and back.
spec = JetSpec(2, 2, 2)
names = [spec.coord_name(c) for c in spec.coordinates]
print(names)
assert all(unrank(spec, rank(spec, c)) == c for c in spec.coordinates)

# Prolongation: all derivatives of a candidate, as expressions in x.
spec = JetSpec(2, 1, 2)
u = parse_expression("sin(x1)*x2^2", spec)
for c, e in prolong_candidate(spec, (u,)).items():
    print(f"{spec.coord_name(c):>8} = {e}")

# Evaluated on a grid they form an array of shape (points, jet dimension).
jets = prolong_candidate(spec, (u,))
from varcond import Point, evaluate

xs = np.linspace(0, 1, 4)
table = np.array([[evaluate(e, Point((x, 0.5), {})) for e in jets.values()] for x in xs])
print(table.round(4))
