"""
The jet-space Hessian
=====================

The second-order tests work with the symmetric matrix A of second partial
derivatives of L with respect to the jet coordinates.  It is organised in
m x m blocks, each split by derivative order into (s+1) x (s+1) sub-blocks.
"""

import numpy as np

from varcond import JetSpec, Point, build_hessian, build_necessary_sums, evaluate_hessian_at, parse_expression

spec = JetSpec(2, 2, 2)
lag = parse_expression("u1_x1x2*u2_x1 + u1^2*u2 + u2_x2x2^2", spec)
a = build_hessian(lag, spec)
print("dim", a.dim)
for k in range(3):
    print([a.block_shape(1, 2, k, kp) for kp in range(3)])

# Structural sparsity of A: most Lagrangians touch few coordinates.
mask = a.nonzero_mask()
names = [spec.coord_name(c) for c in spec.coordinates]
for name, row in zip(names, mask):
    print(f"{name:>10} " + "".join("X" if v else "." for v in row))

# A symbolic entry and its value at a point of the jet space.
print(a.block(1, 2, 0, 0)[0][0])
jet = {c: 0.5 for c in spec.coordinates}
m = evaluate_hessian_at(a, Point((0.0, 0.0), jet))
print(np.allclose(m, m.T), np.linalg.eigvalsh(m).round(3))

# The necessary test uses B_l: the sum of every entry of the order-l
# diagonal super-block, over all pairs of dependents.
spec = JetSpec(1, 1, 1)
for text in ["u^2 + u_x^2", "u_x^2 - u^2", "u^2*u_x^2"]:
    sums = build_necessary_sums(build_hessian(parse_expression(text, spec), spec))
    print(f"{text:>12}: B = {sums.evaluate_at(Point((0.0,), {spec.coord(1, 0): 1.0, spec.coord(1, 1): 0.3}))}")
