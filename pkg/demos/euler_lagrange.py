"""
Euler-Lagrange equations
========================

The Euler operator turns a Lagrangian into the equations its critical
points satisfy.  We derive them symbolically and check one against a
discretized functional.
"""

import numpy as np

from varcond import JetSpec, Point, euler_lagrange_system, evaluate, parse_expression, prolong_candidate, total_derivative

# Dirichlet energy in the plane gives (minus twice) the Laplacian.
spec = JetSpec(2, 1, 1)
print(euler_lagrange_system(parse_expression("u_x1^2 + u_x2^2", spec), spec).equations[0])

# Order 2: the beam energy gives a fourth-order equation.
spec = JetSpec(1, 1, 2)
print(euler_lagrange_system(parse_expression("u_xx^2", spec), spec).equations[0])

# Minimal surfaces: the equation is nonlinear.
spec = JetSpec(2, 1, 1)
ms = euler_lagrange_system(parse_expression("sqrt(1 + u_x1^2 + u_x2^2)", spec), spec)
print(ms.equations[0])

# Two coupled fields produce one equation each.
spec = JetSpec(1, 2, 1)
for e in euler_lagrange_system(parse_expression("u1_x*u2_x + u1^2*u2", spec), spec).equations:
    print(e)

# A total derivative D_x(e) has identically vanishing Euler-Lagrange
# expression, whatever e is.
spec = JetSpec(1, 1, 2)
e = parse_expression("x*u^2*u_x", spec)
div = total_derivative(e, 1, spec)
print("D_x e =", div)
null = euler_lagrange_system(div, spec).equations[0]
rng = np.random.default_rng(0)
coords = spec.with_order(4).coordinates
samples = [evaluate(null, Point((rng.uniform(-1, 1),), {c: rng.uniform(-1, 1) for c in coords})) for _ in range(5)]
print("E(D_x e) at random jets:", np.array(samples))

# Check against a discretized functional.  With J_h[u] = sum h * L(u, Du)
# on a 1D grid, dJ_h/du_i / h approximates the Euler-Lagrange expression.
spec = JetSpec(1, 1, 1)
lag = "u^2*u_x^2 + sin(u)"
el = euler_lagrange_system(parse_expression(lag, spec), spec).equations[0]

N = 400
h = 1.0 / N
x = np.arange(N + 1) * h
u = np.cos(2 * x)


def J(v):
    dv = np.gradient(v, h)
    return h * np.sum(v**2 * dv**2 + np.sin(v))


i = N // 3
bump = np.zeros_like(u)
bump[i] = 1e-6
fd = (J(u + bump) - J(u - bump)) / (2e-6) / h

cand = parse_expression("cos(2*x)", spec)
jet = {c: evaluate(e, Point((x[i],), {})) for c, e in prolong_candidate(spec.with_order(2), (cand,)).items()}
exact = evaluate(el, Point((x[i],), jet))
print(f"symbolic {exact:.6f}  discrete {fd:.6f}")
