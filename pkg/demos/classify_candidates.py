"""
Classifying candidate extremals
===============================

``classify`` runs three checks on a candidate u over a grid of interior
points: the Euler-Lagrange residual, strict definiteness of A along u
(sufficient for a local extremum), and the signs of the B_l sums
(necessary).  Verdicts are evidence from the sampled points.
"""

from dataclasses import replace
from pathlib import Path

from varcond import classify, parse_expression, parse_problem
from varcond.cli import emit_report

HERE = Path(__file__).parent / "problems"

# One line per problem: residual, then the two verdicts.
for path in sorted(HERE.glob("*.vp")):
    r = classify(parse_problem(path.read_text()))
    print(f"{path.stem:>16}  residual {max(r.residuals):.1e}  {r.verdict_sufficient.value:>17}  {r.verdict_necessary.value}")

# The oscillator action is critical along sin(t) but A = diag(-2, 2) is
# indefinite, and B_0 < 0 < B_1 rules out both minimum and maximum tests.
print(emit_report(classify(parse_problem((HERE / "oscillator.vp").read_text()))))

# The plate energy does not depend on u or its first derivatives, so A has
# zero rows and is only semidefinite: no sufficient verdict, but the
# necessary condition for a minimum holds.
p = parse_problem((HERE / "plate.vp").read_text()).with_numerics(grid=(2, 2))
print(emit_report(classify(p)))

# Scaling L by a negative number swaps minimum and maximum.
p = parse_problem((HERE / "stiff_beam.vp").read_text())
print(classify(p).verdict_sufficient.value, classify(p.scaled(-3.0)).verdict_sufficient.value)

# A candidate that is not critical is reported, not tested.
bent = replace(p, candidate=(parse_expression("x^2", p.spec),))
r = classify(bent)
print(r.flags, r.residuals, r.verdict_sufficient.value, r.verdict_necessary.value)
