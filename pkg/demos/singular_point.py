"""Affine evolution data whose 3-fold is singular at the origin.

Run: python3 demos/singular_point.py
"""
from g2assoc import affine as af
from g2assoc.g2core import basis

E = [basis(i) for i in range(1, 8)]
u, v, w, x = E[1], 0.3 * E[4] + 0.2 * E[2], E[3], E[0]
tr = af.integrate_span(af.singular_init(u, v, w, x), -0.05, 0.05, 1e-13)
print("rank defects at the origin:", af.detect_singularities(tr, [0.0], [0.0], [0.0]))

# after rescaling, F approaches a map that covers R^3 twice
rep = af.singular_model_residual(u, v, w, x)
for e, r in zip(rep.eps, rep.residuals):
    print(f"eps = {e:<7} model residual {r:.3e}")
print(f"slope {rep.slope:.3f} (first-order convergence)")
