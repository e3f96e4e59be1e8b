"""Evolve a closed curve on S^6 into a ruled associative 3-fold.

Run: python3 demos/ruled_flow.py
"""
import numpy as np

from g2assoc import ruled as rl
from g2assoc.g2core import basis

E = [basis(i) for i in range(1, 8)]
n = 128
s = np.arange(n) * 2 * np.pi / n
phi = (np.cos(s)[:, None] * E[1] + np.sin(s)[:, None] * E[2]
       + 0.3 * np.cos(2 * s)[:, None] * E[3] + 0.2 * np.sin(s)[:, None] * E[5])
phi /= np.linalg.norm(phi, axis=1)[:, None]
psi = (1 / (1.2 - np.cos(s)))[:, None] * E[4]

traj = rl.evolve_ruled(rl.RuledState(phi, psi), None, t1=0.25, steps=256)
print(f"max norm drift per step: {traj.norm_drift.max():.1e}")

i = 128
rho = rl.associativity_residuals(traj.state(i), *traj.time_derivatives(i))
print("associativity residuals at t = %.3f:" % traj.times[i], ["%.1e" % r for r in rho])

# deform along a holomorphic vector field and measure how fast the
# deformed 3-fold approaches the original one at infinity
field = rl.HoloField(((1, 0.3), (0, 0.5)))
fit = rl.asymptotic_order(traj, field, level=i)
print(f"asymptotic order: r^{fit.slope:.3f}")

mesh = rl.ruled_mesh(traj.state(i), np.linspace(-2, 2, 9))
print(f"mesh of {len(mesh)} points, max associator residual {np.nanmax(mesh.res_assoc):.1e}")
