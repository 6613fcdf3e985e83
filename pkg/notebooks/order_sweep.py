"""
Orders of consistency, measured
===============================

One step of each method on a sixth-order linear problem with a single
repeated root, for step sizes between 1e-3 and 1e-1.  The log-log slope of
the error at rank N should be N plus the order of consistency at that rank.
"""

# %%
import numpy as np

from mork import catalog, confluent_linear_ivp, mork_step, rk_step
from mork.conditions import fit_slope
from mork.methods import RKTableau

ivp = confluent_linear_ivp(6, complex(-0.5, 1.0), 0.0)
hs = np.logspace(-3, -1, 20)

# %%
# The single-order methods are stepped on the equivalent first-order
# system; the multi-order ones work on the jet directly.


def errors_for(name):
    m = catalog(name)
    step = rk_step if isinstance(m, RKTableau) else mork_step
    rows = [np.abs(step(m, None, ivp, 0.0, ivp.y0, float(h)).final[0] - ivp.exact(h)[0]) for h in hs]
    return np.array(rows)


names = ["rk-euler", "mork-euler", "mork-midpoint", "mork-heun", "mork4b"]
table = {name: errors_for(name) for name in names}

# %%
print("slope per rank (rank 1 is the highest derivative)")
print(f"{'method':<16}" + "".join(f"{'N=' + str(N):>8}" for N in range(1, 7)))
for name, err in table.items():
    slopes = [fit_slope(hs, err[:, N - 1], N, 1.0).slope for N in range(1, 7)]
    print(f"{name:<16}" + "".join(f"{s:8.2f}" for s in slopes))

# %%
# At h = 0.1 the multi-order Euler method wins by a wide margin at the
# bottom rank, which is the solution itself.
k = np.argmin(np.abs(hs - 0.1))
ratio = table["rk-euler"][k, 5] / table["mork-euler"][k, 5]
print(f"rank-6 error ratio rk-euler / mork-euler at h={hs[k]:.3g}: {ratio:.3g}")

# %%
# Over thirty steps of h = 1/2 the picture flips: the single-order method
# stays bounded while the multi-order one grows.
from mork import step_sequence

for name in ["rk-euler", "mork-euler", "mork-heun", "mork4b"]:
    traj = step_sequence(catalog(name), ivp, [0.5] * 30)
    err = np.abs(traj.jets[-1][0] - ivp.exact(traj.times[-1])[0]).max()
    print(f"{name:<12} max error after 30 steps: {err:.3g}")
