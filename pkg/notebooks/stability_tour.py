"""
A short tour of linear stability
================================

The stability matrix maps the scaled initial jet of a linear problem to the
scaled jet after one step.  Its spectral radius decides whether repeated
steps stay bounded.
"""

# %%
import numpy as np

from mork import catalog
from mork.graph import is_explicit
from mork.methods import as_gmork
from mork.stability import (
    a_stability_scan,
    half_line_scan,
    l_stability_probe,
    spectral_radius,
    stability_matrix,
)

# %%
# For order one the matrix is a scalar and the familiar rational functions
# come back: 1 - z for explicit Euler and 1 / (1 + z) for implicit Euler.
for z in [0.5, 2.0, 1 + 1j]:
    e = stability_matrix(as_gmork(catalog("rk-euler")), 1, [z])[0, 0]
    i = stability_matrix(as_gmork(catalog("rk-implicit-euler")), 1, [z])[0, 0]
    print(f"z={z}: explicit {e:.4g}, implicit {i:.4g}")

# %%
# A second-order problem needs two scaled roots.  Here is the multi-order
# Crank-Nicolson matrix for a pair of stable roots.
R = stability_matrix(catalog("mork-crank-nicolson"), 2, [0.3 + 1j, 0.3 - 1j])
print(np.round(R, 4))
print("spectral radius", spectral_radius(R))

# %%
# Scans sample the right half-plane.  A pass only means no sample violated
# the bound.
for name, n in [("rk-implicit-euler", 1), ("mork-implicit-euler", 2), ("mork-cnb", 2)]:
    print(a_stability_scan(catalog(name), n).summary())

# %%
# Every explicit convergent method fails somewhere, as expected.
for name in ["mork-euler", "mork-heun", "mork4b", "rk4"]:
    m = catalog(name)
    rep = a_stability_scan(m, 1)
    print(f"{name:<12} explicit={is_explicit(as_gmork(m) if name.startswith('rk') else m, 1)} {rep.summary()}")

# %%
# Along one direction only, the picture can be kinder.
rep = half_line_scan(catalog("mork-implicit-euler"), 2, [1.0, 0.5])
print(rep.summary())

# %%
# Implicit Euler damps stiff components; Crank-Nicolson does not.
mags = np.logspace(0, 4, 9)
for name in ["rk-implicit-euler", "rk-crank-nicolson"]:
    probe = l_stability_probe(catalog(name), 1, mags)
    print(f"{name:<18} |R| at 1e4: {probe.norms[-1]:.3g}  decaying={probe.decaying}")
