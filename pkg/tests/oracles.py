"""Independent reference computations used by the test-suite.

Nothing here imports the algorithms under test; each oracle takes the
simplest route to the same number so that agreement is meaningful.
"""

from __future__ import annotations

import cmath
import itertools
import math
from fractions import Fraction

import numpy as np
from scipy.linalg import expm
from scipy.special import roots_jacobi


def warshall_closure(adj):
    """Reflexive-transitive closure of ``adj`` (``adj[a, b]``: arc between a and b)."""
    reach = np.array(adj, dtype=bool) | np.eye(len(adj), dtype=bool)
    for k in range(len(reach)):
        reach |= reach[:, [k]] & reach[[k], :]
    return reach


def mutual_reachability_classes(adj):
    """Strongly connected components as a set of frozensets."""
    reach = warshall_closure(adj)
    both = reach & reach.T
    return {frozenset(np.flatnonzero(row).tolist()) for row in both}


def all_arcs_forward(order, dag):
    """``dag[j, j1]`` means ``j`` reads ``j1``; ``j1`` must therefore come first."""
    pos = {v: i for i, v in enumerate(order)}
    return all(pos[j1] < pos[j] for j, j1 in zip(*np.nonzero(dag)))


def longest_cost_paths(costs, dag):
    """Priorities by enumerating every path from each vertex (tiny graphs only)."""
    v = len(costs)

    def best(node):
        succ = [c for c in range(v) if dag[c, node]]
        return costs[node] + max((best(c) for c in succ), default=0)

    return [best(x) for x in range(v)]


def companion_jet(roots, y0, t):
    """Exact jet at ``t`` of the scalar linear problem with the given roots.

    The state vector ``(y, y', ..., y^(n-1))`` evolves by the matrix
    exponential of the companion matrix of ``prod (X - r)``.  The jet is
    returned rank 1 first, like the library's layout.
    """
    roots = np.asarray(roots, dtype=complex)
    n = roots.size
    poly = np.poly(roots)  # X^n + c1 X^(n-1) + ... + cn
    comp = np.zeros((n, n), dtype=complex)
    comp[:-1, 1:] = np.eye(n - 1)
    comp[-1, :] = -poly[1:][::-1]
    state = np.asarray(y0, dtype=complex)[::-1]
    return (expm(comp * t) @ state)[::-1]


def confluent_series(n, lam, y0, t, terms=80):
    """Exact jet via the Taylor series of the solution around 0.

    Derivatives of order ``n`` and above follow from the recurrence
    ``y^(k+n) = sum_N a_N y^(k+n-N)`` with binomial coefficients of
    ``(X - lam)^n``.
    """
    alpha = [-math.comb(n, N) * (-lam) ** N for N in range(1, n + 1)]
    derivs = [complex(v) for v in list(y0)[::-1]]
    while len(derivs) < terms + n:
        k = len(derivs)
        derivs.append(sum(alpha[N - 1] * derivs[k - N] for N in range(1, n + 1)))
    jet = []
    for i in range(n - 1, -1, -1):
        jet.append(sum(derivs[i + p] * t**p / math.factorial(p) for p in range(terms)))
    return np.array(jet)


def jacobi_tableau(s_prime, N, xi):
    """Gauss-Jacobi nodes and weights turned into one row of a tableau."""
    c, b = roots_jacobi(s_prime, N - 1, 0)
    tau = xi * (c + 1) / 2
    w = b * N * xi**N / 2**N
    return tau, w


def quadratic_spectral_radius(m):
    """Spectral radius of a 2x2 matrix from the characteristic quadratic."""
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = cmath.sqrt(tr * tr - 4 * det)
    return max(abs((tr + disc) / 2), abs((tr - disc) / 2))


def gelfand_radius(m, k=200):
    """``||m^k||^(1/k)``: converges to the spectral radius."""
    p = np.linalg.matrix_power(np.asarray(m, dtype=complex) / max(1.0, np.abs(m).max()), k)
    return np.linalg.norm(p, 2) ** (1.0 / k) * max(1.0, np.abs(m).max())


def elementary_symmetric_bruteforce(values):
    """``e_0..e_n`` by summing over subsets."""
    n = len(values)
    out = [complex(1)]
    for k in range(1, n + 1):
        out.append(sum(np.prod([values[i] for i in c]) for c in itertools.combinations(range(n), k)))
    return np.array(out)


def fraction_midpoint_row(N):
    """Exact last row of the two-point multi-order midpoint method at rank ``N``."""
    return [Fraction(N - 1, N + 1), Fraction(2, N + 1)]


def euler_rank_chain(y0, fvals, h):
    """Explicit Euler on the first-order reduction, written out by hand."""
    n = len(y0)
    out = list(y0)
    out[0] = y0[0] + h * fvals
    for N in range(1, n):
        out[N] = y0[N] + h * y0[N - 1]
    return out
