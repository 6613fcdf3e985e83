"""Elementary symmetric polynomials and the root/coefficient correspondence."""

from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = ["elementary_symmetric", "vieta_coefficients"]


def elementary_symmetric(values: Sequence[complex]) -> np.ndarray:
    """Return ``[e_0, e_1, ..., e_n]`` of ``values``.

    Uses the product recurrence for ``prod (1 + v_i X)``, which costs
    ``O(n^2)`` and never forms a factorial.

    >>> elementary_symmetric([1.0, 2.0, 3.0]).real.tolist()
    [1.0, 6.0, 11.0, 6.0]
    """
    v = np.asarray(values).reshape(-1)
    dtype = np.result_type(v.dtype, float)
    e = np.zeros(v.size + 1, dtype=dtype)
    e[0] = 1
    for i, r in enumerate(v, start=1):
        e[1 : i + 1] = e[1 : i + 1] + r * e[:i]
    return e


def vieta_coefficients(roots: Sequence[complex]) -> np.ndarray:
    """Coefficients ``alpha_N = (-1)**(N+1) e_N(roots)`` for ``N = 1..n``.

    They are the ones for which ``y^(n) = sum_N alpha_N y^(n-N)`` has the
    given characteristic roots.
    """
    e = elementary_symmetric(roots)[1:]
    signs = np.array([(-1) ** (N + 1) for N in range(1, e.size + 1)])
    return signs * e
