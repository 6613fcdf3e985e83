"""Numeric checks of consistency order.

Stage indices are 0-based in the API (the last stage of an ``s``-point
method is ``s``); CSV output prints them 1-based.  Ranks are 1-based.
"""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np

from mork.core import InitialValueProblem, MethodTableau
from mork.methods import RKTableau
from mork.stepper import PicardConfig, mork_step, rk_step

__all__ = [
    "RESIDUAL_RTOL",
    "SLOPE_SIGMA_FLOOR",
    "ResidualEntry",
    "ResidualReport",
    "ConvergenceReport",
    "SlopeFit",
    "approximation_times",
    "convergence_check",
    "negative_order_violations",
    "solved_system_residuals",
    "generalized_solved_residuals",
    "gauss_jacobi_form",
    "quadrature_residuals",
    "distinct_nodes",
    "order_conditions_residuals",
    "ORDER_CONDITION_COUNTS",
    "experimental_order",
    "fit_slope",
]

#: Relative tolerance of pass/fail verdicts: ``|r| < RESIDUAL_RTOL * max(1, |rhs|)``.
RESIDUAL_RTOL = 1e-11
#: Smallest spread (in natural-log units) used by the outlier test of :func:`fit_slope`.
SLOPE_SIGMA_FLOOR = 1e-2


@dataclass(frozen=True)
class ResidualEntry:
    condition: str
    rank: int
    stage: int
    residual: float
    rhs: float
    order: int

    @property
    def passed(self) -> bool:
        return abs(self.residual) < RESIDUAL_RTOL * max(1.0, abs(self.rhs))


@dataclass
class ResidualReport:
    """Residuals of one family of conditions at one (stage, rank)."""

    entries: list[ResidualEntry] = field(default_factory=list)
    forced_failure: Optional[str] = None

    def __iter__(self) -> Iterator[ResidualEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def residuals(self) -> np.ndarray:
        return np.array([e.residual for e in self.entries])

    @property
    def passed(self) -> bool:
        return self.forced_failure is None and all(e.passed for e in self.entries)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residuals))) if self.entries else 0.0

    def extend(self, other: "ResidualReport") -> "ResidualReport":
        self.entries.extend(other.entries)
        if other.forced_failure and not self.forced_failure:
            self.forced_failure = other.forced_failure
        return self

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("condition_id,rank,stage,residual,pass\n")
        for e in self.entries:
            buf.write(f"{e.condition},{e.rank},{e.stage + 1},{e.residual:.17g},{str(e.passed).lower()}\n")
        if self.forced_failure:
            buf.write(f"# forced failure: {self.forced_failure}\n")
        return buf.getvalue()


def approximation_times(method: MethodTableau, n: int) -> np.ndarray:
    """``xi[j, N-1]``: row sums of ``w_1`` for rank 1, ``w~_{N,1,j}`` above."""
    method.ensure_length(n)
    xi = np.empty((method.s + 1, n))
    xi[:, 0] = method.main_weights(1).sum(axis=1)
    for N in range(2, n + 1):
        xi[:, N - 1] = method.secondary_weights(N)[:, 1]
    return xi


def negative_order_violations(method: MethodTableau, n: int, tol: float = 1e-14) -> list[tuple[int, int, int]]:
    """Triples ``(N, N', j)`` where ``w~_{N,N',j}`` differs from ``xi_{j,N}**N' / N'!``.

    Any such triple caps the consistency order at rank ``N`` and stage ``j``
    at ``N' - N < 0``.
    """
    xi = approximation_times(method, n)
    bad = []
    for N in range(1, n + 1):
        wt = method.secondary_weights(N)
        for Np in range(N):
            expect = xi[:, N - 1] ** Np / math.factorial(Np)
            for j in np.flatnonzero(np.abs(wt[:, Np] - expect) > tol * np.maximum(1.0, np.abs(expect))):
                bad.append((N, Np, int(j)))
    return bad


@dataclass(frozen=True)
class ConvergenceReport:
    convergent: bool
    deviations: np.ndarray
    criterion: str


def convergence_check(method: MethodTableau, n: int, tol: float = 1e-12) -> ConvergenceReport:
    """Whether the last stage approximates the solution jet at ``t + h``.

    For tableaus in consistency-order-0 form the criterion is that every
    approximation time of the last stage equals 1.  Otherwise only the
    sufficient condition is available: unit leading secondary weights at
    the last stage and at every stage feeding it.
    """
    if not negative_order_violations(method, n):
        dev = np.abs(approximation_times(method, n)[-1] - 1.0)
        return ConvergenceReport(bool(dev.max() < tol), dev, "approximation-times")
    s = method.s
    feeders = np.flatnonzero(np.any(method.main_stack(n)[:, s, :] != 0, axis=0))
    dev = np.zeros(n)
    for N in range(1, n + 1):
        lead = method.secondary_weights(N)[:, 0]
        rows = np.append(feeders, s)
        dev[N - 1] = np.max(np.abs(lead[rows] - 1.0))
    return ConvergenceReport(bool(dev.max() < tol), dev, "sufficient")


def _factor(N: int, k: int) -> float:
    """``k! N! / (k + N)!`` as a float without overflow for moderate ranks."""
    return 1.0 / math.comb(k + N, N)


def solved_system_residuals(method: MethodTableau, n: int, j: int, N: int, nu: int) -> ResidualReport:
    """Residuals of the conditions obtained when the rhs depends on time only.

    Entry ``k`` is ``sum_j' w_{N,j,j'} tau_j'**k - xi_{j,N}**(N+k) k! N! / (k+N)!``
    for ``k = 0..nu-1``.  When ``nu`` exceeds twice the number of distinct
    nodes and ``xi_{j,N} != 0`` the report is marked failing, since no
    weights can meet that many conditions.
    """
    if not 1 <= N <= n:
        raise ValueError(f"rank {N} outside 1..{n}")
    w = method.main_weights(N)[j]
    tau = method.nodes[: method.s]
    xi = approximation_times(method, n)[j, N - 1]
    report = ResidualReport()
    for k in range(nu):
        rhs = xi ** (N + k) * _factor(N, k)
        lhs = float(w @ tau**k)
        report.entries.append(ResidualEntry(f"S{k}", N, j, lhs - rhs, rhs, k + 1))
    nodes_used = distinct_nodes(tau[w != 0]) if np.any(w != 0) else 0
    if xi != 0 and nu > 2 * nodes_used:
        report.forced_failure = f"order {nu} exceeds twice the {nodes_used} distinct nodes"
    return report


def distinct_nodes(nodes: np.ndarray, tol: float = 1e-14) -> int:
    vals = np.sort(np.asarray(nodes, dtype=float))
    if vals.size == 0:
        return 0
    return 1 + int(np.sum(np.diff(vals) > tol))


def generalized_solved_residuals(
    method: MethodTableau, n: int, j: int, N: int, nu: int, n_cap: int = 8
) -> ResidualReport:
    """Solved-system conditions weighted by powers of the approximation times.

    For every ``k`` and multi-index ``lam`` over ranks ``1..min(n, n_cap)`` with
    ``|lam| <= nu - 1 - k``, compares
    ``sum_j' w_{N,j,j'} tau_j'**k prod_M xi_{j',M}**lam_M`` with
    ``xi_{j,N}**(N+k+|lam|) N! (k+|lam|)! / (k+|lam|+N)!``.
    """
    m = min(n, n_cap)
    xi = approximation_times(method, n)
    w = method.main_weights(N)[j]
    s = method.s
    tau = method.nodes[:s]
    report = ResidualReport()
    for k in range(nu):
        budget = nu - 1 - k
        for lam in itertools.product(range(budget + 1), repeat=m):
            size = sum(lam)
            if size > budget:
                continue
            weight = tau**k
            for M, p in enumerate(lam, start=1):
                if p:
                    weight = weight * xi[:s, M - 1] ** p
            rhs = xi[j, N - 1] ** (N + k + size) * _factor(N, k + size)
            tag = "G" + str(k) + ":" + "".join(str(p) for p in lam)
            report.entries.append(ResidualEntry(tag, N, j, float(w @ weight) - rhs, rhs, k + size + 1))
    return report


def gauss_jacobi_form(method: MethodTableau, n: int, j: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature weights ``b`` and nodes ``c`` on ``[-1, 1]`` for stage ``j``, rank ``N``.

    ``b = 2**N w / (N xi**N)`` and ``c = 2 tau / xi - 1`` with
    ``xi = xi_{j,N}``, which must be nonzero.
    """
    xi = approximation_times(method, n)[j, N - 1]
    if xi == 0:
        raise ValueError("the transform needs a nonzero approximation time")
    w = method.main_weights(N)[j]
    tau = method.nodes[: method.s]
    return 2.0**N * w / (N * xi**N), 2.0 * tau / xi - 1.0


def quadrature_residuals(b: np.ndarray, c: np.ndarray, N: int, nu: int) -> np.ndarray:
    """``sum b ((c+1)/2)**k - 2**N k! (N-1)! / (k+N)!`` for ``k = 0..nu-1``.

    The exact values are the moments of ``(1-x)**(N-1)`` against
    ``((1+x)/2)**k`` on ``[-1, 1]``.
    """
    u = (np.asarray(c) + 1.0) / 2.0
    out = np.empty(nu)
    for k in range(nu):
        exact = 2.0**N * math.factorial(k) * math.factorial(N - 1) / math.factorial(k + N)
        out[k] = float(np.asarray(b) @ u**k) - exact
    return out


# ---------------------------------------------------------------------------
# rooted-tree style conditions, orders 1 to 4

_Vec = np.ndarray
_Ctx = dict


def _child(M: int, inner: Callable[[_Ctx], _Vec]) -> Callable[[_Ctx], _Vec]:
    return lambda c: c["w"][M][: c["s"]] @ inner(c)


def _leaf(c: _Ctx) -> _Vec:
    return np.ones(c["s"])


def _tau(c: _Ctx) -> _Vec:
    return c["tau"]


def _pow(f: Callable[[_Ctx], _Vec], p: int) -> Callable[[_Ctx], _Vec]:
    return lambda c: f(c) ** p


def _mul(*fs: Callable[[_Ctx], _Vec]) -> Callable[[_Ctx], _Vec]:
    def run(c: _Ctx) -> _Vec:
        out = np.ones(c["s"])
        for f in fs:
            out = out * f(c)
        return out

    return run


_B = _child(1, _leaf)  # row sums of w_1 seen from each point

# (order, equation, root integrand, factor, minimal n)
_CONDITIONS: list[tuple[int, int, Callable[[_Ctx], _Vec], int, int]] = [
    (1, 1, _leaf, 1, 1),
    (2, 1, _tau, 1, 1),
    (2, 2, _B, 1, 1),
    (3, 1, _pow(_tau, 2), 2, 1),
    (3, 2, _mul(_tau, _B), 2, 1),
    (3, 3, _child(1, _tau), 1, 1),
    (3, 4, _child(1, _B), 1, 1),
    (3, 5, _pow(_B, 2), 2, 1),
    (3, 6, _child(2, _leaf), 2, 2),
    (4, 1, _pow(_tau, 3), 6, 1),
    (4, 2, _child(1, _pow(_tau, 2)), 2, 1),
    (4, 3, _mul(_tau, _child(1, _tau)), 3, 1),
    (4, 4, _mul(_pow(_tau, 2), _B), 6, 1),
    (4, 5, _child(1, _child(1, _tau)), 1, 1),
    (4, 6, _child(1, _mul(_tau, _B)), 2, 1),
    (4, 7, _mul(_tau, _child(1, _B)), 3, 1),
    (4, 8, _mul(_B, _child(1, _tau)), 3, 1),
    (4, 9, _mul(_tau, _pow(_B, 2)), 6, 1),
    (4, 10, _child(1, _child(1, _B)), 1, 1),
    (4, 11, _child(1, _pow(_B, 2)), 2, 1),
    (4, 12, _pow(_B, 3), 6, 1),
    (4, 13, _mul(_B, _child(1, _B)), 3, 1),
    (4, 14, _child(2, _tau), 2, 2),
    (4, 15, _mul(_B, _child(2, _leaf)), 6, 2),
    (4, 16, _child(2, _B), 2, 2),
    (4, 17, _child(1, _child(2, _leaf)), 2, 2),
    (4, 18, _mul(_tau, _child(2, _leaf)), 6, 2),
    (4, 19, _child(3, _leaf), 6, 3),
]

#: Number of equations per order for ``n = 1, 2, >= 3``.
ORDER_CONDITION_COUNTS = {
    n: {o: sum(1 for c in _CONDITIONS if c[0] == o and c[4] <= n) for o in (1, 2, 3, 4)} for n in (1, 2, 3)
}


def order_conditions_residuals(method: MethodTableau, n: int, j: int, N: int, up_to: int) -> ResidualReport:
    """Residuals of the order conditions of orders ``1..up_to`` (at most 4).

    Each equation compares ``sum_j' w_{N,j,j'} g(j')`` with
    ``c xi_{j,N}**(N+k) N! / (N+k)!`` where ``k`` is the order minus one and
    ``g`` is built from nested weighted sums.  Equations involving ``w_2``
    or ``w_3`` appear only when ``n`` is at least 2 or 3.  Condition ids read
    ``order.equation``.
    """
    if not 1 <= up_to <= 4:
        raise ValueError("order conditions are available for orders 1 to 4")
    method.ensure_length(max(N, min(n, 3)))
    s = method.s
    ctx = {
        "s": s,
        "tau": method.nodes[:s],
        "w": {M: method.main_weights(M) for M in range(1, min(n, 3) + 1)},
    }
    xi = approximation_times(method, max(n, N))[j, N - 1]
    row = method.main_weights(N)[j]
    report = ResidualReport()
    for order, eq, g, factor, need in _CONDITIONS:
        if order > up_to or need > n:
            continue
        k = order - 1
        rhs = factor * xi ** (N + k) * _factor(N, k) / math.factorial(k)
        report.entries.append(ResidualEntry(f"{order}.{eq}", N, j, float(row @ g(ctx)) - rhs, rhs, order))
    return report


# ---------------------------------------------------------------------------
# experimental order


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    order: float
    used: int
    verdict: str
    dropped_largest: bool = False
    h: tuple[float, ...] = ()
    errors: tuple[float, ...] = ()

    @property
    def conclusive(self) -> bool:
        return self.verdict == "ok"


def fit_slope(hs: Sequence[float], errors: Sequence[float], rank: int = 0, scale: float = 1.0) -> SlopeFit:
    """Least-squares slope of ``log|err|`` against ``log h``.

    Errors at round-off level (below ``100 * eps * scale``) and exact zeros
    are left out.  The point with the largest step is compared with the
    line through the other points; if it lies more than three standard
    deviations away (the spread being floored at :data:`SLOPE_SIGMA_FLOOR`)
    it is dropped once.  Fewer than three
    usable points give an ``"inconclusive"`` verdict.
    """
    hs = np.asarray(hs, dtype=float)
    err = np.abs(np.asarray(errors, dtype=float))
    floor = 1e2 * np.finfo(float).eps * max(scale, 1.0)
    keep = (err > 0) & (err >= floor) & np.isfinite(err)
    x, y = np.log(hs[keep]), np.log(err[keep])
    if x.size < 3:
        return SlopeFit(math.nan, math.nan, int(x.size), "inconclusive", h=tuple(hs), errors=tuple(err))
    coef = np.polyfit(x, y, 1)
    dropped = False
    if x.size > 3:
        # Judge the largest step against a line fitted without it.
        big = int(np.argmax(x))
        mask = np.arange(x.size) != big
        rest = np.polyfit(x[mask], y[mask], 1)
        resid = y[mask] - np.polyval(rest, x[mask])
        sigma = max(math.sqrt(float(resid @ resid) / max(mask.sum() - 2, 1)), SLOPE_SIGMA_FLOOR)
        if abs(y[big] - np.polyval(rest, x[big])) > 3 * sigma:
            x, y, coef = x[mask], y[mask], rest
            dropped = True
    slope = float(coef[0])
    return SlopeFit(slope, slope - rank, int(x.size), "ok", dropped, tuple(hs), tuple(err))


def experimental_order(
    method: Union[MethodTableau, RKTableau],
    ivp: InitialValueProblem,
    rank: int,
    entry: int,
    h_grid: Sequence[float],
    cfg: PicardConfig = PicardConfig(),
) -> SlopeFit:
    """Fit the one-step error at ``(entry, rank)`` against the step size.

    The slope is returned together with ``slope - rank``, the experimental
    consistency order.
    """
    if ivp.exact is None:
        raise ValueError("the problem needs an exact solution")
    hs = np.asarray(h_grid, dtype=float)
    if hs.size < 4 or math.log10(hs.max() / hs.min()) < 1.5:
        raise ValueError("need at least 4 step sizes spanning 1.5 decades")
    errors = []
    scale = 0.0
    for h in hs:
        if isinstance(method, RKTableau):
            out = rk_step(method, None, ivp, ivp.t0, ivp.y0, float(h), cfg)
        else:
            out = mork_step(method, None, ivp, ivp.t0, ivp.y0, float(h), cfg)
        exact = ivp.exact(ivp.t0 + h)[entry, rank - 1]
        scale = max(scale, abs(exact))
        errors.append(abs(out.final[entry, rank - 1] - exact))
    return fit_slope(hs, errors, rank, scale)
