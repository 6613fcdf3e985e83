"""Evaluation of the stage system for one step, and sequences of steps.

Stage values are held in an array of shape ``(s+1, d, n)`` that mirrors the
jet layout of :mod:`mork.core`.  Right-hand side evaluations live in an
``(s, d)`` array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from mork.core import InitialValueProblem, MethodTableau, as_jet
from mork.graph import ComputationPlan, Explicit, Implicit, computation_plan
from mork.methods import RKTableau, as_gmork

__all__ = [
    "PicardConfig",
    "StepOutcome",
    "StepRejected",
    "Trajectory",
    "mork_step",
    "rk_step",
    "step_sequence",
    "lipschitz_weight_constant",
    "safe_step_bound",
]


class StepRejected(RuntimeError):
    """A stage value left the domain of the problem."""

    def __init__(self, stage: int, t: float) -> None:
        super().__init__(f"stage {stage + 1} at t={t!r} is outside the problem domain")
        self.stage = stage
        self.t = t


@dataclass(frozen=True)
class PicardConfig:
    """Stopping rule for the fixed-point iteration of an implicit block.

    Iteration continues while fewer than ``min_iter`` sweeps were made, or
    while the largest change of the cached right-hand side values exceeds
    ``threshold`` and fewer than ``max_iter`` sweeps were made.
    """

    threshold: float = 1e-12
    min_iter: int = 2
    max_iter: int = 200

    def __post_init__(self) -> None:
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if not 1 <= self.min_iter <= self.max_iter:
            raise ValueError("need 1 <= min_iter <= max_iter")


@dataclass
class StepOutcome:
    """Everything one step produced.

    ``stages[j]`` is the jet at stage ``j`` (0-based, the last one being the
    new approximation), ``evaluations[j]`` the rhs value at point ``j``.
    """

    stages: np.ndarray
    evaluations: np.ndarray
    iterations: list[int] = field(default_factory=list)
    converged: bool = True

    @property
    def final(self) -> np.ndarray:
        return self.stages[-1]


def _check(plan: ComputationPlan, s: int, n: int) -> None:
    if plan.s != s:
        raise ValueError(f"plan is for {plan.s} points, method has {s}")
    if plan.n < n:
        raise ValueError(f"plan covers ranks up to {plan.n}, problem needs {n}")


def _mask(ivp: InitialValueProblem) -> np.ndarray:
    cols = np.arange(ivp.n)[None, :]
    return cols < np.array(ivp.orders)[:, None]


def _dtype(y0: np.ndarray, h: float) -> np.dtype:
    return np.result_type(y0.dtype, np.asarray(h).dtype, float)


def _evaluate(ivp: InitialValueProblem, t: float, y: np.ndarray, j: int) -> np.ndarray:
    if not ivp.in_domain(t, y):
        raise StepRejected(j, t)
    return ivp.f(t, y)


def mork_step(
    method: MethodTableau,
    plan: Optional[ComputationPlan],
    ivp: InitialValueProblem,
    t: float,
    y0: np.ndarray,
    h: float,
    cfg: PicardConfig = PicardConfig(),
) -> StepOutcome:
    """One step of a multi-order method on a (possibly mixed-order) problem.

    Each stage value is its Taylor part built from the secondary weights plus
    ``h**N / N!`` times the weighted rhs evaluations.  Explicit blocks are
    filled directly; implicit blocks are iterated on their implicit ranks
    only, starting from the contribution of the stages outside the block.
    """
    n, s = ivp.n, method.s
    method.ensure_length(n)
    plan = plan if plan is not None else computation_plan(method, n)
    _check(plan, s, n)
    y0 = as_jet(y0, ivp.orders)
    dtype = _dtype(y0, h)
    mask = _mask(ivp)

    W = method.main_stack(n)  # (n, s+1, s)
    scale = np.array([h**N / math.factorial(N) for N in range(1, n + 1)], dtype=dtype)
    hpow = np.array([h**p for p in range(n)], dtype=dtype)
    taylor = np.zeros((s + 1, n, n), dtype=dtype)
    for N in range(1, n + 1):
        wt = method.secondary_weights(N)  # (s+1, N), column N' is w~_{N,N'}
        for c in range(1, N + 1):
            taylor[:, N - 1, c - 1] = wt[:, N - c] * hpow[N - c]

    stages = np.zeros((s + 1, ivp.d, n), dtype=dtype)
    F = np.zeros((s, ivp.d), dtype=dtype)
    times = t + method.nodes * h
    out = StepOutcome(stages, F)

    def constant(j: int, cols: Sequence[int]) -> np.ndarray:
        y = y0 @ taylor[j].T
        if len(cols):
            cols = list(cols)
            y = y + (F[cols].T @ W[:, j, cols].T) * scale
        return np.where(mask, y, 0)

    for block in plan.blocks:
        if isinstance(block, Explicit):
            j = block.stage
            stages[j] = constant(j, range(s))
            if j < s:
                F[j] = _evaluate(ivp, times[j], stages[j], j)
            elif not ivp.in_domain(times[j], stages[j]):
                raise StepRejected(j, times[j])
            continue

        J = list(block.stages)
        base = {j: constant(j, block.complement) for j in J}
        for j in J:
            stages[j] = base[j]
        rows = {j: plan.implicit_ranks[:n, j] for j in J}
        change, it = np.inf, 0
        while it < cfg.min_iter or (change > cfg.threshold and it < cfg.max_iter):
            fresh = np.array([_evaluate(ivp, times[j], stages[j], j) for j in J])
            change = float(np.max(np.abs(fresh - F[J]))) if fresh.size else 0.0
            F[J] = fresh
            for j in J:
                inner = (F[J].T @ W[:, j, J].T) * scale
                r = rows[j]
                stages[j][:, r] = np.where(mask[:, r], base[j][:, r] + inner[:, r], 0)
            it += 1
        out.iterations.append(it)
        if change > cfg.threshold:
            out.converged = False
    return out


def rk_step(
    rk: RKTableau,
    plan: Optional[ComputationPlan],
    ivp: InitialValueProblem,
    t: float,
    y0: np.ndarray,
    h: float,
    cfg: PicardConfig = PicardConfig(),
) -> StepOutcome:
    """One step of a classical method applied to the first-order reduction.

    Rank 1 accumulates rhs evaluations; rank ``N > 1`` accumulates the
    rank ``N - 1`` stage values, both with the single weight matrix ``w_1``.
    The problem must have a uniform order vector.
    """
    if not ivp.uniform:
        raise ValueError("classical methods need a uniform order vector")
    n, s = ivp.n, rk.s
    plan = plan if plan is not None else computation_plan(as_gmork(rk), 1)
    _check(plan, s, 1)
    y0 = as_jet(y0, ivp.orders)
    dtype = _dtype(y0, h)
    A = rk.w1
    stages = np.empty((s + 1, ivp.d, n), dtype=dtype)
    stages[:] = y0
    F = np.zeros((s, ivp.d), dtype=dtype)
    times = t + rk.nodes * h
    out = StepOutcome(stages, F)

    def constant(j: int, cols: Sequence[int]) -> np.ndarray:
        cols = list(cols)
        y = np.array(y0, dtype=dtype)
        if cols:
            a = A[j, cols]
            y[:, 0] += h * (a @ F[cols])
            if n > 1:
                y[:, 1:] += h * np.tensordot(a, stages[cols, :, :-1], axes=1)
        return y

    for block in plan.blocks:
        if isinstance(block, Explicit):
            j = block.stage
            stages[j] = constant(j, range(s))
            if j < s:
                F[j] = _evaluate(ivp, times[j], stages[j], j)
            elif not ivp.in_domain(times[j], stages[j]):
                raise StepRejected(j, times[j])
            continue

        J = list(block.stages)
        base = {j: constant(j, block.complement) for j in J}
        for j in J:
            stages[j] = base[j]
        change, drift, it = np.inf, np.inf, 0
        while it < cfg.min_iter or (max(change, drift) > cfg.threshold and it < cfg.max_iter):
            fresh = np.array([_evaluate(ivp, times[j], stages[j], j) for j in J])
            change = float(np.max(np.abs(fresh - F[J])))
            F[J] = fresh
            before = stages[J].copy()
            for j in J:
                a = A[j, J]
                for N in range(n - 1, 0, -1):
                    stages[j][:, N] = base[j][:, N] + h * (a @ stages[J, :, N - 1])
                stages[j][:, 0] = base[j][:, 0] + h * (a @ F[J])
            size = max(1.0, float(np.max(np.abs(stages[J]))))
            drift = float(np.max(np.abs(stages[J] - before))) / size if n > 1 else 0.0
            it += 1
        out.iterations.append(it)
        if max(change, drift) > cfg.threshold:
            out.converged = False
    return out


Method = Union[MethodTableau, RKTableau]


@dataclass
class Trajectory:
    """Times, jets and per-step diagnostics of a run."""

    times: list[float]
    jets: list[np.ndarray]
    outcomes: list[StepOutcome] = field(default_factory=list)
    rejected: Optional[StepRejected] = None

    @property
    def converged(self) -> list[bool]:
        return [o.converged for o in self.outcomes]


def step_sequence(
    method: Method,
    ivp: InitialValueProblem,
    hs: Sequence[float],
    cfg: PicardConfig = PicardConfig(),
    t0: Optional[float] = None,
    y0: Optional[np.ndarray] = None,
) -> Trajectory:
    """Take one step per entry of ``hs``, starting from the problem's initial data.

    A rejected step ends the run; the partial trajectory is returned with
    :attr:`Trajectory.rejected` set.
    """
    t = ivp.t0 if t0 is None else float(t0)
    y = ivp.y0 if y0 is None else as_jet(y0, ivp.orders)
    traj = Trajectory([t], [y])
    if isinstance(method, RKTableau):
        plan = computation_plan(as_gmork(method), 1)
        step = rk_step
    else:
        method.ensure_length(ivp.n)
        plan = computation_plan(method, ivp.n)
        step = mork_step
    for h in hs:
        try:
            res = step(method, plan, ivp, t, y, h, cfg)  # type: ignore[arg-type]
        except StepRejected as exc:
            traj.rejected = exc
            break
        t = t + h
        y = res.final.copy()
        traj.times.append(t)
        traj.jets.append(y)
        traj.outcomes.append(res)
    return traj


def lipschitz_weight_constant(method: MethodTableau, n: int, stages: Optional[Sequence[int]] = None) -> float:
    """``max_{j, N <= n} sum_{j'} |w_{N,j,j'}| / N!``, optionally restricted to a stage set."""
    W = np.abs(method.main_stack(n))
    fact = np.array([math.factorial(N) for N in range(1, n + 1)], dtype=float)
    if stages is not None:
        idx = list(stages)
        W = W[:, idx][:, :, idx]
    sums = W.sum(axis=2) / fact[:, None]
    return float(sums.max()) if sums.size else 0.0


def safe_step_bound(
    method: MethodTableau,
    n: int,
    L: float,
    mode: str = "global",
    plan: Optional[ComputationPlan] = None,
) -> float:
    """A step size below which the stage system has a unique solution.

    ``mode="global"`` uses one weight constant for the whole tableau.
    ``mode="per-block"`` looks at each implicit block separately, with the
    smallest and largest implicit ranks of the block as exponents; explicit
    methods then impose no bound at all.
    """
    if not L > 0:
        raise ValueError("the Lipschitz constant must be positive")
    if mode == "global":
        c = L * lipschitz_weight_constant(method, n)
        if c == 0:
            return math.inf
        return min(1.0 / c, c ** (-1.0 / n))
    if mode != "per-block":
        raise ValueError(f"unknown mode {mode!r}")
    plan = plan if plan is not None else computation_plan(method, n)
    best = math.inf
    for block in plan.blocks:
        if not isinstance(block, Implicit):
            continue
        J = list(block.stages)
        ranks = np.flatnonzero(plan.implicit_ranks[:n, J].any(axis=1)) + 1
        if ranks.size == 0:
            continue
        a, b = int(ranks.min()), int(ranks.max())
        c = L * lipschitz_weight_constant(method, n, J)
        if c == 0:
            continue
        best = min(best, c ** (-1.0 / b), c ** (-1.0 / a))
    return best
