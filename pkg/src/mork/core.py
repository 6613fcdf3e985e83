"""Domain types for multi-order Runge-Kutta methods and initial value problems.

Jets are stored as arrays of shape ``(d, n_max)``: row ``k`` is an entry of the
state, column ``N - 1`` holds rank ``N``.  Rank ``N`` of an entry of order
``n_k`` is its ``(n_k - N)``-th derivative, so the last valid column of a row is
the solution value itself.  Columns beyond an entry's own order are padding and
are kept at zero.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from mork._poly import vieta_coefficients

__all__ = [
    "MAX_LENGTH",
    "Kind",
    "MethodTableau",
    "InitialValueProblem",
    "ConfluentLinearProblem",
    "as_jet",
    "confluent_linear_ivp",
    "linear_ivp_from_roots",
    "reduce_to_first_order",
    "prolong_ivp",
    "reduce_ivp",
    "autonomize_rank1",
]

#: Largest rank for which ``N!`` is still a finite double.
MAX_LENGTH = 170

Rhs = Callable[[float, np.ndarray], np.ndarray]
WeightFn = Callable[[int], np.ndarray]


class Kind(enum.Enum):
    """Which family a tableau belongs to; decides how secondary weights arise."""

    GENERAL = "general"
    NODE_DETERMINED = "node-determined"
    MORK = "mork"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


class MethodTableau:
    """A general multi-order Runge-Kutta method.

    Parameters
    ----------
    s : int
        Number of points (stages that evaluate the right-hand side).
    nodes : sequence of float
        Nodes ``tau_1 .. tau_s``, optionally followed by ``tau_{s+1}``.  When
        only ``s`` values are given, ``tau_{s+1}`` defaults to 1.
    main : callable
        ``N -> (s+1, s)`` array of main weights ``w_{N,j,j'}``.
    kind : Kind
        Family tag.  For :attr:`Kind.NODE_DETERMINED` the secondary weights are
        ``tau_j**N' / N'!``.  For :attr:`Kind.MORK` they are built from the
        approximation times returned by ``xi``.
    secondary : callable, optional
        ``N -> (s+1, N)`` array with column ``N'`` holding ``w~_{N,N',j}``.
        Required for :attr:`Kind.GENERAL`.
    xi : callable, optional
        ``N -> (s+1,)`` approximation times for ``N >= 2`` (mork kind only).
    length : int, optional
        Largest admissible rank; ``None`` means the method is defined for
        every rank.
    name : str
        Label used in reports.

    Notes
    -----
    Weight matrices are materialised lazily and memoised.  The cache is
    guarded by a lock, so concurrent readers are safe; callers that share a
    tableau between threads should still call :meth:`ensure_length` up front
    to keep the hot path lock-free in practice.
    """

    def __init__(
        self,
        s: int,
        nodes: Sequence[float],
        main: WeightFn,
        *,
        kind: Kind = Kind.GENERAL,
        secondary: Optional[WeightFn] = None,
        xi: Optional[WeightFn] = None,
        length: Optional[int] = None,
        name: str = "",
    ) -> None:
        if s < 1:
            raise ValueError("a method needs at least one point")
        tau = np.asarray(nodes, dtype=float)
        if tau.shape == (s,):
            tau = np.append(tau, 1.0)
        if tau.shape != (s + 1,):
            raise ValueError(f"expected {s} or {s + 1} nodes, got {tau.shape}")
        if kind is Kind.GENERAL and secondary is None:
            raise ValueError("general tableaus need explicit secondary weights")
        if kind is Kind.MORK and xi is None:
            raise ValueError("mork tableaus need an approximation-time provider")
        if length is not None and not 1 <= length <= MAX_LENGTH:
            raise ValueError(f"length must lie in [1, {MAX_LENGTH}]")
        self.s = s
        self.nodes = _frozen(tau)
        self.kind = kind
        self.length = length
        self.name = name
        self._main_fn = main
        self._secondary_fn = secondary
        self._xi_fn = xi
        self._main: list[np.ndarray] = []
        self._secondary: list[np.ndarray] = []
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        label = self.name or "anonymous"
        bound = "inf" if self.length is None else str(self.length)
        return f"MethodTableau({label!r}, s={self.s}, kind={self.kind.value}, length={bound})"

    @property
    def cached_length(self) -> int:
        """Largest rank whose weights are already materialised."""
        return len(self._main)

    @property
    def is_infinite(self) -> bool:
        return self.length is None

    def _check_rank(self, N: int) -> None:
        if N < 1:
            raise ValueError(f"ranks start at 1, got {N}")
        bound = MAX_LENGTH if self.length is None else self.length
        if N > bound:
            raise ValueError(f"rank {N} exceeds the method length {bound}")

    def ensure_length(self, n: int) -> None:
        """Materialise the weights of every rank up to ``n``."""
        self._check_rank(n)
        if n <= len(self._main):
            return
        with self._lock:
            for N in range(len(self._main) + 1, n + 1):
                w = np.asarray(self._main_fn(N), dtype=float)
                if w.shape != (self.s + 1, self.s):
                    raise ValueError(f"main weights for rank {N} have shape {w.shape}")
                wt = self._build_secondary(N)
                self._secondary.append(_frozen(wt))
                self._main.append(_frozen(w))

    def _build_secondary(self, N: int) -> np.ndarray:
        if self.kind is Kind.NODE_DETERMINED:
            return taylor_rows(self.nodes, N)
        if self.kind is Kind.MORK:
            if N == 1:
                return np.ones((self.s + 1, 1))
            xi = np.asarray(self._xi_fn(N), dtype=float)  # type: ignore[misc]
            return taylor_rows(xi, N)
        wt = np.asarray(self._secondary_fn(N), dtype=float)  # type: ignore[misc]
        if wt.shape != (self.s + 1, N):
            raise ValueError(f"secondary weights for rank {N} have shape {wt.shape}")
        return wt

    def main_weights(self, N: int) -> np.ndarray:
        """Read-only ``(s+1, s)`` matrix of ``w_{N,j,j'}``."""
        self.ensure_length(N)
        return self._main[N - 1]

    def secondary_weights(self, N: int) -> np.ndarray:
        """Read-only ``(s+1, N)`` matrix; entry ``[j, N']`` is ``w~_{N,N',j}``."""
        self.ensure_length(N)
        return self._secondary[N - 1]

    def main_stack(self, n: int) -> np.ndarray:
        """All main weights up to rank ``n`` as an ``(n, s+1, s)`` array."""
        self.ensure_length(n)
        return np.stack(self._main[:n])

    def xi_provider(self) -> Optional[WeightFn]:
        return self._xi_fn


def taylor_rows(times: np.ndarray, N: int) -> np.ndarray:
    """Rows ``t_j**N' / N'!`` for ``N'`` in ``0..N-1``, with ``0**0 == 1``."""
    times = np.asarray(times, dtype=float)
    out = np.empty((times.size, N))
    out[:, 0] = 1.0
    for p in range(1, N):
        out[:, p] = out[:, p - 1] * times / p
    return out


def as_jet(values: Sequence[Sequence[complex]] | np.ndarray, orders: Sequence[int]) -> np.ndarray:
    """Validate a jet against an order vector and return it as a 2-D array.

    A one-dimensional input is read as a single entry whose ranks are listed
    from rank 1 (highest derivative) to rank ``n`` (the value).
    """
    arr = np.asarray(values)
    if arr.ndim == 1:
        arr = arr[None, :]
    orders = tuple(int(o) for o in orders)
    width = max(orders)
    if arr.shape != (len(orders), width):
        raise ValueError(f"jet shape {arr.shape} does not match orders {orders}")
    if not np.issubdtype(arr.dtype, np.complexfloating):
        arr = arr.astype(float)
    else:
        arr = arr.copy()
    for k, nk in enumerate(orders):
        if nk < 1:
            raise ValueError("orders must be positive")
        arr[k, nk:] = 0
    return arr


@dataclass(frozen=True)
class InitialValueProblem:
    """A possibly mixed-order initial value problem.

    ``rhs(t, x)`` receives a jet of shape ``(d, max(orders))`` and must return
    ``d`` values.  It should be a pure function.
    """

    orders: tuple[int, ...]
    rhs: Rhs
    t0: float
    y0: np.ndarray
    domain: Optional[Callable[[float, np.ndarray], bool]] = None
    exact: Optional[Callable[[float], np.ndarray]] = None
    label: str = ""
    to_original: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self) -> None:
        orders = tuple(int(o) for o in self.orders)
        if not orders or min(orders) < 1:
            raise ValueError("orders must be a non-empty vector of positive integers")
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "y0", as_jet(self.y0, orders))

    @property
    def d(self) -> int:
        return len(self.orders)

    @property
    def n(self) -> int:
        return max(self.orders)

    @property
    def uniform(self) -> bool:
        return len(set(self.orders)) == 1

    def f(self, t: float, x: np.ndarray) -> np.ndarray:
        out = np.asarray(self.rhs(t, x))
        if out.shape != (self.d,):
            raise ValueError(f"rhs returned shape {out.shape}, expected ({self.d},)")
        return out

    def in_domain(self, t: float, x: np.ndarray) -> bool:
        return True if self.domain is None else bool(self.domain(t, x))


@dataclass(frozen=True)
class ConfluentLinearProblem:
    """Parameters of ``(d/dt - lam)^n y = 0`` with a jet prescribed at ``t0``."""

    n: int
    lam: complex
    y0: np.ndarray
    t0: float = 0.0
    a: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("order must be at least 1")
        y0 = np.asarray(self.y0, dtype=complex).reshape(-1)
        if y0.size != self.n:
            raise ValueError(f"expected {self.n} initial ranks, got {y0.size}")
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "a", _confluent_poly(self.n, complex(self.lam), y0))

    @property
    def coefficients(self) -> np.ndarray:
        """``alpha_N = -C(n,N) (-lam)^N``, so that ``y^(n) = sum alpha_N x_N``."""
        lam = complex(self.lam)
        return np.array(
            [-math.comb(self.n, N) * (-lam) ** N for N in range(1, self.n + 1)], dtype=complex
        )

    def derivative(self, i: int, t: float) -> complex:
        """The ``i``-th derivative of the exact solution at ``t``."""
        lam = complex(self.lam)
        dt = t - self.t0
        total = 0j
        for k in range(i + 1):
            inner = 0j
            for p in range(k, self.n):
                inner += self.a[p] * math.perm(p, k) * dt ** (p - k)
            total += math.comb(i, k) * lam ** (i - k) * inner
        return complex(np.exp(lam * dt) * total)

    def jet(self, t: float) -> np.ndarray:
        """Exact jet at ``t`` as a ``(1, n)`` array, rank 1 first."""
        return np.array([[self.derivative(self.n - N, t) for N in range(1, self.n + 1)]])


def _confluent_poly(n: int, lam: complex, y0: np.ndarray) -> np.ndarray:
    # y0[n - 1 - k] is the k-th derivative at t0.
    a = np.zeros(n, dtype=complex)
    for i in range(n):
        a[i] = sum(
            (-lam) ** (i - k) / (math.factorial(k) * math.factorial(i - k)) * y0[n - 1 - k]
            for k in range(i + 1)
        )
    return a


def _linear_rhs(alpha: np.ndarray) -> Rhs:
    alpha = np.asarray(alpha)

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        return x @ alpha

    return rhs


def confluent_linear_ivp(
    n: int, lam: complex, t0: float = 0.0, y0: Optional[Sequence[complex]] = None
) -> InitialValueProblem:
    """Scalar order-``n`` problem whose characteristic polynomial is ``(X - lam)^n``.

    With ``y0`` omitted the jet of ``exp(lam (t - t0))`` is used, that is
    rank ``N`` starts at ``lam**(n - N)``.
    """
    if n < 1:
        raise ValueError("order must be at least 1")
    lam = complex(lam)
    if y0 is None:
        y0 = [lam ** (n - N) for N in range(1, n + 1)]
    prob = ConfluentLinearProblem(n, lam, np.asarray(y0, dtype=complex), float(t0))
    return InitialValueProblem(
        orders=(n,),
        rhs=_linear_rhs(prob.coefficients),
        t0=float(t0),
        y0=prob.y0[None, :],
        exact=prob.jet,
        label=f"confluent(n={n}, lam={lam})",
    )


def linear_ivp_from_roots(
    roots: Sequence[complex], t0: float = 0.0, y0: Optional[Sequence[complex]] = None
) -> InitialValueProblem:
    """Scalar linear problem with the given characteristic roots."""
    roots = np.asarray(roots, dtype=complex).reshape(-1)
    if roots.size == 0:
        raise ValueError("at least one root is required")
    n = roots.size
    if np.all(roots == roots[0]):
        return confluent_linear_ivp(n, roots[0], t0, y0)
    alpha = vieta_coefficients(roots)
    if y0 is None:
        y0 = np.ones(n, dtype=complex)
    return InitialValueProblem(
        orders=(n,),
        rhs=_linear_rhs(alpha),
        t0=float(t0),
        y0=np.asarray(y0, dtype=complex)[None, :],
        label=f"linear(roots={list(roots)})",
    )


def _require_uniform(ivp: InitialValueProblem, what: str) -> int:
    if not ivp.uniform:
        raise ValueError(f"{what} needs a uniform order vector; prolong first")
    return ivp.n


def reduce_to_first_order(ivp: InitialValueProblem) -> InitialValueProblem:
    """Stack the ranks of a uniform order-``n`` problem into a first-order system.

    The new state is ``(x_1; ...; x_n)`` with each block of length ``d``.
    """
    _require_uniform(ivp, "reduction to order 1")
    return reduce_ivp(ivp, 1) if ivp.n > 1 else ivp


def reduce_ivp(ivp: InitialValueProblem, target: int) -> InitialValueProblem:
    """Rewrite a uniform order-``n`` problem as an order-``target`` one.

    Every new rank ``N`` holds ``n - target + 1`` stacked blocks of length
    ``d``; block ``c`` of new rank ``N`` stands for original rank ``N + c``.
    """
    n = _require_uniform(ivp, "reduction")
    if not 1 <= target < n:
        raise ValueError(f"target order must lie in [1, {n - 1}]")
    d = ivp.d
    m = n - target + 1
    f = ivp.rhs

    def unpack(x: np.ndarray) -> np.ndarray:
        jet = np.empty((d, n), dtype=x.dtype)
        jet[:, :target] = x[:d, :target]
        for c in range(1, m):
            jet[:, target - 1 + c] = x[c * d : (c + 1) * d, target - 1]
        return jet

    def pack(jet: np.ndarray) -> np.ndarray:
        x = np.empty((m * d, target), dtype=jet.dtype)
        for c in range(m):
            x[c * d : (c + 1) * d, :] = jet[:, c : c + target]
        return x

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        jet = unpack(x)
        top = np.asarray(f(t, jet))
        return np.concatenate([top, jet[:, : m - 1].T.reshape(-1)])

    domain = None
    if ivp.domain is not None:
        dom = ivp.domain
        domain = lambda t, x: dom(t, unpack(x))  # noqa: E731

    exact = None
    if ivp.exact is not None:
        ex = ivp.exact
        exact = lambda t: pack(ex(t))  # noqa: E731

    reduced = InitialValueProblem(
        orders=(target,) * (m * d),
        rhs=rhs,
        t0=ivp.t0,
        y0=pack(ivp.y0),
        domain=domain,
        exact=exact,
        label=f"reduce({ivp.label}, {target})",
        to_original=unpack,
    )
    return reduced


def prolong_ivp(ivp: InitialValueProblem, target: int) -> InitialValueProblem:
    """Raise every entry to order ``target``; the new low ranks start at zero."""
    if target <= ivp.n:
        raise ValueError(f"target order {target} must exceed {ivp.n}")
    f = ivp.rhs
    width = ivp.n

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        return f(t, x[:, :width])

    y0 = np.zeros((ivp.d, target), dtype=ivp.y0.dtype)
    for k, nk in enumerate(ivp.orders):
        y0[k, :nk] = ivp.y0[k, :nk]
    return InitialValueProblem(
        orders=(target,) * ivp.d,
        rhs=rhs,
        t0=ivp.t0,
        y0=y0,
        label=f"prolong({ivp.label}, {target})",
    )


def autonomize_rank1(ivp: InitialValueProblem) -> InitialValueProblem:
    """Append an order-1 entry that tracks time, so the rhs no longer reads ``t``."""
    f = ivp.rhs
    d = ivp.d
    width = ivp.n

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        clock = x[d, 0]
        out = np.asarray(f(clock.real if np.iscomplexobj(x) else clock, x[:d, :width]))
        return np.append(out, 1.0)

    y0 = np.zeros((d + 1, width), dtype=ivp.y0.dtype)
    y0[:d] = ivp.y0
    y0[d, 0] = ivp.t0
    return InitialValueProblem(
        orders=ivp.orders + (1,),
        rhs=rhs,
        t0=ivp.t0,
        y0=y0,
        label=f"autonomize({ivp.label})",
    )
