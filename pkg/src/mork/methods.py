"""Named methods and tableau surgery.

Catalog weights are closed forms in the rank ``N``: every entry is a short
sum of terms ``coef * base**N * P(N) / Q(N)`` with polynomial ``P`` and ``Q``.
They are evaluated in 50-digit decimal arithmetic and rounded once to double,
which keeps irrational entries (the square roots in the Gauss methods) as
accurate as a double allows for every rank.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from mork.core import Kind, MethodTableau, WeightFn

__all__ = [
    "RKTableau",
    "Permutation",
    "CATALOG_NAMES",
    "catalog",
    "method_from_name",
    "as_gmork",
    "ndmork",
    "mork_from_times",
    "permute",
    "truncate",
    "extend",
    "overwrite",
    "remove_useless",
    "scale",
    "emork_2_3_2",
    "imork_1_1_2",
    "rk4_variant",
]

_PREC = 50
Number = Union[int, Fraction, decimal.Decimal, str]


def _dec(x: Number) -> decimal.Decimal:
    with decimal.localcontext() as ctx:
        ctx.prec = _PREC
        if isinstance(x, Fraction):
            return decimal.Decimal(x.numerator) / decimal.Decimal(x.denominator)
        if isinstance(x, float):
            return decimal.Decimal(x)
        return +decimal.Decimal(x)


def _sqrt(x: Number) -> decimal.Decimal:
    with decimal.localcontext() as ctx:
        ctx.prec = _PREC
        return _dec(x).sqrt()


@dataclass(frozen=True)
class Term:
    """``coef * base**N * num(N) / den(N)``; polynomials use ascending coefficients."""

    coef: decimal.Decimal
    base: decimal.Decimal
    num: tuple[decimal.Decimal, ...]
    den: tuple[decimal.Decimal, ...]

    def __call__(self, N: int) -> decimal.Decimal:
        n = decimal.Decimal(N)
        p = sum((c * n**i for i, c in enumerate(self.num)), decimal.Decimal(0))
        q = sum((c * n**i for i, c in enumerate(self.den)), decimal.Decimal(0))
        return self.coef * self.base**N * p / q


def T(coef: Number = 1, base: Number = 1, num: Sequence[Number] = (1,), den: Sequence[Number] = (1,)) -> Term:
    """Build a :class:`Term` from exact or decimal inputs."""
    return Term(_dec(coef), _dec(base), tuple(_dec(c) for c in num), tuple(_dec(c) for c in den))


Entry = tuple[Term, ...]


class ClosedFormWeights:
    """An ``(s+1) x s`` matrix of closed-form entries, callable on the rank."""

    def __init__(self, rows: Sequence[Sequence[Union[Entry, Term, Number]]]) -> None:
        self.rows: list[list[Entry]] = [[self._entry(e) for e in row] for row in rows]
        widths = {len(r) for r in self.rows}
        if len(widths) != 1:
            raise ValueError("ragged closed-form matrix")
        self.shape = (len(self.rows), widths.pop())
        self._cache = lru_cache(maxsize=None)(self._evaluate)

    @staticmethod
    def _entry(e: Union[Entry, Term, Number]) -> Entry:
        if isinstance(e, Term):
            return (e,)
        if isinstance(e, tuple):
            return e
        if e == 0:
            return ()
        return (T(e),)

    def _evaluate(self, N: int) -> np.ndarray:
        out = np.zeros(self.shape)
        with decimal.localcontext() as ctx:
            ctx.prec = _PREC
            for i, row in enumerate(self.rows):
                for j, entry in enumerate(row):
                    if entry:
                        out[i, j] = float(sum((t(N) for t in entry), decimal.Decimal(0)))
        return out

    def __call__(self, N: int) -> np.ndarray:
        return self._cache(N).copy()


@dataclass(frozen=True)
class RKTableau:
    """A classical Runge-Kutta method: nodes plus one ``(s+1) x s`` weight matrix."""

    nodes: np.ndarray
    w1: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        w1 = np.array(self.w1, dtype=float)
        s = w1.shape[1]
        tau = np.asarray(self.nodes, dtype=float)
        if tau.shape == (s,):
            tau = np.append(tau, 1.0)
        if w1.shape != (s + 1, s) or tau.shape != (s + 1,):
            raise ValueError("RK tableau needs s+1 rows, s columns and s or s+1 nodes")
        w1.setflags(write=False)
        tau.setflags(write=False)
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "nodes", tau)

    @property
    def s(self) -> int:
        return self.w1.shape[1]


def as_gmork(rk: RKTableau) -> MethodTableau:
    """The length-1 multi-order method sharing ``rk``'s nodes and weights."""
    w1 = rk.w1
    return MethodTableau(rk.s, rk.nodes, lambda N: w1, kind=Kind.NODE_DETERMINED, length=1, name=rk.name)


def ndmork(nodes: Sequence[float], weights: WeightFn, *, length: Optional[int] = None, name: str = "") -> MethodTableau:
    """A node-determined method: secondary weights are Taylor rows of the nodes."""
    s = np.asarray(weights(1)).shape[1]
    return MethodTableau(s, nodes, weights, kind=Kind.NODE_DETERMINED, length=length, name=name)


def mork_from_times(
    nodes: Sequence[float], weights: WeightFn, times: WeightFn, *, length: Optional[int] = None, name: str = ""
) -> MethodTableau:
    """A method of consistency order 0 given by its approximation times for ``N >= 2``."""
    s = np.asarray(weights(1)).shape[1]
    return MethodTableau(s, nodes, weights, kind=Kind.MORK, xi=times, length=length, name=name)


# ---------------------------------------------------------------------------
# catalog

_F = Fraction
_RK_TABLE: dict[str, tuple[list, list]] = {
    "rk-euler": ([0, 1], [[0], [1]]),
    "rk-midpoint": ([0, _F(1, 2), 1], [[0, 0], [_F(1, 2), 0], [0, 1]]),
    "rk-ralston": ([0, _F(2, 3), 1], [[0, 0], [_F(2, 3), 0], [_F(1, 4), _F(3, 4)]]),
    "rk-heun": (
        [0, _F(1, 3), _F(2, 3), 1],
        [[0, 0, 0], [_F(1, 3), 0, 0], [0, _F(2, 3), 0], [_F(1, 4), 0, _F(3, 4)]],
    ),
    "rk4": (
        [0, _F(1, 2), _F(1, 2), 1, 1],
        [
            [0, 0, 0, 0],
            [_F(1, 2), 0, 0, 0],
            [0, _F(1, 2), 0, 0],
            [0, 0, 1, 0],
            [_F(1, 6), _F(1, 3), _F(1, 3), _F(1, 6)],
        ],
    ),
    "rk4b": (
        [0, _F(1, 2), _F(1, 2), 1, 1],
        [
            [0, 0, 0, 0],
            [_F(1, 2), 0, 0, 0],
            [_F(1, 4), _F(1, 4), 0, 0],
            [0, -1, 2, 0],
            [_F(1, 6), 0, _F(4, 6), _F(1, 6)],
        ],
    ),
    "rk-implicit-euler": ([1, 1], [[1], [1]]),
    "rk-implicit-midpoint": ([_F(1, 2), 1], [[_F(1, 2)], [1]]),
    "rk-crank-nicolson": ([0, 1, 1], [[0, 0], [_F(1, 2), _F(1, 2)], [_F(1, 2), _F(1, 2)]]),
    "rk-cnb": ([0, _F(2, 3), 1], [[0, 0], [_F(1, 3), _F(1, 3)], [_F(1, 4), _F(3, 4)]]),
}


def _gauss_legendre_4() -> RKTableau:
    with decimal.localcontext() as ctx:
        ctx.prec = _PREC
        r = _sqrt(3) / 6
    half, quarter = _dec(_F(1, 2)), _dec(_F(1, 4))
    tau = [float(half - r), float(half + r), 1.0]
    w = [
        [float(quarter), float(quarter - r)],
        [float(quarter + r), float(quarter)],
        [0.5, 0.5],
    ]
    return RKTableau(np.array(tau), np.array(w), "rk-gauss-legendre-4")


def _rk(name: str) -> RKTableau:
    if name == "rk-gauss-legendre-4":
        return _gauss_legendre_4()
    tau, w = _RK_TABLE[name]
    return RKTableau(np.array([float(x) for x in tau]), np.array([[float(x) for x in r] for r in w]), name)


_ONE_PLUS = (1, 1)  # the polynomial 1 + N
_ONE_PLUS_TWO_PLUS = (2, 3, 1)  # (1 + N)(2 + N)


def emork_2_3_2(tau2: Union[float, Fraction]) -> MethodTableau:
    """Explicit two-point family with order 2 at the last stage for every rank."""
    t2 = _dec(Fraction(tau2))
    if t2 == 0:
        raise ValueError("the EMORK 2-3-2 family needs tau2 != 0")
    inv = 1 / t2
    w = ClosedFormWeights(
        [
            [0, 0],
            [T(base=t2), 0],
            [(T(1), T(coef=-inv, den=_ONE_PLUS)), T(coef=inv, den=_ONE_PLUS)],
        ]
    )
    return ndmork([0.0, float(t2), 1.0], w, name=f"emork-2-3-2:{float(t2)!r}")


def imork_1_1_2(tau1: float) -> MethodTableau:
    """One-point implicit family with order 2 at stage 1 for ranks ``N >= 2``.

    The free parameter is ``tau1 = w_{1,1,1}``.  For ``N >= 2`` the
    approximation time of stage 1 is ``(1 + N) tau1`` and the weight is its
    ``N``-th power; the last stage reproduces the solution at ``t + h``.
    """
    x = float(tau1)
    if x == 0.0:
        raise ValueError("the IMORK 1-1-2 family needs a nonzero parameter")

    def weights(N: int) -> np.ndarray:
        if N == 1:
            return np.array([[x], [1.0]])
        return np.array([[((1 + N) * x) ** N], [1.0]])

    def times(N: int) -> np.ndarray:
        return np.array([(1 + N) * x, 1.0])

    return mork_from_times([x, 1.0], weights, times, name=f"imork-1-1-2:{x!r}")


def _mork_catalog() -> dict[str, Callable[[], MethodTableau]]:
    half, third, two_thirds = _F(1, 2), _F(1, 3), _F(2, 3)
    with decimal.localcontext() as ctx:
        ctx.prec = _PREC
        s3 = _sqrt(3)
        t1 = _dec(half) - s3 / 6
        t2 = _dec(half) + s3 / 6
        gj_a, gj_b = (1 + s3) / 2, (1 - s3) / 2
        gj_c, gj_d = -s3 * t1, s3 * t2

    def nd(name: str, nodes: Sequence[Number], rows: list) -> Callable[[], MethodTableau]:
        return lambda: ndmork([float(_dec(v)) for v in nodes], ClosedFormWeights(rows), name=name)

    table = {
        "mork-euler": nd("mork-euler", [0, 1], [[0], [1]]),
        "mork-ralston": nd(
            "mork-ralston",
            [0, two_thirds, 1],
            [
                [0, 0],
                [T(base=two_thirds), 0],
                [T(num=(-1, 2), den=(2, 2)), T(num=(3,), den=(2, 2))],
            ],
        ),
        "mork-heun": nd(
            "mork-heun",
            [0, third, two_thirds, 1],
            [
                [0, 0, 0],
                [T(base=third), 0, 0],
                [T(base=two_thirds, num=(-1, 1), den=_ONE_PLUS), T(base=two_thirds, num=(2,), den=_ONE_PLUS), 0],
                [
                    (T(1), T(num=(0, -9), den=(4, 6, 2))),
                    T(num=(-6, 6), den=_ONE_PLUS_TWO_PLUS),
                    T(num=(12, -3), den=(4, 6, 2)),
                ],
            ],
        ),
        "mork4": nd(
            "mork4",
            [0, half, half, 1, 1],
            [
                [0, 0, 0, 0],
                [T(base=half), 0, 0, 0],
                [T(base=half, num=(-1, 1), den=_ONE_PLUS), T(coef=2, base=half, den=_ONE_PLUS), 0, 0],
                [T(num=(-1, 1), den=_ONE_PLUS), T(num=(1, -1), den=_ONE_PLUS), 1, 0],
                [
                    T(num=(0, 0, 1), den=_ONE_PLUS_TWO_PLUS),
                    T(num=(0, 2), den=_ONE_PLUS_TWO_PLUS),
                    T(num=(0, 2), den=_ONE_PLUS_TWO_PLUS),
                    T(num=(2, -1), den=_ONE_PLUS_TWO_PLUS),
                ],
            ],
        ),
        "mork4b": nd(
            "mork4b",
            [0, half, half, 1, 1],
            [
                [0, 0, 0, 0],
                [T(base=half), 0, 0, 0],
                [T(base=half, num=(0, 1), den=_ONE_PLUS), T(base=half, den=_ONE_PLUS), 0, 0],
                [T(num=(-1, 1), den=_ONE_PLUS), T(num=(-4, 2), den=_ONE_PLUS), T(num=(6, -2), den=_ONE_PLUS), 0],
                [
                    T(num=(0, 0, 1), den=_ONE_PLUS_TWO_PLUS),
                    0,
                    T(num=(0, 4), den=_ONE_PLUS_TWO_PLUS),
                    T(num=(2, -1), den=_ONE_PLUS_TWO_PLUS),
                ],
            ],
        ),
        "mork-implicit-euler": nd("mork-implicit-euler", [1, 1], [[1], [1]]),
        "mork-implicit-midpoint": nd("mork-implicit-midpoint", [half, 1], [[T(base=half)], [1]]),
        "mork-crank-nicolson": nd(
            "mork-crank-nicolson", [0, 1, 1], [[0, 0], [half, half], [half, half]]
        ),
        "mork-cnb": nd(
            "mork-cnb",
            [0, two_thirds, 1],
            [
                [0, 0],
                [T(base=two_thirds, num=(0, 1), den=_ONE_PLUS), T(base=two_thirds, den=_ONE_PLUS)],
                [T(num=(-1, 2), den=(2, 2)), T(num=(3,), den=(2, 2))],
            ],
        ),
        "mork-gauss-jacobi-4": nd(
            "mork-gauss-jacobi-4",
            [t1, t2, 1],
            [
                [
                    T(base=t1, num=(1, gj_a), den=_ONE_PLUS),
                    T(coef=gj_c, base=t1, num=(0, 1), den=_ONE_PLUS),
                ],
                [
                    T(coef=gj_d, base=t2, num=(0, 1), den=_ONE_PLUS),
                    T(base=t2, num=(1, gj_b), den=_ONE_PLUS),
                ],
                [
                    (T(half), T(coef=s3, num=(-1, 1), den=(2, 2))),
                    (T(half), T(coef=-s3, num=(-1, 1), den=(2, 2))),
                ],
            ],
        ),
    }
    table["mork-midpoint"] = lambda: _renamed(emork_2_3_2(Fraction(1, 2)), "mork-midpoint")
    return table


def _renamed(m: MethodTableau, name: str) -> MethodTableau:
    m.name = name
    return m


_MORK_FACTORIES = _mork_catalog()

_FAMILIES = {"emork-2-3-2": emork_2_3_2, "imork-1-1-2": imork_1_1_2}

#: Every fixed name understood by :func:`catalog`; families take ``name:param``.
CATALOG_NAMES: tuple[str, ...] = tuple(
    list(_RK_TABLE) + ["rk-gauss-legendre-4"] + sorted(_MORK_FACTORIES, key=lambda k: k)
)


def catalog(name: str, *params: float) -> Union[MethodTableau, RKTableau]:
    """Look up a named method.

    Classical methods (``rk-*``) come back as :class:`RKTableau`; multi-order
    ones as :class:`MethodTableau`.  Parametrised families accept their
    parameter either positionally or after a colon, as in
    ``"emork-2-3-2:0.5"``.

    >>> catalog("mork-midpoint").main_weights(2)[2].tolist()
    [0.3333333333333333, 0.6666666666666666]
    """
    base, _, tail = name.partition(":")
    if base in _FAMILIES:
        if tail:
            params = (float(Fraction(tail)),) + params
        if len(params) != 1:
            raise ValueError(f"{base} takes exactly one parameter")
        return _FAMILIES[base](params[0])
    if tail or params:
        raise ValueError(f"{base} does not take parameters")
    if base in _RK_TABLE or base == "rk-gauss-legendre-4":
        return _rk(base)
    if base in _MORK_FACTORIES:
        return _MORK_FACTORIES[base]()
    raise KeyError(f"unknown method {name!r}")


def method_from_name(name: str, n: Optional[int] = None) -> MethodTableau:
    """Like :func:`catalog` but always returns a multi-order tableau.

    Classical methods are lifted to length 1 and, when ``n > 1`` is given,
    extended to length ``n``; the result then acts on an order-``n`` problem
    exactly as the classical method acts on its first-order reduction.
    """
    m = catalog(name)
    if isinstance(m, RKTableau):
        g = as_gmork(m)
        return extend(g, n) if n is not None and n > 1 else g
    return m


# ---------------------------------------------------------------------------
# permutations


@dataclass(frozen=True)
class Permutation:
    """A bijection of ``1..s+1`` that fixes ``s+1``; ``images[j-1]`` is ``phi(j)``."""

    images: tuple[int, ...]

    def __post_init__(self) -> None:
        imgs = tuple(int(i) for i in self.images)
        size = len(imgs)
        if sorted(imgs) != list(range(1, size + 1)):
            raise ValueError("not a bijection of 1..s+1")
        if imgs[-1] != size:
            raise ValueError("the last stage must stay in place")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def from_cycles(cls, size: int, *cycles: Iterable[int]) -> "Permutation":
        imgs = list(range(1, size + 1))
        for cyc in cycles:
            cyc = list(cyc)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                imgs[a - 1] = b
        return cls(tuple(imgs))

    @classmethod
    def identity(cls, size: int) -> "Permutation":
        return cls(tuple(range(1, size + 1)))

    def __call__(self, j: int) -> int:
        return self.images[j - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for j, img in enumerate(self.images, start=1):
            inv[img - 1] = j
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """``self o other``."""
        return Permutation(tuple(self(other(j)) for j in range(1, len(self.images) + 1)))

    @property
    def index(self) -> np.ndarray:
        return np.array(self.images) - 1


def permute(method: MethodTableau, phi: Permutation) -> MethodTableau:
    """Relabel the stages: stage ``j`` of the result is stage ``phi(j)`` of ``method``."""
    s = method.s
    if len(phi.images) != s + 1:
        raise ValueError(f"permutation acts on {len(phi.images)} stages, method has {s + 1}")
    idx = phi.index
    cols = idx[:s]

    def main(N: int) -> np.ndarray:
        return method.main_weights(N)[idx][:, cols]

    def secondary(N: int) -> np.ndarray:
        return method.secondary_weights(N)[idx]

    xi = method.xi_provider()
    times = (lambda N: np.asarray(xi(N))[idx]) if xi is not None else None
    return MethodTableau(
        s,
        method.nodes[idx],
        main,
        kind=method.kind,
        secondary=secondary,
        xi=times,
        length=method.length,
        name=f"{method.name}*perm",
    )


def rk4_variant() -> RKTableau:
    """RK4 with its stages listed in the order 4, 3, 1, 2 of the classical layout.

    Its weight matrix is not strictly lower triangular, yet it contains no
    closed diwalk, so it is explicit.
    """
    h, t, x = 0.5, 1.0 / 3.0, 1.0 / 6.0
    w = np.array(
        [
            [0, 0, h, 0],
            [1, 0, 0, 0],
            [0, 0, 0, h],
            [0, 0, 0, 0],
            [t, x, t, x],
        ]
    )
    return RKTableau(np.array([0.5, 1.0, 0.5, 0.0, 1.0]), w, "rk4-variant")


# ---------------------------------------------------------------------------
# length changes


def truncate(method: MethodTableau, n: int) -> MethodTableau:
    """Keep ranks ``1..n`` only."""
    if method.length is not None and n > method.length:
        raise ValueError(f"cannot truncate a length-{method.length} method at {n}")
    return MethodTableau(
        method.s,
        method.nodes,
        method.main_weights,
        kind=method.kind,
        secondary=method.secondary_weights,
        xi=method.xi_provider(),
        length=n,
        name=f"truncate({method.name}, {n})",
    )


def extend(method: MethodTableau, n: int, base_length: Optional[int] = None) -> MethodTableau:
    """Extend a finite-length method to length ``n``.

    High ranks are obtained by composing the top rank ``nt`` with itself,
    which amounts to matrix powers of ``w_nt / nt!``.  ``base_length``
    selects ``nt`` for methods of infinite length.
    """
    nt = method.length if base_length is None else base_length
    if nt is None:
        raise ValueError("extension needs a finite base length")
    if method.length is not None and nt > method.length:
        raise ValueError("base length exceeds the method length")
    if n <= nt:
        raise ValueError(f"target length {n} must exceed {nt}")
    s = method.s
    top = method.main_weights(nt) / math.factorial(nt)
    block = top[:s]
    paths: dict[int, np.ndarray] = {1: top}

    def path(q: int) -> np.ndarray:
        # top @ block^(q-1): weight of every diwalk with q factors.
        if q not in paths:
            paths[q] = path(q - 1) @ block
        return paths[q]

    def main(N: int) -> np.ndarray:
        if N <= nt:
            return method.main_weights(N)
        q = (N - 1) // nt
        r = N - q * nt
        tail = method.main_weights(r)[:s] / math.factorial(r)
        return math.factorial(N) * (path(q) @ tail)

    def secondary(N: int) -> np.ndarray:
        if N <= nt:
            return method.secondary_weights(N)
        out = np.empty((s + 1, N))
        for Np in range(N):
            q = Np // nt
            rank = min(N - q * nt, nt)
            col = method.secondary_weights(rank)[:, Np - q * nt]
            out[:, Np] = col if q == 0 else path(q) @ col[:s]
        return out

    return MethodTableau(
        s, method.nodes, main, secondary=secondary, length=n, name=f"extend({method.name}, {n})"
    )


def overwrite(method: MethodTableau, N: int, Np: int) -> MethodTableau:
    """Replace rank ``N`` by the composition of ranks ``Np`` and ``N - Np``."""
    bound = method.length
    if not (2 <= N and 1 <= Np < N) or (bound is not None and N > bound):
        raise ValueError(f"invalid overwrite ranks N={N}, N'={Np}")
    s = method.s

    def left() -> np.ndarray:
        return method.main_weights(Np) / math.factorial(Np)

    def main(M: int) -> np.ndarray:
        if M != N:
            return method.main_weights(M)
        right = method.main_weights(N - Np)[:s] / math.factorial(N - Np)
        return math.factorial(N) * (left() @ right)

    def secondary(M: int) -> np.ndarray:
        wt = method.secondary_weights(M)
        if M != N:
            return wt
        out = np.array(wt, copy=True)
        inner = method.secondary_weights(N - Np)[:s]
        for Npp in range(Np, N):
            out[:, Npp] = left() @ inner[:, Npp - Np]
        return out

    return MethodTableau(
        s, method.nodes, main, secondary=secondary, length=bound, name=f"overwrite({method.name}, {N}, {Np})"
    )


def remove_useless(method: MethodTableau, n: int) -> MethodTableau:
    """Drop the stages that cannot influence the last stage up to rank ``n``.

    The result has length ``n`` because usefulness is judged on ranks up to
    ``n`` only.
    """
    from mork.graph import useful_stages

    keep = sorted(useful_stages(method, n))
    if not keep:
        raise ValueError("every stage is useless; nothing would remain")
    s = method.s
    idx = np.array(keep + [s])
    cols = idx[:-1]

    xi = method.xi_provider()
    times = (lambda N: np.asarray(xi(N))[idx]) if xi is not None else None
    return MethodTableau(
        len(keep),
        method.nodes[idx],
        lambda N: method.main_weights(N)[idx][:, cols],
        kind=method.kind,
        secondary=lambda N: method.secondary_weights(N)[idx],
        xi=times,
        length=n if method.length is None else min(n, method.length),
        name=f"useful({method.name})",
    )


def scale(method: MethodTableau, lam: float) -> MethodTableau:
    """Stretch a method in time by ``lam``: nodes, times and rank-``N`` weights."""
    lam = float(lam)

    def main(N: int) -> np.ndarray:
        return lam**N * method.main_weights(N)

    def secondary(N: int) -> np.ndarray:
        return method.secondary_weights(N) * lam ** np.arange(N)

    xi = method.xi_provider()
    times = (lambda N: lam * np.asarray(xi(N))) if xi is not None else None
    return MethodTableau(
        method.s,
        lam * method.nodes,
        main,
        kind=method.kind,
        secondary=secondary,
        xi=times,
        length=method.length,
        name=f"scale({method.name}, {lam!r})",
    )
