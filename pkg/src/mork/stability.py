"""Linear stability: resolvent and stability matrices, scans over root sets.

For a linear problem whose characteristic roots are ``r`` and a step ``h``,
one step maps the scaled initial jet through ``R_n(-h r)``.  The functions
here accept either a :class:`~mork.core.MethodTableau` or a classical
:class:`~mork.methods.RKTableau`; the latter is lifted and extended to the
requested order.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from mork._poly import elementary_symmetric, vieta_coefficients
from mork.core import MethodTableau
from mork.methods import RKTableau, as_gmork, extend

__all__ = [
    "SingularResolvent",
    "StabilityMatrices",
    "StabilityReport",
    "LProbe",
    "vieta",
    "roots_from_coefficients",
    "resolvent",
    "stability_matrix",
    "stability_matrix_coeff",
    "stability_matrices_batch",
    "spectral_radius",
    "linear_step_closed_form",
    "a_stability_scan",
    "half_line_scan",
    "l_stability_probe",
    "dahlquist_applies",
    "BOUNDARY_TOL",
    "DEFAULT_SEED",
]

#: Samples with ``rho <= 1 + BOUNDARY_TOL`` pass the non-strict notions.
BOUNDARY_TOL = 1e-9
DEFAULT_SEED = 0x5EED
_SINGULAR = 1e-300

AnyMethod = Union[MethodTableau, RKTableau]


class SingularResolvent(ArithmeticError):
    """The resolvent matrix is singular: the sample lies outside the stability domain."""


def _lift(method: AnyMethod, n: int) -> MethodTableau:
    if isinstance(method, RKTableau):
        g = as_gmork(method)
        return extend(g, n) if n > 1 else g
    return method


def vieta(roots: Sequence[complex]) -> np.ndarray:
    """Coefficients ``alpha`` of ``y^(n) = sum_N alpha_N y^(n-N)`` with the given roots."""
    roots = np.asarray(roots).reshape(-1)
    if roots.size == 0:
        raise ValueError("at least one root is required")
    return vieta_coefficients(roots)


def roots_from_coefficients(alpha: Sequence[complex]) -> np.ndarray:
    """Inverse of :func:`vieta` through the eigenvalues of the companion matrix."""
    alpha = np.asarray(alpha, dtype=complex).reshape(-1)
    n = alpha.size
    comp = np.zeros((n, n), dtype=complex)
    comp[0, :] = alpha
    comp[1:, :-1] = np.eye(n - 1)
    return np.linalg.eigvals(comp)


@dataclass(frozen=True)
class StabilityMatrices:
    """Constant blocks shared by every evaluation of ``R_n``.

    ``W[N-1]`` is row ``s+1`` of ``w_N``; ``Wt`` is lower triangular with
    ``Wt[N-1, c-1] = w~_{N,N-c,s+1}``; ``D = diag(1/N!)``; ``E[N-1]`` is the
    top ``s x s`` block of ``w_N``; ``T[N-1]`` is the ``s x n`` matrix with
    ``T[N-1][j, c-1] = w~_{N,N-c,j}`` for ``c <= N`` and zero otherwise.
    """

    s: int
    n: int
    W: np.ndarray
    Wt: np.ndarray
    D: np.ndarray
    E: np.ndarray
    T: np.ndarray

    @classmethod
    def build(cls, method: AnyMethod, n: int) -> "StabilityMatrices":
        m = _lift(method, n)
        s = m.s
        stack = m.main_stack(n)
        Wt = np.zeros((n, n))
        T = np.zeros((n, s, n))
        for N in range(1, n + 1):
            wt = m.secondary_weights(N)
            for c in range(1, N + 1):
                Wt[N - 1, c - 1] = wt[s, N - c]
                T[N - 1, :, c - 1] = wt[:s, N - c]
        D = np.diag([1.0 / math.factorial(N) for N in range(1, n + 1)])
        return cls(s, n, stack[:, s, :].copy(), Wt, D, stack[:, :s, :].copy(), T)

    def scaled_E(self) -> np.ndarray:
        return self.E * np.diag(self.D)[:, None, None]


def _sym(z: np.ndarray) -> np.ndarray:
    """``e_1..e_n`` of each row of ``z`` (shape ``(m, n)``)."""
    z = np.atleast_2d(z)
    m, n = z.shape
    e = np.zeros((m, n + 1), dtype=complex)
    e[:, 0] = 1
    for i in range(n):
        e[:, 1 : i + 2] = e[:, 1 : i + 2] + z[:, i : i + 1] * e[:, : i + 1]
    return e[:, 1:]


def _assemble(mats: StabilityMatrices, coeff: np.ndarray, sign: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched ``Q = I + sign * sum c_N E_N/N!`` and ``R = Wt - sign * D W Q^{-1} sum c_N T_N``."""
    coeff = np.atleast_2d(coeff).astype(complex)
    m = coeff.shape[0]
    s = mats.s
    A = np.einsum("mk,kij->mij", coeff, mats.scaled_E())
    Q = np.eye(s)[None] + sign * A
    rhs = np.einsum("mk,kij->mij", coeff, mats.T)
    det = np.linalg.det(Q)
    R = np.full((m, mats.n, mats.n), np.nan + 0j)
    ok = np.abs(det) >= _SINGULAR * np.maximum(1.0, np.max(np.abs(Q), axis=(1, 2))) ** s
    if np.any(ok):
        X = np.linalg.solve(Q[ok], rhs[ok])
        DW = mats.D @ mats.W
        R[ok] = mats.Wt[None] - sign * np.einsum("ij,mjk->mik", DW, X)
    return Q, R, det


def stability_matrices_batch(method: AnyMethod, n: int, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``R_n`` at every row of ``Z`` plus ``det Q_n``; singular rows hold NaN."""
    mats = StabilityMatrices.build(method, n)
    _, R, det = _assemble(mats, _sym(np.asarray(Z, dtype=complex).reshape(-1, n)), 1.0)
    return R, det


def resolvent(method: AnyMethod, n: int, z: Sequence[complex]) -> np.ndarray:
    """``Q_n(z) = I_s + sum_N e_N(z) E_s w_N / N!``."""
    mats = StabilityMatrices.build(method, n)
    e = elementary_symmetric(np.asarray(z, dtype=complex).reshape(n))[1:]
    Q, _, _ = _assemble(mats, e[None], 1.0)
    return Q[0]


def stability_matrix(method: AnyMethod, n: int, z: Sequence[complex]) -> np.ndarray:
    """``R_n(z) = Wt - D W Q_n(z)^{-1} sum_N e_N(z) T_N`` (root form)."""
    mats = StabilityMatrices.build(method, n)
    e = elementary_symmetric(np.asarray(z, dtype=complex).reshape(n))[1:]
    _, R, _ = _assemble(mats, e[None], 1.0)
    if np.isnan(R[0]).any():
        raise SingularResolvent(f"Q_{n}(z) is singular at z={list(z)}")
    return R[0]


def stability_matrix_coeff(method: AnyMethod, n: int, zc: Sequence[complex]) -> np.ndarray:
    """Coefficient form ``Wt + D W Q~^{-1} sum_N zc_N T_N`` with ``Q~ = I - sum zc_N E w_N/N!``."""
    mats = StabilityMatrices.build(method, n)
    _, R, _ = _assemble(mats, np.asarray(zc, dtype=complex).reshape(1, n), -1.0)
    if np.isnan(R[0]).any():
        raise SingularResolvent("coefficient-form resolvent is singular")
    return R[0]


def spectral_radius(m: np.ndarray) -> float:
    """Largest eigenvalue modulus of a square matrix (LAPACK ``geev``)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("spectral radius needs a square matrix")
    if m.shape[0] > 64:
        raise ValueError("matrices above 64 x 64 are out of scope")
    try:
        return float(np.max(np.abs(np.linalg.eigvals(m))))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ArithmeticError("eigenvalue iteration did not converge") from exc


def linear_step_closed_form(
    method: AnyMethod, n: int, roots: Sequence[complex], y0: np.ndarray, h: float
) -> np.ndarray:
    """One step on the linear problem with the given roots, without any iteration.

    ``y0`` lists the ranks of a scalar jet (rank 1 first); a ``(1, n)`` array
    is accepted too and the output has the same shape.
    """
    y = np.asarray(y0, dtype=complex)
    flat = y.reshape(n)
    if h == 0:
        m = _lift(method, n)
        lead = np.array([m.secondary_weights(N)[m.s, 0] for N in range(1, n + 1)])
        return (lead * flat).reshape(y.shape)
    H = h ** np.arange(n, dtype=float)
    R = stability_matrix(method, n, -h * np.asarray(roots, dtype=complex))
    return (H * (R @ (flat / H))).reshape(y.shape)


def dahlquist_applies(method: AnyMethod) -> bool:
    """True when ``sum_j w_{1,s+1,j} w~_{1,0,j} != 0``; an explicit method is then never A-stable."""
    m = _lift(method, 1)
    return bool(m.main_weights(1)[m.s] @ m.secondary_weights(1)[: m.s, 0] != 0)


@dataclass
class StabilityReport:
    """Outcome of a scan.

    ``passed`` means no sample violated the notion; a scan is evidence on a
    finite set of samples, not a proof.
    """

    notion: str
    grid: str
    worst_rho: float
    worst_z: np.ndarray
    passed: bool
    samples: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    det: np.ndarray = field(repr=False)
    sample_pass: np.ndarray = field(repr=False)
    singular: int = 0
    review: int = 0

    @property
    def verdict(self) -> str:
        return "no violation found on grid" if self.passed else "violation found"

    def summary(self) -> str:
        z = ",".join(f"{c.real:.17g}{c.imag:+.17g}j" for c in self.worst_z)
        return (
            f"{self.notion}: {self.verdict}; worst rho={self.worst_rho:.17g} at z=({z}); "
            f"samples={len(self.rho)} singular={self.singular} near-boundary={self.review} "
            "(a scan samples finitely many points and is not a proof)"
        )

    def to_csv(self) -> str:
        n = self.samples.shape[1]
        buf = io.StringIO()
        head = []
        for k in range(1, n + 1):
            head += [f"z{k}_re", f"z{k}_im"]
        buf.write(",".join(head + ["det_abs", "rho", "pass"]) + "\n")
        for z, d, r, p in zip(self.samples, self.det, self.rho, self.sample_pass):
            cells = []
            for c in z:
                cells += [f"{c.real:.17g}", f"{c.imag:.17g}"]
            cells += [f"{abs(d):.17g}", f"{r:.17g}", str(bool(p)).lower()]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def _coordinate_mesh(strict: bool, angles: int = 16, radii: int = 12, rmax: float = 1e6) -> np.ndarray:
    if strict:
        theta = np.linspace(-np.pi / 2, np.pi / 2, angles + 2)[1:-1]
    else:
        theta = np.linspace(-np.pi / 2, np.pi / 2, angles)
    rad = np.logspace(-3, np.log10(rmax), radii)
    pts = (rad[:, None] * np.exp(1j * theta[None, :])).reshape(-1)
    if strict:
        return pts
    return np.concatenate([[0j], pts])


def _grid_samples(n: int, strict: bool, samples: int, seed: int) -> tuple[np.ndarray, str]:
    if n <= 2:
        pts = _coordinate_mesh(strict)
        if n == 1:
            return pts[:, None], f"mesh 16 angles x 12 radii up to 1e6 ({pts.size} points)"
        i, j = np.triu_indices(pts.size)
        Z = np.stack([pts[i], pts[j]], axis=1)
        return Z, f"mesh 16 angles x 12 radii per coordinate, unordered pairs ({len(Z)} points)"
    rng = np.random.default_rng(seed)
    rad = 10.0 ** rng.uniform(-3, 6, size=(samples, n))
    theta = rng.uniform(-np.pi / 2, np.pi / 2, size=(samples, n))
    Z = rad * np.exp(1j * theta)
    if strict:
        Z = Z[np.all(Z.real > 0, axis=1)]
    else:
        Z = np.vstack([np.zeros((1, n), dtype=complex), Z])
    return Z, f"monte-carlo {samples} samples seed {seed:#x}"


def _rho_batch(R: np.ndarray) -> np.ndarray:
    rho = np.full(R.shape[0], np.nan)
    ok = ~np.isnan(R).any(axis=(1, 2))
    if np.any(ok):
        rho[ok] = np.max(np.abs(np.linalg.eigvals(R[ok])), axis=1)
    return rho


def _report(notion: str, grid: str, Z: np.ndarray, R: np.ndarray, det: np.ndarray, strict: bool) -> StabilityReport:
    rho = _rho_batch(R)
    valid = ~np.isnan(rho)
    if strict:
        ok = rho < 1.0
    else:
        ok = rho <= 1.0 + BOUNDARY_TOL
    ok = np.where(valid, ok, True)
    if np.any(valid):
        # Deterministic arg-max: largest rho, ties broken lexicographically on z.
        cand = np.flatnonzero(valid & (rho == np.nanmax(rho)))
        keys = sorted(cand, key=lambda i: tuple((c.real, c.imag) for c in Z[i]))
        worst = keys[-1]
        worst_rho, worst_z = float(rho[worst]), Z[worst]
    else:
        worst_rho, worst_z = math.nan, np.zeros(Z.shape[1], dtype=complex)
    review = int(np.sum(valid & (np.abs(rho - 1.0) <= BOUNDARY_TOL)))
    return StabilityReport(
        notion, grid, worst_rho, worst_z, bool(np.all(ok)), Z, rho, det, ok, int(np.sum(~valid)), review
    )


def a_stability_scan(
    method: AnyMethod,
    n: int,
    strict: bool = False,
    samples: int = 4096,
    seed: int = DEFAULT_SEED,
    grid: Optional[np.ndarray] = None,
) -> StabilityReport:
    """Look for root configurations in the right half-plane with ``rho(R_n) > 1``.

    ``strict=True`` checks absolute A-stability: open half-plane and
    ``rho < 1``.  A custom ``grid`` of shape ``(m, n)`` overrides the default
    sampling.
    """
    if grid is None:
        Z, desc = _grid_samples(n, strict, samples, seed)
    else:
        Z, desc = np.asarray(grid, dtype=complex).reshape(-1, n), f"custom grid ({len(grid)} points)"
    R, det = stability_matrices_batch(method, n, Z)
    return _report("absolute-a" if strict else "a", desc, Z, R, det, strict)


def half_line_scan(
    method: AnyMethod,
    n: int,
    direction: Sequence[complex],
    h_grid: Optional[Sequence[float]] = None,
    strict: bool = False,
) -> StabilityReport:
    """Check ``rho(R_n(h z)) <= 1`` for ``h`` on a grid of positive step sizes."""
    z = np.asarray(direction, dtype=complex).reshape(n)
    if np.any(z.real < 0) or (strict and np.any(z.real <= 0)):
        raise ValueError("direction must lie in the closed (strict: open) right half-plane")
    hs = np.logspace(-3, 6, 200) if h_grid is None else np.asarray(h_grid, dtype=float)
    if np.any(hs <= 0):
        raise ValueError("step sizes must be positive")
    Z = hs[:, None] * z[None, :]
    R, det = stability_matrices_batch(method, n, Z)
    return _report("half-line", f"{hs.size} step sizes in [{hs.min():.3g}, {hs.max():.3g}]", Z, R, det, strict)


@dataclass(frozen=True)
class LProbe:
    magnitudes: tuple[float, ...]
    norms: tuple[float, ...]
    decaying: bool

    def to_csv(self) -> str:
        lines = ["magnitude,max_abs_entry"]
        lines += [f"{m:.17g},{v:.17g}" for m, v in zip(self.magnitudes, self.norms)]
        return "\n".join(lines) + "\n"


def l_stability_probe(method: AnyMethod, n: int, magnitudes: Sequence[float]) -> LProbe:
    """Largest entry modulus of ``R_n(m 1_n)`` along increasing ``m``.

    The verdict is "decaying" when the sequence strictly decreases and ends
    below ``1e-3``.  Run an A-stability scan first: the notion presupposes it.
    """
    mags = np.asarray(magnitudes, dtype=float)
    Z = mags[:, None] * np.ones((1, n))
    R, _ = stability_matrices_batch(method, n, Z)
    if np.isnan(R).any():
        raise SingularResolvent("singular resolvent along the probe")
    norms = np.max(np.abs(R), axis=(1, 2))
    decaying = bool(np.all(np.diff(norms) < 0) and norms[-1] < 1e-3)
    return LProbe(tuple(mags.tolist()), tuple(norms.tolist()), decaying)
