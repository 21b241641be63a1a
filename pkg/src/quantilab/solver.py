"""L^r-optimal grid computation.

Two routes: a generalized Lloyd sweep warm-started at the limiting point
density quantiles followed by a damped Newton polish of the stationarity
system (any family), and the closed-form implicit recursion that yields
the exact optimal grid of the exponential law.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special
from scipy.linalg import solve_banded
from scipy.optimize import brentq, minimize_scalar

from .distributions import (
    DistributionSpec,
    Family,
    QuadratureOpts,
    _abs_moment,
    cdf,
    cell_gradient,
    empirical_measure_law,
    interval_mass,
    pdf,
    quantile,
    quantile_sf,
    sf,
)
from .quantizer import Grid

__all__ = [
    "SolverOpts",
    "SolverError",
    "SolveResult",
    "AkSequence",
    "cell_argmin",
    "optimal_grid",
    "exp_ak_sequence",
    "exp_optimal_grid",
    "GridCache",
]

CACHE_ENV_VAR = "QUANTILAB_CACHE_DIR"


def _tight_quad() -> QuadratureOpts:
    # Deep tail cut and small absolute floor: stationarity residuals of
    # far-tail cells are minuscule and would otherwise drown in the
    # truncation bias (outer grid points must still land to ~1e-9).
    return QuadratureOpts(
        abs_tol=1e-16, rel_tol=1e-12, max_subdivisions=4000, tail_mass_cut=1e-20
    )


@dataclass(frozen=True)
class SolverOpts:
    """Iteration controls for ``optimal_grid``."""

    max_lloyd_iters: int = 30
    max_newton_iters: int = 60
    grad_tol: float = 1e-10
    step_damping: float = 0.5
    init: str = "empirical-quantiles"  # or "user-grid"
    lloyd_move_tol: float = 1e-6
    position_tol: float = 1e-10
    quad: QuadratureOpts = field(default_factory=_tight_quad)

    def __post_init__(self) -> None:
        if self.grad_tol <= 0.0 or self.position_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.step_damping <= 1.0:
            raise ValueError("step_damping must lie in (0, 1]")
        if self.init not in ("empirical-quantiles", "user-grid"):
            raise ValueError(f"unknown init mode {self.init!r}")


class SolverError(RuntimeError):
    """Solve did not converge; carries the best iterate for diagnostics."""

    def __init__(self, message: str, points: np.ndarray, residual_sup: float):
        super().__init__(message)
        self.points = points
        self.residual_sup = residual_sup


@dataclass(frozen=True)
class SolveResult:
    grid: Grid
    residual_sup: float
    lloyd_sweeps: int
    newton_iters: int
    stationary_only: bool  # True when global optimality is not guaranteed


# --------------------------------------------------------------------------
# single-cell optimisation
# --------------------------------------------------------------------------

def _conditional_mean(spec: DistributionSpec, lo: float, hi: float) -> float:
    mass = interval_mass(spec, lo, hi)
    if mass <= 0.0:
        raise SolverError("empty-mass cell", np.array([]), math.nan)
    if spec.family is Family.GAUSSIAN:
        f_hi = pdf(spec, hi) if math.isfinite(hi) else 0.0
        f_lo = pdf(spec, lo) if math.isfinite(lo) else 0.0
        return spec.m - spec.sigma2 * (f_hi - f_lo) / mass
    a = spec.a if spec.family is Family.GAMMA else 1.0
    lifted = DistributionSpec.gamma(a + 1.0, spec.lam)
    return (a / spec.lam) * interval_mass(lifted, lo, hi) / mass


def _conditional_median(spec: DistributionSpec, lo: float, hi: float) -> float:
    mass = interval_mass(spec, lo, hi)
    if mass <= 0.0:
        raise SolverError("empty-mass cell", np.array([]), math.nan)
    lo_cdf = float(cdf(spec, lo)) if math.isfinite(lo) else 0.0
    if lo_cdf <= 0.5:
        p = min(max(lo_cdf + 0.5 * mass, 1e-300), 1.0 - 1e-16)
        return float(quantile(spec, p))
    q = float(sf(spec, lo)) - 0.5 * mass if math.isfinite(lo) else 1.0 - 0.5 * mass
    q = min(max(q, 1e-300), 1.0 - 1e-16)
    return float(quantile_sf(spec, q))


def cell_argmin(
    spec: DistributionSpec,
    lo: float,
    hi: float,
    r: float,
    opts: SolverOpts | None = None,
) -> float:
    """The point minimising the cell's L^r moment over (lo, hi).

    r > 1: root of the moment derivative (unique for these unimodal
    integrands); r = 1: the conditional median; r < 1: derivative-free
    bounded minimisation of the moment itself.
    """
    opts = opts or SolverOpts()
    q = opts.quad
    if r == 1.0:
        return _conditional_median(spec, lo, hi)
    if r == 2.0:
        return _conditional_mean(spec, lo, hi)
    mass = interval_mass(spec, lo, hi)
    if mass <= 0.0:
        raise SolverError("empty-mass cell", np.array([]), math.nan)
    s_lo, s_hi = spec.support
    lo_e = max(lo, s_lo)
    hi_e = min(hi, s_hi)
    if lo_e == -math.inf:
        lo_e = float(quantile(spec, q.tail_mass_cut))
    if hi_e == math.inf:
        hi_e = float(quantile_sf(spec, q.tail_mass_cut))
    if r < 1.0:
        res = minimize_scalar(
            lambda x: _abs_moment(spec, x, lo, hi, r, q, signed=False)[0],
            bounds=(lo_e, hi_e),
            method="bounded",
            options={"xatol": 1e-10},
        )
        return float(res.x)
    g = lambda x: cell_gradient(spec, x, lo, hi, r, q)
    g_lo = g(lo_e)
    if g_lo >= 0.0:
        return lo_e
    g_hi = g(hi_e)
    if g_hi <= 0.0:
        return hi_e
    return float(brentq(g, lo_e, hi_e, xtol=1e-12, rtol=8.9e-16))


# --------------------------------------------------------------------------
# stationarity system
# --------------------------------------------------------------------------

def _cell_bounds(pts: np.ndarray) -> np.ndarray:
    mids = 0.5 * (pts[:-1] + pts[1:])
    return np.concatenate(([-math.inf], mids, [math.inf]))


def _residual(
    spec: DistributionSpec, pts: np.ndarray, r: float, q: QuadratureOpts
) -> np.ndarray:
    b = _cell_bounds(pts)
    return np.array(
        [
            cell_gradient(spec, float(pts[i]), b[i], b[i + 1], r, q)
            for i in range(pts.size)
        ]
    )


def _jacobian_banded(
    spec: DistributionSpec, pts: np.ndarray, r: float, q: QuadratureOpts
) -> np.ndarray:
    """Banded (3, n) Jacobian of the residual; tridiagonal and symmetric.

    Each residual component touches its neighbours only through the
    shared cell midpoints, each with derivative 1/2.
    """
    n = pts.size
    b = _cell_bounds(pts)
    diag = np.empty(n)
    if r == 1.0:
        diag[:] = 2.0 * pdf(spec, pts)
    else:
        for i in range(n):
            i2, _ = _abs_moment(
                spec, float(pts[i]), b[i], b[i + 1], r - 2.0, q, signed=False
            )
            diag[i] = r * (r - 1.0) * i2
    if n > 1:
        w = 0.5 * np.diff(pts)
        f_mid = pdf(spec, b[1:-1])
        coupling = 0.5 * r * w ** (r - 1.0) * f_mid
        diag[:-1] -= coupling
        diag[1:] -= coupling
    ab = np.zeros((3, n))
    ab[1, :] = diag
    if n > 1:
        ab[0, 1:] = -coupling
        ab[2, :-1] = -coupling
    return ab


def _lloyd_sweep(
    spec: DistributionSpec, pts: np.ndarray, r: float, opts: SolverOpts
) -> np.ndarray:
    b = _cell_bounds(pts)
    return np.array(
        [cell_argmin(spec, b[i], b[i + 1], r, opts) for i in range(pts.size)]
    )


def _newton(
    spec: DistributionSpec, pts: np.ndarray, r: float, opts: SolverOpts
) -> tuple[np.ndarray, np.ndarray, int, bool]:
    q = opts.quad
    s_lo, s_hi = spec.support
    res = _residual(spec, pts, r, q)
    sup = float(np.max(np.abs(res)))
    last_step = math.inf
    iters = 0
    for _ in range(opts.max_newton_iters):
        scale = 1.0 + float(np.max(np.abs(pts)))
        if sup <= opts.grad_tol and last_step <= opts.position_tol * scale:
            return pts, res, iters, True
        ab = _jacobian_banded(spec, pts, r, q)
        try:
            step = solve_banded((1, 1), ab, -res)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        moved = False
        while lam >= 1e-7:
            cand = pts + lam * step
            ordered = np.all(np.diff(cand) > 0.0) if cand.size > 1 else True
            if ordered and cand[0] > s_lo and cand[-1] < s_hi:
                c_res = _residual(spec, cand, r, q)
                c_sup = float(np.max(np.abs(c_res)))
                if c_sup <= sup or c_sup <= opts.grad_tol:
                    pts, res, sup = cand, c_res, c_sup
                    last_step = lam * float(np.max(np.abs(step)))
                    moved = True
                    break
            lam *= opts.step_damping
        iters += 1
        if not moved:
            break
    scale = 1.0 + float(np.max(np.abs(pts)))
    ok = sup <= opts.grad_tol and last_step <= opts.position_tol * scale
    return pts, res, iters, ok


def _initial_points(spec: DistributionSpec, n: int, r: float) -> np.ndarray:
    law = empirical_measure_law(spec, r)
    levels = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    return np.asarray(quantile(law, levels), dtype=float)


def optimal_grid(
    spec: DistributionSpec,
    n: int,
    r: float,
    opts: SolverOpts | None = None,
    *,
    init_grid: Grid | None = None,
    cache: "GridCache | None" = None,
    full_result: bool = False,
) -> Grid | SolveResult:
    """Solve for the L^r-optimal n-point grid of ``spec`` (d = 1).

    Lloyd sweeps run until the max point move drops below
    ``lloyd_move_tol`` (or the sweep budget runs out), then Newton with
    the exact tridiagonal Jacobian drives the stationarity residual below
    ``grad_tol``.  For log-concave densities (all three families with
    shape >= 1) the stationary point is the global optimum; Gamma shapes
    below 1 are flagged ``stationary_only`` in the full result.
    """
    opts = opts or SolverOpts()
    if spec.d != 1:
        raise ValueError("grid solving requires d=1")
    if n < 1:
        raise ValueError("n must be >= 1")
    if r <= 0.0:
        raise ValueError("r must be positive")

    if cache is not None and not full_result:
        hit = cache.load(spec, n, r, opts.grad_tol)
        if hit is not None:
            return hit

    if opts.init == "user-grid" or init_grid is not None:
        if init_grid is None:
            raise ValueError("init mode 'user-grid' needs init_grid")
        if init_grid.n != n:
            raise ValueError("init_grid size mismatch")
        pts = init_grid.points.copy()
    else:
        pts = _initial_points(spec, n, r)

    sweeps = 0
    for _ in range(opts.max_lloyd_iters):
        new = _lloyd_sweep(spec, pts, r, opts)
        move = float(np.max(np.abs(new - pts)))
        pts = new
        sweeps += 1
        if move < opts.lloyd_move_tol:
            break

    stationary_only = spec.family is Family.GAMMA and spec.a < 1.0

    if r < 1.0:
        # no usable derivative: iterate the sweep to the position tolerance
        for _ in range(400):
            new = _lloyd_sweep(spec, pts, r, opts)
            move = float(np.max(np.abs(new - pts)))
            pts = new
            sweeps += 1
            if move < opts.position_tol * (1.0 + float(np.max(np.abs(pts)))):
                break
        grid = Grid(pts)
        if grid.n != n:
            raise SolverError(
                f"points collapsed during solve (kept {grid.n} of {n})", pts, math.nan
            )
        if cache is not None:
            cache.store(spec, n, r, opts.grad_tol, grid)
        result = SolveResult(grid, math.nan, sweeps, 0, stationary_only)
        return result if full_result else grid

    newton_iters = 0
    for attempt in range(3):
        pts, res, iters, ok = _newton(spec, pts, r, opts)
        newton_iters += iters
        if ok:
            break
        for _ in range(20):  # rescue: extra Lloyd sweeps, then retry
            pts = _lloyd_sweep(spec, pts, r, opts)
            sweeps += 1
    else:
        sup = float(np.max(np.abs(res)))
        raise SolverError(
            f"no convergence for n={n}, r={r} (residual sup {sup:.3g})", pts, sup
        )

    grid = Grid(pts)
    if grid.n != n:
        raise SolverError(
            f"points collapsed during solve (kept {grid.n} of {n})",
            pts,
            float(np.max(np.abs(res))),
        )
    if cache is not None:
        cache.store(spec, n, r, opts.grad_tol, grid)
    if full_result:
        return SolveResult(
            grid, float(np.max(np.abs(res))), sweeps, newton_iters, stationary_only
        )
    return grid


# --------------------------------------------------------------------------
# exponential closed-form recursion
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AkSequence:
    """Half-spacing sequence of the exponential optimal grids.

    Strictly decreasing; k * a_k tends to r + 1.
    """

    r: float
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if np.any(np.diff(vals) >= 0.0):
            raise ValueError("sequence must be strictly decreasing")


def _phi_plus(r: float, y: float) -> float:
    """integral of t**(r-1) e**(-t) on (0, y)."""
    return math.gamma(r) * float(special.gammainc(r, y))


def _phi_minus(r: float, y: float) -> float:
    """integral of t**(r-1) e**t on (0, y), by series."""
    if y <= 0.0:
        return 0.0
    term = y**r / r
    total = term
    for k in range(800):
        term *= y * (r + k) / ((k + 1.0) * (r + k + 1.0))
        total += term
        if term < 1e-17 * total:
            break
    return total


def exp_ak_sequence(r: float, n: int, root_tol: float = 1e-12) -> AkSequence:
    """First n terms of the implicit spacing recursion for the unit-rate
    exponential law: each a_{k+1} balances the forward integral of
    t**(r-1) e**t against the backward integral at a_k (a_0 = +inf).
    """
    if r <= 0.0:
        raise ValueError("r must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    if root_tol <= 0.0:
        raise ValueError("root_tol must be positive")
    target = math.gamma(r)  # a_0 = +inf case
    hi = 1.0
    while _phi_minus(r, hi) < target:
        hi *= 2.0
        if hi > 256.0:
            raise SolverError(f"bracket failure at r={r}", np.array([]), math.nan)
    vals = np.empty(n)
    y = brentq(lambda t: _phi_minus(r, t) - target, 0.0, hi, xtol=root_tol, rtol=8.9e-16)
    vals[0] = 2.0 * y
    for k in range(1, n):
        target = _phi_plus(r, vals[k - 1] / 2.0)
        y = brentq(
            lambda t: _phi_minus(r, t) - target,
            0.0,
            vals[k - 1] / 2.0,
            xtol=root_tol,
            rtol=8.9e-16,
        )
        vals[k] = 2.0 * y
    return AkSequence(r, vals)


def exp_optimal_grid(
    n: int, r: float, lam: float = 1.0, root_tol: float = 1e-12
) -> Grid:
    """Exact L^r-optimal n-point grid of the exponential law.

    Built for unit rate from the spacing recursion -- point k sits at
    a_n/2 plus the sum of the spacings a_{n+1-k} .. a_{n-1} -- then
    scaled by 1/lam (optimal grids are equivariant under scaling).
    """
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    seq = exp_ak_sequence(r, n, root_tol)
    v = seq.values
    if n == 1:
        pts = np.array([v[0] / 2.0])
    else:
        suffix = np.concatenate(([0.0], np.cumsum(v[n - 2 :: -1])))
        pts = v[n - 1] / 2.0 + suffix
    return Grid(pts / lam)


# --------------------------------------------------------------------------
# on-disk grid cache
# --------------------------------------------------------------------------

class GridCache:
    """Text-file store of solved grids keyed by (family, params, n, r, tol).

    The file payload is the Grid text serialisation, so cached and fresh
    results are bit-identical.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    @classmethod
    def from_env(cls) -> "GridCache | None":
        root = os.environ.get(CACHE_ENV_VAR)
        return cls(root) if root else None

    def _path(self, spec: DistributionSpec, n: int, r: float, grad_tol: float) -> Path:
        name = f"{spec.cache_token()}__n{n}__r{float(r)!r}__g{float(grad_tol)!r}.txt"
        return self.root / name

    def load(
        self, spec: DistributionSpec, n: int, r: float, grad_tol: float
    ) -> Grid | None:
        path = self._path(spec, n, r, grad_tol)
        if not path.is_file():
            return None
        return Grid.from_text(path.read_text())

    def store(
        self, spec: DistributionSpec, n: int, r: float, grad_tol: float, grid: Grid
    ) -> None:
        self._path(spec, n, r, grad_tol).write_text(grid.to_text())
