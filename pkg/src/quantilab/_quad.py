"""Adaptive Gauss-Legendre quadrature over finite intervals.

Panels are bisected worst-estimated-error first until the summed panel
error bound meets the requested tolerance.  Endpoint power singularities
``|x - end|**p`` with ``p`` in (-1, 0) are removed by a monomial change
of variable rather than by brute-force subdivision.
"""

from __future__ import annotations

import heapq
import math
from typing import Callable, Sequence

import numpy as np

Integrand = Callable[[np.ndarray], np.ndarray]

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(16)


class QuadratureError(ArithmeticError):
    """Quadrature did not converge within its subdivision budget.

    Attributes:
        estimate: best available value of the integral.
        error_bound: estimated absolute error of ``estimate``.
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(message)
        self.estimate = float(estimate)
        self.error_bound = float(error_bound)


def _panel(fn: Integrand, lo: float, hi: float) -> float:
    half = 0.5 * (hi - lo)
    vals = fn(0.5 * (lo + hi) + half * _NODES)
    return half * float(np.dot(vals, _WEIGHTS))


def integrate(
    fn: Integrand,
    lo: float,
    hi: float,
    *,
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-10,
    max_subdivisions: int = 4000,
    breakpoints: Sequence[float] = (),
) -> tuple[float, float]:
    """Integrate a vectorised ``fn`` over ``[lo, hi]``.

    ``breakpoints`` are forced initial subdivision points; pass kinks and
    bump centres here, the refinement loop only reacts to what the error
    estimator can already see.  Returns ``(value, error_bound)``.
    """
    lo = float(lo)
    hi = float(hi)
    if not lo < hi:
        return 0.0, 0.0
    cuts = [lo] + sorted(float(p) for p in set(breakpoints) if lo < p < hi) + [hi]

    heap: list[tuple[float, int, float, float, float, float]] = []
    seq = 0
    panels = 0
    total = 0.0
    err_total = 0.0

    def push(a: float, b: float, whole: float | None = None) -> None:
        nonlocal seq, panels, total, err_total
        if whole is None:
            whole = _panel(fn, a, b)
        mid = 0.5 * (a + b)
        left = _panel(fn, a, mid)
        right = _panel(fn, mid, b)
        refined = left + right
        if not math.isfinite(refined):
            raise QuadratureError(
                "integrand produced non-finite values", total, math.inf
            )
        err = abs(refined - whole)
        total += refined
        err_total += err
        heapq.heappush(heap, (-err, seq, a, b, left, right))
        seq += 1
        panels += 1

    for a, b in zip(cuts, cuts[1:]):
        push(a, b)

    while err_total > max(abs_tol, rel_tol * abs(total)):
        neg_err, _, a, b, left, right = heapq.heappop(heap)
        err = -neg_err
        if err <= 0.0:
            break  # every panel already at the round-off floor
        total -= left + right
        err_total -= err
        mid = 0.5 * (a + b)
        if not a < mid < b:
            # panel width at machine resolution; keep the value, stop
            # charging its error against the budget
            total += left + right
            heapq.heappush(heap, (0.0, seq, a, b, left, right))
            seq += 1
            continue
        if panels + 2 > max_subdivisions:
            raise QuadratureError(
                f"no convergence within {max_subdivisions} panels "
                f"(estimate {total + left + right:.17g}, "
                f"error bound {err_total + err:.3g})",
                total + left + right,
                err_total + err,
            )
        push(a, mid, whole=left)
        push(mid, b, whole=right)

    return total, err_total


def integrate_endpoint_power(
    fn: Integrand,
    power: float,
    lo: float,
    hi: float,
    *,
    singular_at: str = "lo",
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-10,
    max_subdivisions: int = 4000,
    breakpoints: Sequence[float] = (),
) -> tuple[float, float]:
    """Integrate ``|x - end|**power * fn(x)`` over ``[lo, hi]``.

    ``end`` is ``lo`` or ``hi`` per ``singular_at``; ``fn`` must stay
    bounded up to that endpoint.  Valid for ``power > -1``; the
    substitution u = |x-end|**(power+1) makes the integrand bounded, so
    this is the route for genuinely singular weights (power < 0).
    """
    if power <= -1.0:
        raise ValueError(f"power must exceed -1, got {power}")
    lo = float(lo)
    hi = float(hi)
    if not lo < hi:
        return 0.0, 0.0
    c = power + 1.0
    inv = 1.0 / c
    span = hi - lo
    upper = span**c
    if singular_at == "lo":
        g = lambda u: fn(lo + u**inv)
        bps = [(p - lo) ** c for p in breakpoints if lo < p < hi]
    elif singular_at == "hi":
        g = lambda u: fn(hi - u**inv)
        bps = [(hi - p) ** c for p in breakpoints if lo < p < hi]
    else:
        raise ValueError("singular_at must be 'lo' or 'hi'")
    val, err = integrate(
        g,
        0.0,
        upper,
        abs_tol=abs_tol * c,
        rel_tol=rel_tol,
        max_subdivisions=max_subdivisions,
        breakpoints=bps,
    )
    return val * inv, err * inv
