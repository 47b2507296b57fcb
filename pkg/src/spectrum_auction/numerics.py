"""Small numerical building blocks: bracketing, bisection, golden
section search, composite Simpson quadrature, and a unimodality scan."""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def sign_change_brackets(xs: np.ndarray, ys: np.ndarray) -> list[tuple[float, float]]:
    """Bracketing intervals for roots of a sampled continuous function.

    Returns one ``(lo, hi)`` pair per sign change between consecutive
    grid points; an exact zero at a grid point yields a degenerate
    ``(x, x)`` bracket.
    """
    brackets: list[tuple[float, float]] = []
    signs = np.sign(ys)
    for i, s in enumerate(signs):
        if s == 0.0:
            brackets.append((float(xs[i]), float(xs[i])))
    # adjacent points only: a crossing next to an exact grid zero is
    # already accounted for by the degenerate bracket
    for i in range(len(signs) - 1):
        if signs[i] * signs[i + 1] < 0.0:
            brackets.append((float(xs[i]), float(xs[i + 1])))
    return brackets


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    width_tol: float,
    residual_tol: float | None = None,
    max_iter: int = 200,
) -> float:
    """Bisection on a bracketing interval with f(lo) and f(hi) of
    opposite signs. Stops when the bracket is narrower than
    ``width_tol`` and, if given, the midpoint residual is below
    ``residual_tol``."""
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
        if hi - lo < width_tol and (residual_tol is None or abs(fm) < residual_tol):
            break
    return 0.5 * (lo + hi)


def golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, *, width_tol: float
) -> tuple[float, float]:
    """Maximize a unimodal function on [lo, hi].

    Returns ``(x, f(x))`` for the best point seen once the bracket is
    narrower than ``width_tol``.
    """
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width_tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    if fc > fd:
        return c, fc
    return d, fd


def composite_simpson(
    f: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int
) -> float:
    """Composite Simpson rule with ``panels`` even subintervals.

    ``f`` must accept an ndarray of nodes.
    """
    if b <= a:
        return 0.0
    if panels % 2:
        panels += 1
    xs = np.linspace(a, b, panels + 1)
    ys = np.asarray(f(xs), dtype=float)
    h = (b - a) / panels
    return float(h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum()))


def simpson_with_doubling(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    start_panels: int = 2048,
    budget: float = 1e-12,
    max_panels: int = 2**16,
) -> float:
    """Simpson quadrature with a panel-doubling error estimate.

    Doubles the panel count until the Richardson estimate
    ``|S_2n - S_n| / 15`` falls below ``budget``.
    """
    panels = start_panels
    coarse = composite_simpson(f, a, b, panels)
    while True:
        panels *= 2
        fine = composite_simpson(f, a, b, panels)
        if abs(fine - coarse) / 15.0 <= budget or panels >= max_panels:
            return fine
        coarse = fine


def has_interior_dip(values: Sequence[float], tol: float) -> bool:
    """True if the sequence falls by more than ``tol`` below a running
    peak and later rises by more than ``tol`` above the dip bottom,
    i.e. it has an interior local minimum beyond tolerance."""
    peak = values[0]
    dip_bottom: float | None = None
    for v in values[1:]:
        if dip_bottom is not None and v - dip_bottom > tol:
            return True
        if v > peak:
            peak = v
        elif peak - v > tol:
            dip_bottom = v if dip_bottom is None else min(dip_bottom, v)
    return False
