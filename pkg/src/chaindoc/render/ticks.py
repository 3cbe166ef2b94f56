"""Axis tick selection with "nice" steps (1, 2 or 5 times a power of ten)."""

from __future__ import annotations

import math


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    """Ticks covering ``[lo, hi]`` with a step of 1, 2 or 5 times a power of ten.

    Tick values are produced from their decimal form, so ``0.6`` comes out as
    ``0.6`` rather than ``0.6000000000000001``. ``lo == hi`` yields ``[lo]``.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError(f"tick range must be finite, got {lo!r}..{hi!r}")
    if lo == hi:
        return [float(lo)]
    if lo > hi:
        raise ValueError(f"tick range is reversed: {lo!r} > {hi!r}")
    if target < 2:
        raise ValueError(f"target must be >= 2, got {target}")
    mag = max(abs(lo), abs(hi))
    if hi - lo < 1e-9 * mag:
        # narrower than tick labels can resolve: widen around the midpoint
        mid = 0.5 * (lo + hi)
        lo, hi = mid - 5e-10 * mag, mid + 5e-10 * mag
    raw = (hi - lo) / (target - 1)
    e0 = math.floor(math.log10(raw))
    best = None
    for e in (e0 - 1, e0, e0 + 1):
        for m in (1, 2, 5):
            step = m * 10.0**e
            first, last = math.floor(lo / step), math.ceil(hi / step)
            # guard against lo/step landing a hair past an integer
            if (first + 1) * step <= lo:
                first += 1
            if (last - 1) * step >= hi:
                last -= 1
            count = last - first + 1
            # closest count wins; ties go to the coarser step
            key = (abs(count - target), -step)
            if best is None or key < best[0]:
                best = (key, m, e, first, last)
    _, m, e, first, last = best
    return [float(f"{k * m}e{e}") for k in range(first, last + 1)]


def decade_ticks(lo: float, hi: float) -> list[float]:
    """Powers of ten covering ``[lo, hi]`` for logarithmic axes."""
    if not (0 < lo <= hi):
        raise ValueError(f"log axis needs 0 < lo <= hi, got {lo!r}..{hi!r}")
    a = math.floor(math.log10(lo) + 1e-12)
    b = math.ceil(math.log10(hi) - 1e-12)
    if a == b:
        b += 1
    return [float(f"1e{k}") for k in range(a, b + 1)]


def format_tick(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e5 or abs(v) < 1e-3:
        return f"{v:.0e}".replace("e+0", "e").replace("e-0", "e-").replace("e+", "e")
    return f"{v:.6g}"
