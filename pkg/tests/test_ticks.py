import math

import pytest
from hypothesis import assume, given, strategies as st

from chaindoc.render.ticks import decade_ticks, format_tick, nice_ticks


@pytest.mark.parametrize(
    "lo,hi,target,expected",
    [
        (0, 10, 5, [0, 2, 4, 6, 8, 10]),
        (0, 1, 5, [0, 0.2, 0.4, 0.6, 0.8, 1.0]),
        (-3, 3, 5, [-4, -2, 0, 2, 4]),
    ],
)
def test_reference_cases(lo, hi, target, expected):
    assert nice_ticks(lo, hi, target) == expected


def test_degenerate_range():
    assert nice_ticks(2.5, 2.5, 5) == [2.5]


def test_reversed_range_rejected():
    with pytest.raises(ValueError):
        nice_ticks(1, 0, 5)


def _step_is_nice(step):
    exp = math.floor(math.log10(step))
    mant = step / 10**exp
    return any(math.isclose(mant, m, rel_tol=1e-6) for m in (1, 2, 5, 10))


@given(
    st.floats(-1e9, 1e9, allow_nan=False),
    st.floats(1e-6, 1e9, allow_nan=False),
    st.integers(2, 7),
)
def test_tick_properties(lo, width, target):
    hi = lo + width
    assume(hi > lo)
    ticks = nice_ticks(lo, hi, target)
    assert target - 2 <= len(ticks) <= target + 3
    assert ticks[0] <= lo and ticks[-1] >= hi
    steps = [b - a for a, b in zip(ticks, ticks[1:])]
    assert all(s > 0 for s in steps)
    assert _step_is_nice(steps[0])
    assert all(math.isclose(s, steps[0], rel_tol=1e-6) for s in steps)


def test_decimal_values_are_clean():
    assert nice_ticks(0, 0.3, 4) == [0, 0.1, 0.2, 0.3]
    assert format_tick(0.30000000000000004) == "0.3"


def test_decade_ticks():
    assert decade_ticks(3.0, 7000.0) == [1.0, 10.0, 100.0, 1000.0, 10000.0]
