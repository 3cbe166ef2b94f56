import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chaindoc.chain import build_chain
from chaindoc.errors import SolverError
from chaindoc.mathexpr import Environment
from chaindoc.solver import log_grid, solve_ac, solve_dc, solve_transient
from tests import oracles
from tests.conftest import DIVIDER, RC


def _divider(vs, r1, r2):
    return build_chain(f"V1 dc {vs!r} n1 0\nR1 r {r1!r} n1 n2\nR2 r {r2!r} n2 0\nG gnd 0\n")


def test_equal_divider_halves():
    sol = solve_dc(build_chain(DIVIDER))
    assert sol.node_voltages["n2"] == pytest.approx(5.0, rel=1e-12)
    assert sol.node_voltages["0"] == 0.0


def test_unequal_divider():
    sol = solve_dc(_divider(9.0, 1000.0, 2000.0))
    assert sol.node_voltages["n2"] == pytest.approx(6.0, rel=1e-12)


def test_current_source_into_resistor():
    sol = solve_dc(build_chain("I1 idc 1m 0 n1\nR1 1k n1 0\nG gnd 0\n"))
    assert sol.node_voltages["n1"] == pytest.approx(1.0, rel=1e-12)
    assert sol.kcl_residual < 1e-9


def test_current_probe_reads_series_current():
    sol = solve_dc(build_chain("V1 dc 10 n1 0\nA1 iprobe n1 m\nR1 2k m 0\nG gnd 0\n"))
    assert sol.branch_currents["A1"] == pytest.approx(5e-3, rel=1e-12)
    assert sol.probe_values["A1"] == sol.branch_currents["A1"]


def test_dc_treats_capacitor_open_inductor_short():
    sol = solve_dc(build_chain("V1 dc 6 a 0\nL1 l 1m a b\nR1 1k b c\nC1 c 1u c 0\nR2 1k c 0\nG gnd 0\n"))
    assert sol.node_voltages["b"] == pytest.approx(6.0)
    assert sol.node_voltages["c"] == pytest.approx(3.0)


def test_parameter_expressions_use_environment():
    chain = build_chain("V1 dc {vs} n1 0\nR1 r {r} n1 n2\nR2 r {2*r} n2 0\nG gnd 0\n")
    sol = solve_dc(chain, Environment({"vs": 9.0, "r": 1000.0}))
    assert sol.node_voltages["n2"] == pytest.approx(6.0)


def test_singular_system_names_floating_node():
    chain = build_chain("V1 dc 1 a 0\nR1 1k a b\nC1 1u b c\nR2 1k c d\nR3 1k d c\nG gnd 0\n")
    with pytest.raises(SolverError) as err:
        solve_dc(chain)
    assert err.value.code == "singular_system"
    assert "c" in str(err.value)


def test_singular_system_names_source_loop():
    chain = build_chain("V1 dc 1 a 0\nV2 dc 2 a 0\nR1 1k a 0\nG gnd 0\n")
    with pytest.raises(SolverError) as err:
        solve_dc(chain)
    assert err.value.code == "singular_system"
    assert "V1" in str(err.value) and "V2" in str(err.value)


@given(
    st.lists(st.floats(min_value=1.0, max_value=1e6), min_size=3, max_size=3),
    st.floats(min_value=-1e-2, max_value=1e-2),
)
def test_ladder_matches_conductance_oracle(rs, amps):
    # node 1 --r0-- node 2 --r1-- ground, node 1 --r2-- ground, current into node 2
    text = f"R0 r {rs[0]!r} n1 n2\nR1 r {rs[1]!r} n2 0\nR2 r {rs[2]!r} n1 0\nI1 idc {amps!r} 0 n2\nG gnd 0\n"
    sol = solve_dc(build_chain(text))
    ref = oracles.resistor_network(3, [(1, 2, rs[0]), (2, 0, rs[1]), (1, 0, rs[2])], {2: amps})
    assert sol.node_voltages["n1"] == pytest.approx(ref[1], rel=1e-9, abs=1e-15)
    assert sol.node_voltages["n2"] == pytest.approx(ref[2], rel=1e-9, abs=1e-15)
    assert sol.kcl_residual < 1e-9


def test_rc_charge_value_at_one_ms():
    w = solve_transient(build_chain(RC), 1e-3, 1e-5, "trapezoidal")
    assert w.series["P1"][-1] == pytest.approx(3.1606, abs=2e-3)
    assert w.time_s[0] == 0.0 and w.time_s[-1] == pytest.approx(1e-3)
    assert np.allclose(np.diff(w.time_s), 1e-5, rtol=1e-9)
    assert len(w.time_s) == len(w.series["P1"]) == 101


def test_zero_source_gives_zero_waveforms():
    w = solve_transient(build_chain(RC.replace("dc 5", "dc 0")), 1e-3, 1e-5)
    assert not np.any(w.series["P1"])


def test_capacitor_initial_condition():
    chain = build_chain("V1 dc 0 in 0\nR1 1k in out\nC1 1u out 0 ic=2\nP1 vprobe out 0\nG gnd 0\n")
    w = solve_transient(chain, 1e-3, 1e-6, "trapezoidal")
    assert w.series["P1"][0] == pytest.approx(2.0)
    assert w.series["P1"][-1] == pytest.approx(2.0 * math.exp(-1.0), rel=1e-5)


def test_inductor_current_rise():
    chain = build_chain("V1 dc 1 a 0\nR1 10 a b\nL1 l 10m b m\nA1 iprobe m 0\nG gnd 0\n")
    tau = 1e-3
    w = solve_transient(chain, tau, tau / 1000)
    assert w.series["A1"][-1] == pytest.approx(0.1 * (1 - math.exp(-1)), rel=1e-6)


def test_sine_source_drives_resistor():
    chain = build_chain("V1 sine 2 50 0 a 0\nR1 1k a 0\nP1 vprobe a 0\nG gnd 0\n")
    w = solve_transient(chain, 0.02, 1e-4)
    assert np.allclose(w.series["P1"], 2 * np.sin(2 * np.pi * 50 * w.time_s), atol=1e-9)


def _rc_error(method, dt):
    w = solve_transient(build_chain(RC), 1e-3, dt, method)
    return abs(w.series["P1"][-1] - oracles.rc_step(5.0, 1e3, 1e-6, 1e-3))


@pytest.mark.parametrize("method,order", [("trapezoidal", 2.0), ("euler_implicit", 1.0)])
def test_convergence_order(method, order):
    e1, e2 = _rc_error(method, 2e-5), _rc_error(method, 1e-5)
    assert math.log2(e1 / e2) == pytest.approx(order, abs=0.2)


@pytest.mark.parametrize("t_end,dt,code", [(0, 1e-3, "invalid_argument"), (1.0, -1, "invalid_argument"),
                                           (1.0, 1e-8, "step_count_overflow")])
def test_transient_argument_errors(t_end, dt, code):
    with pytest.raises(SolverError) as err:
        solve_transient(build_chain(RC), t_end, dt)
    assert err.value.code == code


def test_unknown_method():
    with pytest.raises(SolverError):
        solve_transient(build_chain(RC), 1e-3, 1e-5, "rk4")


def test_ac_corner():
    fc = 1 / (2 * math.pi * 1e-3)
    fr = solve_ac(build_chain(RC), fc, fc * 10, 1)
    assert fr.magnitude_db("P1")[0] == pytest.approx(-3.0103, abs=1e-3)
    assert fr.phase_deg("P1")[0] == pytest.approx(-45.0, abs=1e-2)


def test_ac_matches_transfer_function():
    fr = solve_ac(build_chain(RC), 1.0, 1e5, 10)
    ref = oracles.rc_lowpass(1e3, 1e-6, fr.freq_hz)
    assert np.allclose(fr.complex_values["P1"], ref, rtol=1e-10)


def test_dc_source_without_ac_option_is_silent():
    fr = solve_ac(build_chain(RC.replace(" ac=1", "")), 10, 1000, 5)
    assert not np.any(fr.complex_values["P1"])


def test_log_grid_endpoints_and_monotonic():
    f = log_grid(3.0, 7000.0, 7)
    assert f[0] == 3.0 and f[-1] == 7000.0
    assert np.all(np.diff(f) > 0)
    with pytest.raises(SolverError):
        log_grid(10.0, 1.0, 5)
    with pytest.raises(SolverError):
        log_grid(1.0, 10.0, 0)


@given(st.floats(1e-3, 1e3), st.floats(10.0, 1e6), st.integers(1, 20))
def test_log_grid_property(f0, span, ppd):
    f = log_grid(f0, f0 * span, ppd)
    assert f[0] == f0 and f[-1] == f0 * span
    assert np.all(np.diff(f) > 0)
