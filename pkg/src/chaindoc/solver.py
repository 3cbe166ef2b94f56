"""Modified nodal analysis of component chains.

Three regimes share one unknown layout: the voltages of the non-ground nodes
followed by one branch current per voltage-defined element (``dc``/``sine``
sources, current probes and inductors). Capacitors and inductors are replaced
by companion models in transient runs and by complex admittances in AC
sweeps. All systems are solved with dense LU and partial pivoting.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg

from .chain import (
    CONDUCTIVE,
    GROUND,
    VOLTAGE_DEFINED,
    ComponentChain,
    find_voltage_loop,
    reachable_nodes,
    resolve,
    validate_chain,
)
from .errors import SolverError
from .mathexpr import Environment

PIVOT_TOL = 1e-12
RESIDUAL_TOL = 1e-9
MAX_STEPS = 10**7

Method = Literal["euler_implicit", "trapezoidal"]
_BRANCH_KINDS = ("voltage_source_dc", "voltage_source_sine", "probe_current", "inductor")


@dataclass(frozen=True)
class StaticSolution:
    node_voltages: dict[str, float]
    branch_currents: dict[str, float]  # current-probe id -> amps
    probe_values: dict[str, float]  # every probe: volts or amps
    element_currents: dict[str, float]  # pin1 -> pin2 through each two-pin element
    residual_norm: float
    kcl_residual: float  # worst node imbalance relative to the largest branch current


@dataclass(frozen=True)
class WaveformSet:
    time_s: np.ndarray
    series: dict[str, np.ndarray]  # probe id -> samples
    method: str
    dt_s: float
    node_voltages: dict[str, np.ndarray] = field(default_factory=dict)
    max_residual: float = 0.0


@dataclass(frozen=True)
class FrequencyResponse:
    freq_hz: np.ndarray
    complex_values: dict[str, np.ndarray]  # probe id -> phasors
    node_voltages: dict[str, np.ndarray] = field(default_factory=dict)

    def magnitude_db(self, probe: str) -> np.ndarray:
        return 20.0 * np.log10(np.abs(self.complex_values[probe]))

    def phase_deg(self, probe: str) -> np.ndarray:
        return np.degrees(np.angle(self.complex_values[probe]))


class _Layout:
    def __init__(self, chain: ComponentChain, extra_branches=()):
        self.chain = chain
        self.nodes = [n for n in chain.nodes if n != GROUND]
        self.node_index = {n: i for i, n in enumerate(self.nodes)}
        branch_ids = [c.id for c in chain.components if c.kind in _BRANCH_KINDS] + list(extra_branches)
        self.branch_index = {cid: len(self.nodes) + i for i, cid in enumerate(branch_ids)}
        self.size = len(self.nodes) + len(branch_ids)

    def idx(self, node: str) -> int | None:
        return self.node_index.get(node)

    def stamp_admittance(self, A, a, b, y):
        ia, ib = self.idx(a), self.idx(b)
        if ia is not None:
            A[ia, ia] += y
        if ib is not None:
            A[ib, ib] += y
        if ia is not None and ib is not None:
            A[ia, ib] -= y
            A[ib, ia] -= y

    def stamp_branch(self, A, cid, a, b, impedance=0.0):
        """Branch row ``V(a) - V(b) - impedance*i = rhs`` plus its KCL columns."""
        k = self.branch_index[cid]
        ia, ib = self.idx(a), self.idx(b)
        if ia is not None:
            A[ia, k] += 1
            A[k, ia] += 1
        if ib is not None:
            A[ib, k] -= 1
            A[k, ib] -= 1
        A[k, k] -= impedance

    def inject(self, rhs, a, b, current):
        """A current flowing from ``a`` through an element into ``b``."""
        ia, ib = self.idx(a), self.idx(b)
        if ia is not None:
            rhs[ia] -= current
        if ib is not None:
            rhs[ib] += current

    def v(self, x, node):
        i = self.idx(node)
        return 0.0 if i is None else x[..., i]


_SINGULAR_CODES = ("floating_node", "source_loop")


def _resolved(chain: ComponentChain, env: Environment | None) -> ComponentChain:
    report = validate_chain(chain, env)
    structural = [d for d in report.errors if d.code in _SINGULAR_CODES]
    if structural and len(structural) == len(report.errors):
        # a well-formed chain whose equations cannot have a unique solution
        raise SolverError("singular_system", "; ".join(d.message for d in structural),
                          diagnostics=tuple(structural))
    report.raise_if_failed()
    return resolve(chain, env)


def _diagnose(chain: ComponentChain, regime: str) -> str:
    kinds = CONDUCTIVE if regime != "dc" else tuple(k for k in CONDUCTIVE if k != "capacitor")
    live = reachable_nodes(chain, kinds)
    floating = [n for n in chain.nodes if n not in live]
    if floating:
        return "floating node(s): " + ", ".join(floating)
    loop_kinds = VOLTAGE_DEFINED + (("inductor",) if regime == "dc" else ()) + (("capacitor",) if regime == "init" else ())
    loop = find_voltage_loop(chain, loop_kinds)
    if loop:
        return "voltage-defined loop: " + " -> ".join(loop)
    return "matrix is numerically singular"


def _factor(A: np.ndarray, chain: ComponentChain, regime: str):
    if A.shape[0] == 0:
        return None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    scale = max(np.abs(A).max(), 1e-300)
    if not np.all(np.abs(np.diag(lu)) > PIVOT_TOL * scale):
        raise SolverError("singular_system", f"{regime}: {_diagnose(chain, regime)}", regime=regime)
    return lu, piv


def _solve(factors, A, b):
    if factors is None:
        return np.zeros(0, dtype=b.dtype), 0.0
    x = scipy.linalg.lu_solve(factors, b, check_finite=False)
    r = float(np.abs(A @ x - b).max()) if len(b) else 0.0
    bound = RESIDUAL_TOL * (1.0 + np.abs(A).sum(axis=1).max() * max(np.abs(x).max(), np.abs(b).max()))
    if r > bound:
        raise SolverError("residual_bound", f"linear solve residual {r:.3e} exceeds {bound:.3e}")
    return x, r


def _source_value(comp, t: float | None) -> float:
    """Instantaneous source value; ``t=None`` selects the DC operating value."""
    if comp.kind == "voltage_source_dc":
        return comp.value("volts")
    if comp.kind == "current_source_dc":
        return comp.value("amps")
    if comp.kind == "voltage_source_sine":
        if t is None:
            return 0.0
        a, f, ph = comp.value("amplitude_volts"), comp.value("freq_hz"), comp.value("phase_rad")
        return a * math.sin(2 * math.pi * f * t + ph)
    return 0.0


# --------------------------------------------------------------------------
# DC


def solve_dc(chain: ComponentChain, env: Environment | None = None) -> StaticSolution:
    """Operating point: capacitors open, inductors shorted, sine sources at 0 V."""
    chain = _resolved(chain, env)
    lay = _Layout(chain)
    A = np.zeros((lay.size, lay.size))
    rhs = np.zeros(lay.size)
    for c in chain.components:
        if c.kind == "resistor":
            lay.stamp_admittance(A, *c.pins, 1.0 / c.value("ohms"))
        elif c.kind in _BRANCH_KINDS:
            lay.stamp_branch(A, c.id, *c.pins)
            rhs[lay.branch_index[c.id]] = _source_value(c, None)
        elif c.kind == "current_source_dc":
            lay.inject(rhs, *c.pins, c.value("amps"))
    x, res = _solve(_factor(A, chain, "dc"), A, rhs)

    volts = {GROUND: 0.0, **{n: float(x[i]) for n, i in lay.node_index.items()}}
    currents = {}
    for c in chain.components:
        if len(c.pins) != 2:
            continue
        if c.kind in _BRANCH_KINDS:
            currents[c.id] = float(x[lay.branch_index[c.id]])
        elif c.kind == "resistor":
            currents[c.id] = (volts[c.pins[0]] - volts[c.pins[1]]) / c.value("ohms")
        elif c.kind == "current_source_dc":
            currents[c.id] = c.value("amps")
        elif c.kind == "capacitor":
            currents[c.id] = 0.0
    probes = {}
    for c in chain.components:
        if c.kind == "probe_voltage":
            probes[c.id] = volts[c.pins[0]] - volts[c.pins[1]]
        elif c.kind == "probe_current":
            probes[c.id] = currents[c.id]
    return StaticSolution(
        node_voltages=volts,
        branch_currents={c.id: currents[c.id] for c in chain.of_kind("probe_current")},
        probe_values=probes,
        element_currents=currents,
        residual_norm=res,
        kcl_residual=kcl_residual(chain, currents),
    )


def kcl_residual(chain: ComponentChain, currents: dict[str, complex]) -> float:
    """Largest |sum of currents leaving a node| over non-ground nodes, relative to the largest current."""
    total = {n: 0.0 for n in chain.nodes}
    for cid, i in currents.items():
        a, b = chain.component(cid).pins
        total[a] += i
        total[b] -= i
    worst = max((abs(v) for n, v in total.items() if n != GROUND), default=0.0)
    scale = max((abs(i) for i in currents.values()), default=0.0)
    return worst / scale if scale > 0 else worst


# --------------------------------------------------------------------------
# transient


def _step_count(t_end: float, dt: float) -> int:
    if not (t_end > 0 and dt > 0) or not (math.isfinite(t_end) and math.isfinite(dt)):
        raise SolverError("invalid_argument", f"need t_end > 0 and dt > 0, got {t_end!r}, {dt!r}")
    ratio = t_end / dt
    if ratio > MAX_STEPS * (1 + 1e-9):
        raise SolverError("step_count_overflow", f"{ratio:.3g} steps exceeds the limit of {MAX_STEPS}")
    n = round(ratio)
    if abs(ratio - n) > 1e-9 * max(1.0, ratio):
        n = math.ceil(ratio)
    return max(n, 1)


def _initial_state(chain: ComponentChain, lay: _Layout):
    """Consistent t=0 state: capacitors act as voltage sources at ``ic``, inductors as current sources."""
    caps = chain.of_kind("capacitor")
    init = _Layout(chain, extra_branches=[c.id for c in caps])
    A = np.zeros((init.size, init.size))
    rhs = np.zeros(init.size)
    for c in chain.components:
        k = init.branch_index.get(c.id)
        if c.kind == "resistor":
            init.stamp_admittance(A, *c.pins, 1.0 / c.value("ohms"))
        elif c.kind == "inductor":
            # branch current pinned to ic; KCL columns kept
            ia, ib = init.idx(c.pins[0]), init.idx(c.pins[1])
            if ia is not None:
                A[ia, k] += 1
            if ib is not None:
                A[ib, k] -= 1
            A[k, k] = 1.0
            rhs[k] = c.value("ic", default=0.0)
        elif k is not None:
            init.stamp_branch(A, c.id, *c.pins)
            rhs[k] = c.value("ic", default=0.0) if c.kind == "capacitor" else _source_value(c, 0.0)
        elif c.kind == "current_source_dc":
            init.inject(rhs, *c.pins, c.value("amps"))
    try:
        x, _ = _solve(_factor(A, chain, "init"), A, rhs)
        consistent = True
    except SolverError:
        # inconsistent initial conditions (e.g. a capacitor across a source)
        x = np.linalg.lstsq(A, rhs, rcond=None)[0]
        consistent = False
    node_v = x[: len(lay.nodes)]
    branch = np.array([x[init.branch_index[cid]] for cid in lay.branch_index])
    cap_i = np.array([x[init.branch_index[c.id]] for c in caps])
    return np.concatenate([node_v, branch]), cap_i, consistent


def solve_transient(
    chain: ComponentChain,
    t_end_s: float,
    dt_s: float,
    method: Method = "trapezoidal",
    env: Environment | None = None,
) -> WaveformSet:
    """Fixed-step time-domain run from the zero (or ``ic=``) state.

    Samples are taken at ``t = k*dt`` for ``k = 0..N`` with ``N*dt >= t_end``.
    """
    if method not in ("euler_implicit", "trapezoidal"):
        raise SolverError("invalid_argument", f"unknown integration method {method!r}")
    n_steps = _step_count(t_end_s, dt_s)
    chain = _resolved(chain, env)
    lay = _Layout(chain)
    h = dt_s
    times = np.arange(n_steps + 1, dtype=float) * h

    caps = chain.of_kind("capacitor")
    cap_pins = [(lay.idx(c.pins[0]), lay.idx(c.pins[1])) for c in caps]
    cap_c = np.array([c.value("farads") for c in caps])
    inds = chain.of_kind("inductor")
    ind_k = np.array([lay.branch_index[c.id] for c in inds], dtype=int)
    ind_l = np.array([c.value("henries") for c in inds])
    sources = [c for c in chain.components if c.kind in ("voltage_source_dc", "voltage_source_sine", "current_source_dc")]

    def matrix(trap: bool):
        A = np.zeros((lay.size, lay.size))
        for c in chain.components:
            if c.kind == "resistor":
                lay.stamp_admittance(A, *c.pins, 1.0 / c.value("ohms"))
            elif c.kind == "inductor":
                lay.stamp_branch(A, c.id, *c.pins, (2.0 if trap else 1.0) * c.value("henries") / h)
            elif c.kind in _BRANCH_KINDS:
                lay.stamp_branch(A, c.id, *c.pins)
            elif c.kind == "capacitor":
                lay.stamp_admittance(A, *c.pins, (2.0 if trap else 1.0) * c.value("farads") / h)
        return A

    def node_diff(x, pins):
        a, b = pins
        return (x[a] if a is not None else 0.0) - (x[b] if b is not None else 0.0)

    x, cap_i, consistent = _initial_state(chain, lay)
    ind_v = np.array([node_diff(x, (lay.idx(c.pins[0]), lay.idx(c.pins[1]))) for c in inds])
    trap = method == "trapezoidal"
    # without a consistent start the derivative history is unknown: take one Euler step first
    systems = {}

    def system(use_trap):
        if use_trap not in systems:
            A = matrix(use_trap)
            systems[use_trap] = (A, _factor(A, chain, "transient"))
        return systems[use_trap]

    out = np.empty((n_steps + 1, lay.size))
    out[0] = x
    max_res = 0.0
    for step in range(1, n_steps + 1):
        use_trap = trap and (consistent or step > 1)
        A, factors = system(use_trap)
        t = times[step]
        rhs = np.zeros(lay.size)
        for c in sources:
            if c.kind == "current_source_dc":
                lay.inject(rhs, *c.pins, c.value("amps"))
            else:
                rhs[lay.branch_index[c.id]] = _source_value(c, t)
        g = (2.0 if use_trap else 1.0) * cap_c / h
        v_prev = np.array([node_diff(x, p) for p in cap_pins])
        hist = -g * v_prev - (cap_i if use_trap else 0.0)
        for (ia, ib), j in zip(cap_pins, hist):
            if ia is not None:
                rhs[ia] -= j
            if ib is not None:
                rhs[ib] += j
        if len(inds):
            z = (2.0 if use_trap else 1.0) * ind_l / h
            rhs[ind_k] = -z * x[ind_k] - (ind_v if use_trap else 0.0)
        x_new, res = _solve(factors, A, rhs)
        max_res = max(max_res, res)
        v_new = np.array([node_diff(x_new, p) for p in cap_pins])
        cap_i = g * v_new + hist
        ind_v = np.array([node_diff(x_new, (lay.idx(c.pins[0]), lay.idx(c.pins[1]))) for c in inds])
        x = x_new
        out[step] = x

    return WaveformSet(
        time_s=times,
        series=_probe_series(chain, lay, out),
        method=method,
        dt_s=h,
        node_voltages={n: out[:, i].copy() for n, i in lay.node_index.items()},
        max_residual=max_res,
    )


def _probe_series(chain: ComponentChain, lay: _Layout, out: np.ndarray) -> dict[str, np.ndarray]:
    series = {}
    zeros = np.zeros(out.shape[0], dtype=out.dtype)
    for c in chain.components:
        if c.kind == "probe_voltage":
            a, b = (out[:, lay.idx(p)] if lay.idx(p) is not None else zeros for p in c.pins)
            series[c.id] = a - b
        elif c.kind == "probe_current":
            series[c.id] = out[:, lay.branch_index[c.id]].copy()
    return series


# --------------------------------------------------------------------------
# AC


def log_grid(f_start: float, f_end: float, points_per_decade: int) -> np.ndarray:
    """Log-spaced frequencies from ``f_start`` to ``f_end`` inclusive."""
    if not (0 < f_start < f_end) or not math.isfinite(f_end):
        raise SolverError("invalid_argument", f"need 0 < f_start < f_end, got {f_start!r}, {f_end!r}")
    if int(points_per_decade) != points_per_decade or points_per_decade < 1:
        raise SolverError("invalid_argument", f"points_per_decade must be an integer >= 1, got {points_per_decade!r}")
    decades = math.log10(f_end / f_start)
    n = max(1, math.ceil(decades * points_per_decade - 1e-9))
    grid = np.logspace(math.log10(f_start), math.log10(f_end), n + 1)
    grid[0], grid[-1] = f_start, f_end
    return grid


def solve_ac(
    chain: ComponentChain,
    f_start_hz: float,
    f_end_hz: float,
    points_per_decade: int,
    env: Environment | None = None,
) -> FrequencyResponse:
    """Small-signal phasor sweep on a log grid including both endpoints.

    Sine sources contribute ``A*exp(j*phase)``; ``dc``/``idc`` sources
    contribute their ``ac=`` amplitude (0 unless declared).
    """
    chain = _resolved(chain, env)
    freqs = log_grid(f_start_hz, f_end_hz, int(points_per_decade))
    return ac_response(chain, freqs)


def ac_response(chain: ComponentChain, freqs, env: Environment | None = None) -> FrequencyResponse:
    """Phasor solution at arbitrary frequencies (``solve_ac`` without the grid)."""
    chain = _resolved(chain, env)
    lay = _Layout(chain)
    freqs = np.asarray(freqs, dtype=float)
    G = np.zeros((lay.size, lay.size), dtype=complex)
    rhs = np.zeros(lay.size, dtype=complex)
    for c in chain.components:
        if c.kind == "resistor":
            lay.stamp_admittance(G, *c.pins, 1.0 / c.value("ohms"))
        elif c.kind in _BRANCH_KINDS:
            lay.stamp_branch(G, c.id, *c.pins)
            k = lay.branch_index[c.id]
            if c.kind == "voltage_source_sine":
                rhs[k] = c.value("amplitude_volts") * np.exp(1j * c.value("phase_rad"))
            elif c.kind == "voltage_source_dc":
                rhs[k] = c.value("ac", default=0.0)
        elif c.kind == "current_source_dc":
            lay.inject(rhs, *c.pins, c.value("ac", default=0.0))
    out = np.empty((len(freqs), lay.size), dtype=complex)
    for i, f in enumerate(freqs):
        w = 2 * math.pi * f
        A = G.copy()
        for c in chain.components:
            if c.kind == "capacitor":
                lay.stamp_admittance(A, *c.pins, 1j * w * c.value("farads"))
            elif c.kind == "inductor":
                k = lay.branch_index[c.id]
                A[k, k] -= 1j * w * c.value("henries")
        x, _ = _solve(_factor(A, chain, "ac"), A, rhs)
        out[i] = x
    return FrequencyResponse(
        freq_hz=freqs,
        complex_values=_probe_series(chain, lay, out),
        node_voltages={n: out[:, i].copy() for n, i in lay.node_index.items()},
    )
