# First-order RC low-pass: step response and Bode plot against closed forms.
import math

import numpy as np

from chaindoc import build_chain, compute_functional, solve_ac, solve_transient
from chaindoc.values import Series

R, C = 1e3, 1e-6
tau = R * C
chain = build_chain(f"""
V1 dc 5 in 0 ac=1
R1 r {R} in out
C1 c {C} out 0 ic=0
Vout vprobe out 0
GND gnd 0
""")

# transient: halving dt cuts the error by 4x (trapezoidal) or 2x (implicit Euler)
for method in ("trapezoidal", "euler_implicit"):
    errs = []
    for dt in (tau / 50, tau / 100, tau / 200):
        w = solve_transient(chain, tau, dt, method)
        errs.append(abs(w.series["Vout"][-1] - 5 * (1 - math.exp(-1))))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    print(method, ["%.2e" % e for e in errs], "observed order", np.round(orders, 3))

w = solve_transient(chain, 10 * tau, tau / 100)
step = Series(w.time_s, w.series["Vout"], "V")
print("10-90 rise time:", compute_functional("rise_time_10_90", step), " closed form:", tau * math.log(9))
print("settling time (2%):", compute_functional("settling_time", step, band_pct=2.0))

# AC: magnitude and phase at the corner frequency
fc = 1 / (2 * math.pi * tau)
fr = solve_ac(chain, fc / 100, fc * 100, 10)
k = int(np.argmin(abs(fr.freq_hz - fc)))
print(f"at {fr.freq_hz[k]:.2f} Hz: {fr.magnitude_db('Vout')[k]:.4f} dB, {fr.phase_deg('Vout')[k]:.3f} deg")

expected = 20 * np.log10(1 / np.sqrt(1 + (fr.freq_hz / fc) ** 2))
print("max |dB error| over the sweep:", np.max(abs(fr.magnitude_db("Vout") - expected)))
