# DC operating point of a resistive chain, checked by hand.
import numpy as np

from chaindoc import build_chain, set_parameter, solve_dc

netlist = """
.title two-stage divider
V1 dc 12 in 0
R1 r 10k in mid
R2 r 10k mid 0
R3 r 4.7k mid out
R4 r 4.7k out 0
Vout vprobe out 0
GND gnd 0
"""
chain = build_chain(netlist)
sol = solve_dc(chain)
print({k: round(v, 6) for k, v in sol.node_voltages.items()})

# R3+R4 sits in parallel with R2, so the hand result is two dividers in a row
r_low = 1 / (1 / 10e3 + 1 / 9.4e3)
v_mid = 12 * r_low / (10e3 + r_low)
print("mid by hand:", v_mid, " solver:", sol.node_voltages["mid"])
print("out by hand:", v_mid / 2, " solver:", sol.node_voltages["out"])
print("worst KCL residual:", sol.kcl_residual)

# sweep the bottom resistor; the chain itself is immutable
for r4 in np.geomspace(100, 100e3, 7):
    v = solve_dc(set_parameter(chain, "R4", "ohms", r4)).node_voltages["out"]
    print(f"R4 = {r4:9.1f}  ->  Vout = {v:.4f} V")
