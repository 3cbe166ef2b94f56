"""Reference implementations the tests compare against.

Each oracle is written independently of the library code it checks: closed
forms for the circuits, a plain conductance-matrix solve for resistor
networks, and a memoized recursive evaluator for block graphs.
"""

from __future__ import annotations

import math
import random
from functools import lru_cache

import numpy as np

from chaindoc import mathexpr


def divider(vs: float, r1: float, r2: float) -> float:
    return vs * r2 / (r1 + r2)


def rc_step(v: float, r: float, c: float, t):
    return v * (1.0 - np.exp(-np.asarray(t) / (r * c)))


def rc_lowpass(r: float, c: float, f):
    return 1.0 / (1.0 + 2j * np.pi * np.asarray(f) * r * c)


def resistor_network(n_nodes: int, edges, injections):
    """Node voltages of a resistor network fed by current injections.

    ``edges`` are (a, b, ohms) with node 0 as ground; ``injections`` maps node
    -> amps flowing into the node. Solved through the reduced Laplacian.
    """
    G = np.zeros((n_nodes, n_nodes))
    for a, b, r in edges:
        g = 1.0 / r
        G[a, a] += g
        G[b, b] += g
        G[a, b] -= g
        G[b, a] -= g
    i = np.zeros(n_nodes)
    for node, amps in injections.items():
        i[node] += amps
    v = np.zeros(n_nodes)
    v[1:] = np.linalg.solve(G[1:, 1:], i[1:])
    return v


def dataflow_reference(blocks: dict, sources: dict) -> dict:
    """Evaluate a block graph by memoized recursion from every block.

    ``blocks`` maps id -> (fn, input ids). Returns id -> value.
    """

    @lru_cache(maxsize=None)
    def value(name):
        if name in sources:
            return sources[name]
        fn, inputs = blocks[name]
        return fn(*[value(i) for i in inputs])

    return {b: value(b) for b in blocks}


# hand-evaluated fixtures: (expression, environment, expected value)
EXPR_FIXTURES = [
    ("1 + 2*3", {}, 7.0),
    ("(1 + 2)*3", {}, 9.0),
    ("2^3^2", {}, 512.0),
    ("-2^2", {}, -4.0),
    ("(-2)^2", {}, 4.0),
    ("2^-1", {}, 0.5),
    ("10/4", {}, 2.5),
    ("8 - 3 - 2", {}, 3.0),
    ("64/4/2", {}, 8.0),
    ("sin(pi/2)", {}, 1.0),
    ("cos(0)", {}, 1.0),
    ("sqrt(16) + abs(-3)", {}, 7.0),
    ("ln(e)", {}, 1.0),
    ("log10(1k)", {}, 3.0),
    ("max(1, 5, 3) - min(4, 2)", {}, 3.0),
    ("4.7k", {}, 4700.0),
    ("1/(2*pi*R*C)", {"R": 1000.0, "C": 1e-6}, 159.15494309189535),
    ("R1*R2/(R1 + R2)", {"R1": 3.0, "R2": 6.0}, 2.0),
    ("exp(ln(5))", {}, 5.0),
    ("pow(2, 10) + 1e3", {}, 2024.0),
]


def random_tree(rng: random.Random, depth: int) -> mathexpr.Expr:
    """A random expression tree of at most ``depth`` levels."""
    if depth <= 1 or rng.random() < 0.25:
        if rng.random() < 0.5:
            choices = [0.0, 1.0, 2.5, 1e-06, 4700.0, 123456789.0, 0.1, 3.0]
            return mathexpr.Num(rng.choice(choices))
        return mathexpr.Var(rng.choice(["x", "y", "tau", "R_1"]))
    kind = rng.random()
    if kind < 0.15:
        return mathexpr.Neg(random_tree(rng, depth - 1))
    if kind < 0.3:
        name = rng.choice(["sin", "sqrt", "max", "pow"])
        n = {"sin": 1, "sqrt": 1, "max": rng.randint(1, 3), "pow": 2}[name]
        return mathexpr.Call(name, tuple(random_tree(rng, depth - 1) for _ in range(n)))
    op = rng.choice("+-*/^")
    return mathexpr.BinOp(op, random_tree(rng, depth - 1), random_tree(rng, depth - 1))


def tree_depth(tree) -> int:
    if isinstance(tree, mathexpr.Neg):
        return 1 + tree_depth(tree.operand)
    if isinstance(tree, mathexpr.BinOp):
        return 1 + max(tree_depth(tree.left), tree_depth(tree.right))
    if isinstance(tree, mathexpr.Call):
        return 1 + max(tree_depth(a) for a in tree.args)
    return 1


def close(a: float, b: float, rel: float) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=0.0)
