"""Plain numpy model of a case file, written independently of the C++ code."""
import json
import pathlib

import numpy as np

DATA = pathlib.Path(__file__).resolve().parents[2] / "data"


def load_case(name="wecc9.json", load_scale=1.0):
    c = json.loads((DATA / name).read_text())
    for ld in c["loads"]:
        ld["p"] *= load_scale
        ld["q"] *= load_scale
    return c


def index(c):
    return {b["id"]: k for k, b in enumerate(c["buses"])}


def ybus(c, skip=None):
    n = len(c["buses"])
    ix = index(c)
    y = np.zeros((n, n), complex)
    for br in c["branches"]:
        if skip and {br["from"], br["to"]} == set(skip):
            continue
        i, j = ix[br["from"]], ix[br["to"]]
        ys = 1 / complex(br["r"], br["x"])
        a = br["tap"]
        y[i, i] += (ys + 0.5j * br["b_charging"]) / a**2
        y[j, j] += ys + 0.5j * br["b_charging"]
        y[i, j] -= ys / a
        y[j, i] -= ys / a
    for k, b in enumerate(c["buses"]):
        y[k, k] += complex(b["shunt_g"], b["shunt_b"])
    return y


def reduced(c, v=None, fault_bus=None, skip=None, shunt=1e6):
    """Generator-node admittance after eliminating every bus by a linear solve."""
    ix = index(c)
    n, ng = len(c["buses"]), len(c["generators"])
    y = ybus(c, skip)
    for ld in c["loads"]:
        k = ix[ld["bus"]]
        vm = 1.0 if v is None else v[k]
        y[k, k] += complex(ld["p"], -ld["q"]) / vm**2
    if fault_bus is not None:
        y[ix[fault_bus], ix[fault_bus]] += shunt
    a = np.zeros((n + ng, n + ng), complex)
    a[:n, :n] = y
    for g, gen in enumerate(c["generators"]):
        yg = 1 / (1j * gen["x_d_prime"])
        b = ix[gen["bus"]]
        a[b, b] += yg
        a[n + g, n + g] += yg
        a[b, n + g] -= yg
        a[n + g, b] -= yg
    return a[n:, n:] - a[n:, :n] @ np.linalg.solve(a[:n, :n], a[:n, n:])
