"""Independent trapezoidal simulation of contingency 1 from a given dispatch.

Prints selected rotor angles so that the C++ simulator can be checked
against a separately written integrator. The dispatch is read from the
AC-OPF output of the command-line tool (dispatch.json).
"""
import json
import sys

import numpy as np

from wecc9_model import index, load_case, reduced

c = load_case(load_scale=1.5)
d = json.load(open(sys.argv[1]))
ix = index(c)
gens = c["generators"]
ng = len(gens)
wsyn = c["omega_syn"]
H = np.array([g["h"] for g in gens])
v, th = np.array(d["v"]), np.array(d["theta"])
p, q = np.array(d["p"]), np.array(d["q"])
e = np.zeros(ng)
delta = np.zeros(ng)
for k, g in enumerate(gens):
    b = ix[g["bus"]]
    vt = v[b] * np.exp(1j * th[b])
    ei = vt + 1j * g["x_d_prime"] * np.conj((p[k] + 1j * q[k]) / vt)
    e[k], delta[k] = abs(ei), np.angle(ei)

during = reduced(c, fault_bus=4)
post = reduced(c, skip=(4, 5))


def pele(y, dl):
    dd = dl[:, None] - dl[None, :]
    return e * ((y.real * np.cos(dd) + y.imag * np.sin(dd)) @ e)


dt, steps, clear = 0.01, 500, 15
w = np.zeros(ng)
pe = pele(during, delta)
out = {0: delta.copy()}
for s in range(1, steps + 1):
    y = during if s <= clear else post
    dn, wn = delta.copy(), w.copy()
    for _ in range(100):
        def resid(x):
            a, b = x[:ng], x[ng:]
            return np.concatenate([a - delta - wsyn * dt / 2 * (b + w),
                                   b - w - dt / (4 * H) * (2 * p - pele(y, a) - pe)])
        x = np.concatenate([dn, wn])
        r = resid(x)
        if np.max(abs(r)) < 1e-14:
            break
        jac = np.zeros((2 * ng, 2 * ng))
        for k in range(2 * ng):
            h = 1e-7
            xp, xm = x.copy(), x.copy()
            xp[k] += h
            xm[k] -= h
            jac[:, k] = (resid(xp) - resid(xm)) / (2 * h)
        x = x - np.linalg.solve(jac, r)
        dn, wn = x[:ng], x[ng:]
    delta, w = dn, wn
    pe = pele(y, delta)
    out[s] = delta.copy()
for s in (15, 100, 500):
    print(s, " ".join("%.12f" % x for x in out[s]))
