"""Reduced admittance matrices of the bundled case at 1.5x load, flat load voltages."""
import numpy as np

from wecc9_model import load_case, reduced

c = load_case(load_scale=1.5)
for label, m in [("pre_fault", reduced(c)),
                 ("during_fault_bus4", reduced(c, fault_bus=4)),
                 ("post_fault_open_4_5", reduced(c, skip=(4, 5)))]:
    print(label)
    for row in m:
        print("  " + "  ".join("{%.15g, %.15g}" % (z.real, z.imag) for z in row))
