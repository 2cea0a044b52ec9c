#!/usr/bin/env python3
"""Grid-refinement study of the compatibility residuals.

Prints sup-norm residual tables at 33^2 / 65^2 / 129^2 for the example
surfaces and the six explicit families, together with the observed
convergence orders.
"""

import sys

import numpy as np

sys.path.insert(0, "tests")
from conftest import FAMILY_CASES, interior_region, oracle_family  # noqa: E402

from minsurf.fundata import compat_residuals, extract  # noqa: E402
from minsurf.immersion import GridSpec  # noqa: E402
from minsurf.surfaces import EXAMPLES, build_example  # noqa: E402

EXTRACTED = [
    ("geodesic-product", None),
    ("geodesic-product:ds2-mixed", None),
    ("holo:2z1", ((0.8, 1.4), (-0.3, 0.3))),
    ("paraholo:z2", ((-0.25, 0.25), (1.8, 2.2))),
]

NS = (33, 65, 129)


def table(name, norms):
    keys = sorted(k for k in norms[NS[0]]
                  if np.isfinite(norms[NS[0]][k]) and norms[NS[-1]][k] > 1e-13)
    print(f"\n== {name} ==")
    print(f"{'norm':22s} " + " ".join(f"n={n:<9d}" for n in NS) + " orders")
    for k in keys:
        row = [norms[n][k] for n in NS]
        orders = [np.log2(row[i] / row[i + 1]) for i in range(len(row) - 1)]
        print(f"{k:22s} " + " ".join(f"{v:9.2e}" for v in row)
              + "  " + " ".join(f"{o:4.2f}" for o in orders))


def main():
    for name, box in EXTRACTED:
        norms = {}
        for n in NS:
            if box is None:
                F = build_example(name, nx=n)
            else:
                spec = GridSpec.from_box(n, n, box[0], box[1])
                F = EXAMPLES[name].builder(spec)
            margin = 3.5 * max(F.hx, F.hy) * (n - 1) / 32
            norms[n] = compat_residuals(
                extract(F), region=interior_region(F, margin)).norms
        table(f"extracted: {name}", norms)

    for theorem, (v0, w0, xmax) in FAMILY_CASES.items():
        norms = {}
        for n in NS:
            D = oracle_family(theorem, v0, w0, xmax, n)
            norms[n] = compat_residuals(D).norms
        table(f"family {theorem}", norms)


if __name__ == "__main__":
    main()
