#!/usr/bin/env python3
"""Run the full solve -> family -> reconstruct -> extract pipeline for
all six explicit families and summarize the round-trip reports.

Usage: python scripts/run_families.py [OUTDIR] [N]
"""

import json
import os
import sys

from minsurf.cli import main as cli_main


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "out/families"
    n = sys.argv[2] if len(sys.argv) > 2 else "33"
    failures = []
    for theorem in ("A1", "A2", "B1", "B2", "C1", "C2"):
        dest = os.path.join(out, theorem)
        code = cli_main(["pipeline", "--theorem", theorem, "--grid", n,
                         "--out", dest])
        with open(os.path.join(dest, "report.json")) as fh:
            rep = json.load(fh)
        rt = rep["roundtrip"]
        print(f"{theorem}: exit={code} roundtrip_max={rt['max']:.3e} "
              f"drift={rep['reconstruction']['drift']:.2e} "
              f"(budget {rep['reconstruction']['drift_budget']:.2e})")
        if code != 0:
            failures.append(theorem)
    if failures:
        print("FAILED:", failures)
        return 1
    print(f"all six families round-trip; artifacts in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
