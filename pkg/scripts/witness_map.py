#!/usr/bin/env python3
"""Map where Re zeta((1+eps)/2 + i t) <= 0: the runs a witness search can find.

Prints one line per maximal run of witnesses, confirmed at doubled precision.
"""

import argparse

from riemann_uncertainty.rh_scan import decimal_grid, group_runs, witness_search
from riemann_uncertainty.zeta_core import PrecisionConfig


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.05, 0.1, 0.2])
    ap.add_argument("--t-min", type=float, default=0.0)
    ap.add_argument("--t-max", type=float, default=70.0)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--prec", type=int, default=128)
    ap.add_argument("--threads", type=int, default=1)
    a = ap.parse_args(argv)
    cfg = PrecisionConfig.for_bits(a.prec)
    grid = decimal_grid(a.t_min, a.t_max, a.step)
    for eps in a.eps:
        found = witness_search(eps, (a.t_min, a.t_max), cfg, a.step, a.threads)
        runs = group_runs(found, grid)
        print(f"eps={eps}: {len(found)} witnesses in {len(runs)} runs")
        for lo, hi in runs:
            print(f"  [{lo}, {hi}]")


if __name__ == "__main__":
    run()
