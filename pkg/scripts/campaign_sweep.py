#!/usr/bin/env python3
"""Heisenberg campaign over several seeds and amplitude radii; one JSON line per run."""

import argparse
import json
import time

from riemann_uncertainty.uncertainty import random_campaign


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--radii", type=float, nargs="+", default=[0.5, 1.0, 1.5])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--dim", type=int, default=64)
    a = ap.parse_args(argv)
    for r in a.radii:
        for seed in a.seeds:
            t0 = time.perf_counter()
            out = random_campaign(a.trials, 6, a.dim, r, seed)
            out.update(radius=r, seconds=round(time.perf_counter() - t0, 2))
            print(json.dumps(out, sort_keys=True))


if __name__ == "__main__":
    run()
