#!/usr/bin/env python3
"""Regenerate the f-vs-g scan (with K-study) for one or more eps values."""

import argparse
import sys

from riemann_uncertainty.cli import main


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.2])
    ap.add_argument("--t-max", type=float, default=30.0)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="runs/fig1")
    a = ap.parse_args(argv)
    worst = 0
    for eps in a.eps:
        code = main(["fig1", "--eps", repr(eps), "--t-max", repr(a.t_max), "--step", repr(a.step),
                     "--threads", str(a.threads), "--k-study", "--out", f"{a.out}/eps{eps}"])
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(run())
