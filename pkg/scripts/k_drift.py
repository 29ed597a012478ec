#!/usr/bin/env python3
"""f(eps) and g(t; eps) across series orders: how fast the truncated operator diverges."""

import argparse

import mpmath

from riemann_uncertainty.numeric import workprec
from riemann_uncertainty.rh_scan import ScanContext, scan_series


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.2)
    ap.add_argument("--orders", type=int, nargs="+", default=[10, 20, 40, 60, 80])
    ap.add_argument("--t", type=float, nargs="+", default=[0.5, 5.0, 14.1, 25.0])
    a = ap.parse_args(argv)
    print("K," + ",".join(["f"] + [f"g(t={t})" for t in a.t]))
    for K in a.orders:
        ctx = ScanContext(scan_series(K), a.eps)
        gs = [ctx.point(repr(t), with_zeta=False).g for t in a.t]
        with workprec(ctx.precision.bits):
            print(f"{K}," + ",".join(mpmath.nstr(v, 8) for v in [ctx.f] + gs))


if __name__ == "__main__":
    run()
