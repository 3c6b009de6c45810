"""Trace both bifurcating branches at one (lambda, b) and print the march.

Picks m = N + 2 by default (two above the threshold, comfortably inside
the admissible range), runs the plus and minus branches to s_max, then
re-verifies every endpoint on a doubled grid and compares the s -> 0
extrapolation of Omega with the spectral eigenvalues.

    python scripts/branch_demo.py --lambda 1 --b 0.5 --s-max 5e-3 --steps 8
"""

import argparse
import time

import numpy as np

from qgsw_vstates.continuation import trace_branch, verify_vstate
from qgsw_vstates.contour import make_grid
from qgsw_vstates.spectrum import eigenvalues, find_threshold, kernel_vector


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--lambda", dest="lam", type=float, default=1.0)
    parser.add_argument("--b", type=float, default=0.5)
    parser.add_argument("--m", type=int, default=0,
                        help="fold count (default: threshold + 2)")
    parser.add_argument("--s-max", dest="s_max", type=float, default=5e-3)
    parser.add_argument("--steps", type=int, default=8)
    parser.add_argument("--trunc", type=int, default=16)
    parser.add_argument("--grid-size", dest="grid_size", type=int, default=256)
    args = parser.parse_args()

    lam, b = args.lam, args.b
    threshold = find_threshold(lam, b)
    m = args.m if args.m > 0 else threshold.n + 2
    pair = eigenvalues(m, lam, b)
    if pair is None or pair.degenerate:
        raise SystemExit(f"mode m={m} has no simple eigenvalue pair")
    print(f"lam={lam:g} b={b:g}  threshold N={threshold.n}  m={m}")
    print(f"eigenvalues: Omega^- = {pair.omega_minus:.10f},"
          f" Omega^+ = {pair.omega_plus:.10f}")

    grid = make_grid(args.grid_size)
    for sign, omega_star in (("+", pair.omega_plus), ("-", pair.omega_minus)):
        t0 = time.time()
        trace = trace_branch(lam, b, m, sign, args.s_max, args.steps,
                             trunc=args.trunc, grid=grid)
        elapsed = time.time() - t0
        print(f"\nsign {sign}: {len(trace.points)} points in {elapsed:.1f}s"
              f" ({trace.termination_reason})")
        print(f"  {'s':>12} {'Omega':>16} {'residual':>10}")
        for point in trace.points:
            print(f"  {point.s:12.6e} {point.omega:16.10f}"
                  f" {point.residual:10.2e}")
        if len(trace.points) >= 2:
            svals = [p.s for p in trace.points[:3]]
            ovals = [p.omega for p in trace.points[:3]]
            omega0 = float(np.polyfit(svals, ovals, 1)[1])
            print(f"  Omega(s->0) = {omega0:.10f}"
                  f"  gap to eigenvalue {abs(omega0 - omega_star):.2e}")
            first = trace.points[0]
            v1, v2 = kernel_vector(m, lam, b, sign)
            tangent = (first.f1.coefficients[m - 1],
                       first.f2.coefficients[m - 1])
            ratio = tangent[1] / tangent[0] if first.pinned == "outer" \
                else tangent[0] / tangent[1]
            target = v2 / v1 if first.pinned == "outer" else v1 / v2
            print(f"  tangent ratio {ratio:.6f} vs kernel {target:.6f}")
        if trace.points:
            report = verify_vstate(trace.points[-1], lam, b, grid=grid)
            print(f"  endpoint on doubled grid: residual {report.residual:.2e}"
                  f" symmetry defect {report.symmetry_defect:.1e}")


if __name__ == "__main__":
    main()
