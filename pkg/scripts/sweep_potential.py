"""Solve one address over a range of potentials and print kappa, iterations
and the verification residual as CSV."""
import argparse

import numpy as np

from expoth.address import parse_address
from expoth.spider import SolveOptions, solve
from expoth.verify import verify_parameter


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--address", default="0|zeros")
    ap.add_argument("--from", dest="lo", type=float, default=1.0)
    ap.add_argument("--to", dest="hi", type=float, default=4.0)
    ap.add_argument("--samples", type=int, default=13)
    ap.add_argument("--mode", choices=("fast", "tracked"), default="fast")
    args = ap.parse_args()

    addr = parse_address(args.address)
    opts = SolveOptions(mode=args.mode)
    print("t,kappa_re,kappa_im,iterations,converged,N,residual")
    for t in np.linspace(args.lo, args.hi, args.samples):
        res = solve(addr, float(t), opts)
        r = verify_parameter(res.kappa, addr, float(t), res.plan.N, min_seed=30.0)
        print(f"{t:.6g},{res.kappa.real!r},{res.kappa.imag!r},{res.iterations},"
              f"{int(res.converged)},{res.plan.N},{r:.3e}")


if __name__ == "__main__":
    main()
