"""Step ratios of the sigma iteration and the linearisation at the fixed point.

The sup-norm step ratio can exceed 1 even when the iteration converges:
the spectral radius of the Jacobian bounds the asymptotic rate, while its
infinity norm bounds single steps.
"""
import argparse

import numpy as np

from expoth.address import parse_address
from expoth.spider import contraction_profile, sigma_step, solve


def jacobian(state, h=1e-7):
    """Finite-difference Jacobian of the sigma map in real coordinates."""
    pts = np.array(state.points)
    n = len(pts)

    def f(p):
        return np.array(sigma_step(state.__class__(**{**state.__dict__, "points": tuple(p)})).points)

    base = f(pts)
    J = np.zeros((2 * n, 2 * n))
    for j in range(n):
        for c, d in enumerate((h, 1j * h)):
            q = pts.copy()
            q[j] += d
            diff = (f(q) - base) / h
            J[0::2, 2 * j + c] = diff.real
            J[1::2, 2 * j + c] = diff.imag
    return J


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--address", default="0|zeros")
    ap.add_argument("--potential", type=float, nargs="+", default=[1.0, 1.5, 2.0, 3.0])
    args = ap.parse_args()

    addr = parse_address(args.address)
    for t in args.potential:
        res = solve(addr, t)
        prof = contraction_profile(res.trace)
        post = prof.ratios[prof.burn_in:]
        J = jacobian(res.state)
        eig = np.linalg.eigvals(J)
        print(f"t={t:g} N={res.plan.N} iterations={res.iterations} rate={prof.rate:.4f} "
              f"max_ratio={max(post):.4f} spectral_radius={max(abs(eig)):.4f} "
              f"inf_norm={np.linalg.norm(J, np.inf):.4f}")


if __name__ == "__main__":
    main()
