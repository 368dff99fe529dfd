"""Picard iteration for the three-order system: trace, contraction ratios, residuals."""
import argparse

from qtriple.quadsolver import Triple2Problem, residual_triple2, solve_triple2


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=0.5)
    ap.add_argument("--theta", type=float, nargs="*", default=[1.0, 0.5])
    ap.add_argument("--m-a", type=int, default=2)
    args = ap.parse_args()
    for theta in args.theta:
        p = Triple2Problem(args.q, alpha=0.0, beta=0.25, gamma=-0.25, mu=0.5, nu=0.5, kappa=0.5,
                           m_a=args.m_a, theta=theta, max_iter=100,
                           f=lambda x: 1.0, g1=lambda x: x, g2=lambda x: 1 / x, h=lambda x: x**-2.0)
        r = solve_triple2(p)
        ratios = [b / a for a, b in zip(r.trace, r.trace[1:])]
        res = residual_triple2(p, r.psi)
        print(f"theta {theta}: {r.sweeps} sweeps")
        print("  distances " + ", ".join(f"{d:.2e}" for d in r.trace))
        print("  ratios    " + ", ".join(f"{x:.2e}" for x in ratios))
        print("  residuals " + ", ".join(f"{k} {v[0]:.2e}" for k, v in res.items()))


if __name__ == "__main__":
    main()
