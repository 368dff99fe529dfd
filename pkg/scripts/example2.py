"""Example 2 over several q and window sizes: band residuals and coupled relations."""
import argparse
import time

from qtriple import triplesolver as ts


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, nargs="*", default=[0.3, 0.5, 0.7])
    ap.add_argument("--size", type=int, nargs="*", default=[40, 60])
    args = ap.parse_args()
    print(f"{'q':>4s} {'M=N':>4s} {'A_a':>9s} {'band':>9s} {'B_b':>9s} {'Eq1':>9s} {'Eq2':>9s} "
          f"{'Eq1 pr':>9s} {'Eq2 pr':>9s} {'cond':>8s} {'s':>5s}")
    for q in args.q:
        for n in args.size:
            t0 = time.perf_counter()
            p = ts.example2_problem(q, M=n, N=n)
            rep = ts.assemble_and_solve(p)
            res = ts.triple_residual(p, rep)
            rel = ts.example2_relations(p, rep)
            pr = ts.example2_relations(p, rep, printed=True)
            print(f"{q:4.2f} {n:4d} {res['A_a'][0]:9.2e} {res['band'][0]:9.2e} {res['B_b'][0]:9.2e} "
                  f"{rel['Eq1']:9.2e} {rel['Eq2']:9.2e} {pr['Eq1']:9.2e} {pr['Eq2']:9.2e} "
                  f"{rep.cond:8.2f} {time.perf_counter() - t0:5.1f}")


if __name__ == "__main__":
    main()
