"""Run the lattice identity suite and print one row per identity."""
import argparse

from qtriple.verify import QS, identity_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, nargs="*", default=list(QS))
    args = ap.parse_args()
    results = identity_suite(qs=tuple(args.q))
    print(f"{'identity':26s} {'max rel err':>12s} {'checks':>7s} {'seconds':>8s}")
    for r in results:
        print(f"{r.name:26s} {r.max_err:12.3e} {r.checks:7d} {r.seconds:8.2f}")


if __name__ == "__main__":
    main()
