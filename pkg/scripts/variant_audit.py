"""Manufactured-solution audit of the F1 constant variants for several weights w."""
import argparse

from qtriple import triplesolver as ts

WEIGHTS = {
    "0": lambda u: 0.0,
    "0.5": lambda u: 0.5,
    "1/(1+u^2)": lambda u: 1 / (1 + u * u),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=0.5)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--nu", type=float, default=0.5)
    ap.add_argument("--size", type=int, default=40, help="M = N")
    args = ap.parse_args()
    print(f"{'w':>10s} {'variant':>10s} {'residual':>10s} {'recovery':>10s} {'cond':>10s}")
    for name, w in WEIGHTS.items():
        p, planted = ts.manufactured_problem(args.q, args.alpha, args.nu, w, M=args.size, N=args.size)
        audit = ts.audit_variants(p, planted)
        for variant, row in audit["rows"].items():
            mark = " *" if variant == audit["winner"] else ""
            print(f"{name:>10s} {variant:>10s} {row['residual']:10.2e} {row['recovery']:10.2e} "
                  f"{row['cond']:10.2e}{mark}")


if __name__ == "__main__":
    main()
