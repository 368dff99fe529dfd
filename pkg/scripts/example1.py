"""Both Example 1 reductions: solver residuals and deviation of each closed form."""
import argparse

from qtriple.dualsolver import EXAMPLE1_FORMS, QDual, example1_closed_form, qdual_residual, solve_qdual


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=0.5)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--nu", type=float, default=0.5)
    ap.add_argument("--split", type=int, nargs="*", default=[0, 2], help="exponents m of the split q^m")
    args = ap.parse_args()
    q, al, nu = args.q, args.alpha, args.nu
    for m in args.split:
        b = q**m * (1 + 1e-12)
        cases = {
            1: (lambda r: r**nu if r <= b else 0.0, dict(s1=0.0, s2=al), "F1"),
            2: (lambda r: r**-3.0 if r > b else 0.0, dict(s1=al, s2=0.0), "F2"),
        }
        for red, (F, s, side) in cases.items():
            p = QDual(q, nu, m=m, **s, **{side: F})
            psi = solve_qdual(p)
            scale = max(abs(v) for v in psi.table.values())
            print(f"reduction {red}, split q^{m}: residual {qdual_residual(p, psi).max:.2e}")
            for form in EXAMPLE1_FORMS[red]:
                closed = example1_closed_form(q, al, nu, F, red, form, psi.table, m=m)
                dev = max(abs(closed[k] - v) for k, v in psi.table.items()) / scale
                print(f"    {form:8s} max rel deviation {dev:.2e}")


if __name__ == "__main__":
    main()
