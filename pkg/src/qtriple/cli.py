"""Command line front end.

    qtriple verify
    qtriple solve-dual    --config dual.cfg --out run/
    qtriple solve-triple  --config triple.cfg --out run/ --seed-check
    qtriple solve-triple2 --config t2.cfg --out run/
    qtriple example1 | example2

Config files are flat ``key = value`` lines; ``#`` starts a comment.  Unknown
keys are errors.  Functions are written as a family name and parameters:

    constant C            C
    power C P             C t^P
    qbessel NU [S]        J_NU(S t; q^2)
    indicator LO HI [C]   C on LO <= t <= HI, else 0
    table K:V,K:V,...     V at the lattice point with exponent K, else 0

Outputs are ``psi.csv`` (``k,u,psi``), ``residuals.csv`` (``band,point,residual``)
and ``summary.txt``.  The exit status is 0 iff every residual is below
``threshold``, 1 otherwise, 2 for configuration errors and 3 for solver errors.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

from threadpoolctl import threadpool_limits

EXIT_OK, EXIT_RESIDUAL, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3

COMMANDS = ("verify", "solve-dual", "solve-triple", "solve-triple2", "example1", "example2")

# key -> (parser, default); a default of None means required
_num = float
_int = int


def _str(s):
    return s.strip()


SCHEMAS = {
    "verify": {
        "threshold": (_num, 1e-8),
    },
    "solve-dual": {
        "q": (_num, None), "alpha": (_num, None), "beta": (_num, None),
        "mu": (_num, None), "nu": (_num, None),
        "f": (_str, "constant 0"), "g": (_str, "constant 0"),
        "n_neg": (_int, 30), "n_pos": (_int, 60), "threshold": (_num, 1e-7),
    },
    "solve-triple": {
        "q": (_num, None), "m_a": (_int, None), "m_b": (_int, None),
        "alpha": (_num, None), "nu": (_num, None),
        "w": (_str, "constant 0"), "f1": (_str, "constant 0"), "f2": (_str, "constant 0"),
        "f3": (_str, "constant 0"), "split": (_str, "head_all"),
        "g1": (_str, ""), "g2": (_str, ""),
        "M": (_int, 40), "N": (_int, 40), "variant": (_str, "derived"),
        "threshold": (_num, 1e-6),
    },
    "solve-triple2": {
        "q": (_num, None), "alpha": (_num, None), "beta": (_num, None), "gamma": (_num, None),
        "mu": (_num, None), "nu": (_num, None), "kappa": (_num, None), "m_a": (_int, 2),
        "f": (_str, "constant 0"), "g1": (_str, "constant 0"), "g2": (_str, "constant 0"),
        "h": (_str, "constant 0"), "n_neg": (_int, 30), "n_pos": (_int, 50),
        "theta": (_num, 1.0), "fp_tol": (_num, 1e-8), "max_iter": (_int, 60),
        "threshold": (_num, 1e-7),
    },
    "example1": {
        "q": (_num, 0.5), "alpha": (_num, 0.5), "nu": (_num, 0.5), "reduction": (_int, 1),
        "f": (_str, ""), "n_neg": (_int, 30), "n_pos": (_int, 60), "threshold": (_num, 1e-7),
    },
    "example2": {
        "q": (_num, 0.5), "M": (_int, 40), "N": (_int, 40), "threshold": (_num, 1e-5),
    },
}


class ConfigError(ValueError):
    pass


def parse_config(text: str, command: str) -> dict:
    schema = SCHEMAS[command]
    raw = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in schema:
            raise ConfigError(f"line {n}: unknown key {key!r} for {command}")
        if key in raw:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        raw[key] = val
    cfg = {}
    for key, (conv, default) in schema.items():
        if key in raw:
            try:
                cfg[key] = conv(raw[key])
            except ValueError:
                raise ConfigError(f"key {key!r}: cannot read {raw[key]!r}") from None
        elif default is None:
            raise ConfigError(f"missing required key {key!r}")
        else:
            cfg[key] = default
    return cfg


def parse_function(spec: str, q: float, key: str = "function"):
    """A callable of the point from a family specification."""
    from .qspecial import qbessel3

    parts = spec.split()
    if not parts:
        raise ConfigError(f"{key}: empty function specification")
    fam, args = parts[0], parts[1:]
    try:
        if fam == "constant" or _is_number(fam):
            c = float(fam if _is_number(fam) else args[0])
            return lambda t: c
        if fam == "power":
            c, p = float(args[0]), float(args[1])
            return lambda t: c * t**p
        if fam == "qbessel":
            nu = float(args[0])
            s = float(args[1]) if len(args) > 1 else 1.0
            return lambda t: qbessel3(nu, s * t, q * q)
        if fam == "indicator":
            lo, hi = float(args[0]), float(args[1])
            c = float(args[2]) if len(args) > 2 else 1.0
            return lambda t: c if lo * (1 - 1e-12) <= t <= hi * (1 + 1e-12) else 0.0
        if fam == "table":
            table = {}
            for item in " ".join(args).split(","):
                k, v = item.split(":")
                table[int(k)] = float(v)

            def tab(t):
                k = round(math.log(t) / math.log(q))
                return table.get(k, 0.0) if abs(q**k - t) <= 1e-9 * t else 0.0
            return tab
    except (IndexError, ValueError):
        raise ConfigError(f"{key}: malformed parameters in {spec!r}") from None
    raise ConfigError(f"{key}: unknown function family {fam!r}")


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


# ------------------------------------------------------------------ output


def _write_psi(path: Path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "u", "psi"])
        for k, u, v in rows:
            w.writerow([k, repr(float(u)), repr(float(v))])


def _write_residuals(path: Path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["band", "point", "residual"])
        for band, x, r in rows:
            w.writerow([band, repr(float(x)), repr(float(r))])


def _table_rows(lf, base):
    return [(k, base**k, v) for k, v in sorted(lf.table.items())]


# ---------------------------------------------------------------- commands


def run_verify(cfg, args, out):
    from .verify import identity_suite
    results = identity_suite()
    lines = [f"{r.name:26s} max rel err {r.max_err:.3e}  ({r.checks} checks, {r.seconds:.1f} s)"
             for r in results]
    rows = [(r.name, 0.0, r.max_err) for r in results]
    worst = max(r.max_err for r in results)
    return lines, None, rows, worst


def run_solve_dual(cfg, args, out):
    from .dualsolver import DualProblem, dual_residual, solve_dual
    q = cfg["q"]
    Q = q * q
    p = DualProblem(q, cfg["alpha"], cfg["beta"], cfg["mu"], cfg["nu"],
                    f=parse_function(cfg["f"], Q, "f"), g=parse_function(cfg["g"], Q, "g"),
                    n_neg=cfg["n_neg"], n_pos=cfg["n_pos"])
    psi = solve_dual(p)
    res = dual_residual(p, psi, n_check=30)
    rows = [("head", x, r) for x, r in res.head_points] + [("tail", x, r) for x, r in res.tail_points]
    lines = [f"lambda = {p.lam!r}", f"window = ({p.n_neg}, {p.n_pos}) on the q^2-lattice",
             f"head residual {res.head:.3e}", f"tail residual {res.tail:.3e}"]
    return lines, _table_rows(psi, Q), rows, res.max


def run_solve_triple(cfg, args, out):
    from . import triplesolver as ts
    q = cfg["q"]
    fn = {k: parse_function(cfg[k], q, k) for k in ("w", "f1", "f2", "f3")}
    p = ts.TripleProblem(q=q, m_a=cfg["m_a"], m_b=cfg["m_b"], alpha=cfg["alpha"], nu=cfg["nu"],
                         M=cfg["M"], N=cfg["N"], variant=cfg["variant"], **fn)
    if cfg["split"] == "user":
        if not (cfg["g1"] and cfg["g2"]):
            raise ConfigError("split = user needs g1 and g2")
        g1, g2 = ts.split_middle(p, "user", parse_function(cfg["g1"], q, "g1"),
                                 parse_function(cfg["g2"], q, "g2"))
    else:
        g1, g2 = ts.split_middle(p, cfg["split"])
    p = replace(p, g1=g1, g2=g2)
    lines = []
    if args.seed_check:
        mp, planted = ts.manufactured_problem(q, p.alpha, p.nu, p.w, m_a=p.m_a, m_b=p.m_b, M=p.M, N=p.N)
        audit = ts.audit_variants(mp, planted)
        lines.append(f"seed check: variant {audit['winner']} selected")
        for name, row in audit["rows"].items():
            lines.append(f"  {name:10s} residual {row['residual']:.3e} recovery {row['recovery']:.3e}")
        if audit["winner"] != p.variant:
            lines.append(f"  configured variant {p.variant} replaced by {audit['winner']}")
            p = replace(p, variant=audit["winner"])
    rep = ts.assemble_and_solve(p)
    res = ts.triple_residual(p, rep)
    rows = [(band, x, r) for band, (_, pts) in res.items() for x, r in pts]
    worst = max(v[0] for v in res.values())
    lines += [f"F1 prefactor variant = {p.variant}",
              f"window M = {p.M}, N = {p.N}, u-window {len(p.u_exponents)} points",
              f"condition estimate = {rep.cond:.6e}",
              f"truncation = {rep.truncation}"]
    lines += [f"residual {band}: {v[0]:.3e}" for band, v in res.items()]
    return lines, _table_rows(rep.psi, q), rows, worst


def run_solve_triple2(cfg, args, out):
    from .quadsolver import Triple2Problem, residual_triple2, solve_triple2
    q = cfg["q"]
    Q = q * q
    fn = {k: parse_function(cfg[k], Q, k) for k in ("f", "g1", "g2", "h")}
    keys = ("alpha", "beta", "gamma", "mu", "nu", "kappa", "m_a", "n_neg", "n_pos",
            "theta", "fp_tol", "max_iter")
    p = Triple2Problem(q=q, **{k: cfg[k] for k in keys}, **fn)
    r = solve_triple2(p)
    res = residual_triple2(p, r.psi)
    rows = [(band, x, e) for band, (_, pts) in res.items() for x, e in pts]
    lines = [f"lambda_A = {p.lam_A!r}, lambda_B = {p.lam_B!r}",
             f"sweeps = {r.sweeps}",
             "iterate distances = " + ", ".join(f"{d:.3e}" for d in r.trace)]
    lines += [f"residual {band}: {v[0]:.3e}" for band, v in res.items()]
    return lines, _table_rows(r.psi, Q), rows, max(v[0] for v in res.values())


def run_example1(cfg, args, out):
    from .dualsolver import EXAMPLE1_FORMS, QDual, example1_closed_form, qdual_residual, solve_qdual
    q, al, nu, red = cfg["q"], cfg["alpha"], cfg["nu"], cfg["reduction"]
    if red not in (1, 2):
        raise ConfigError("reduction must be 1 or 2")
    if red == 1:
        base = parse_function(cfg["f"] or f"power 1 {nu}", q, "f")
        F = _cut(base, q, head=True)
        p = QDual(q, nu, 0.0, al, F1=F, n_neg=cfg["n_neg"], n_pos=cfg["n_pos"])
    else:
        base = parse_function(cfg["f"] or "power 1 -3", q, "f")
        F = _cut(base, q, head=False)
        p = QDual(q, nu, al, 0.0, F2=F, n_neg=cfg["n_neg"], n_pos=cfg["n_pos"])
    psi = solve_qdual(p)
    res = qdual_residual(p, psi)
    rows = [("head", x, r) for x, r in res.head_points] + [("tail", x, r) for x, r in res.tail_points]
    scale = max(abs(v) for v in psi.table.values()) or 1.0
    lines = [f"reduction {red}: q = {q!r}, alpha = {al!r}, nu = {nu!r}",
             f"head residual {res.head:.3e}", f"tail residual {res.tail:.3e}"]
    for form in EXAMPLE1_FORMS[red]:
        cf = example1_closed_form(q, al, nu, F, red, form, psi.table)
        err = max(abs(cf[k] - v) for k, v in psi.table.items()) / scale
        lines.append(f"closed form {form!r}: max rel deviation {err:.3e}")
    return lines, _table_rows(psi, q), rows, res.max


def _cut(f, q, head):
    def g(t):
        inside = t <= 1.0 + 1e-12
        return f(t) if inside == head else 0.0
    return g


def run_example2(cfg, args, out):
    from . import triplesolver as ts
    p = ts.example2_problem(cfg["q"], M=cfg["M"], N=cfg["N"])
    rep = ts.assemble_and_solve(p)
    res = ts.triple_residual(p, rep)
    rel = ts.example2_relations(p, rep)
    rows = [(band, x, r) for band, (_, pts) in res.items() for x, r in pts]
    lines = [f"F1 prefactor variant = {p.variant}",
             f"window M = {p.M}, N = {p.N}",
             f"condition estimate = {rep.cond:.6e}"]
    lines += [f"residual {band}: {v[0]:.3e}" for band, v in res.items()]
    lines += [f"coupled relation {k}: max rel deviation {v:.3e}" for k, v in rel.items()]
    return lines, _table_rows(rep.psi, p.q), rows, max(v[0] for v in res.values())


RUNNERS = {
    "verify": run_verify,
    "solve-dual": run_solve_dual,
    "solve-triple": run_solve_triple,
    "solve-triple2": run_solve_triple2,
    "example1": run_example1,
    "example2": run_example2,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qtriple", description="q-integral equation solvers")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="flat key = value configuration file")
    ap.add_argument("--out", type=Path, default=Path("qtriple-out"), help="output directory")
    ap.add_argument("--q", type=float, help="override q")
    ap.add_argument("--window", help="n_neg,n_pos (M,N for triple problems)")
    ap.add_argument("--seed-check", action="store_true",
                    help="run the manufactured-solution audit before solving")
    ap.add_argument("--threads", type=int, default=1, help="BLAS/OpenMP threads")
    return ap


def _apply_overrides(cfg, args, command):
    schema = SCHEMAS[command]
    if args.q is not None:
        if "q" not in schema:
            raise ConfigError(f"--q does not apply to {command}")
        cfg["q"] = args.q
    if args.window:
        try:
            lo, hi = (int(s) for s in args.window.split(","))
        except ValueError:
            raise ConfigError("--window expects two integers 'n_neg,n_pos'") from None
        if "n_neg" in schema:
            cfg["n_neg"], cfg["n_pos"] = lo, hi
        elif "M" in schema:
            cfg["M"], cfg["N"] = lo, hi
        else:
            raise ConfigError(f"--window does not apply to {command}")
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        cfg = _apply_overrides(parse_config(text, command), args, command)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out
    t0 = time.perf_counter()
    try:
        with threadpool_limits(limits=args.threads):
            lines, psi_rows, res_rows, worst = RUNNERS[command](cfg, args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError) as exc:
        # hypothesis violations are ValueErrors raised while building the problem
        print(f"{command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out.mkdir(parents=True, exist_ok=True)
    if psi_rows is not None:
        _write_psi(out / "psi.csv", psi_rows)
    _write_residuals(out / "residuals.csv", res_rows)
    ok = worst <= cfg["threshold"]
    summary = [f"command: {command}"] + lines + [
        f"worst residual {worst:.3e} vs threshold {cfg['threshold']:.1e}: {'PASS' if ok else 'FAIL'}",
        f"elapsed {time.perf_counter() - t0:.1f} s",
    ]
    (out / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
    print("\n".join(summary))
    return EXIT_OK if ok else EXIT_RESIDUAL


if __name__ == "__main__":
    sys.exit(main())
