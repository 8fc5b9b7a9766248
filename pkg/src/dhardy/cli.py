"""
Command-line interface.

    dhardy energy --freq int --set 1..3 --k 2
    dhardy norm --poly rs:3 --p inf
    dhardy phi --which u --p inf --freq int:12 --pool 1..12 --N 5
    dhardy rs --k 4
    dhardy kernel --N 8
    dhardy check hy --p 1,4/3,2 --seed 0
    dhardy verify --theorem ordinary --p 1,4/3,2,4,6,inf --N 16:4096:geom

Exit status: 0 success, 1 a ``verify`` cell failed, 2 usage or input error.
Output is JSON (sorted keys, fixed formatting) embedding the tool version
and the configuration; ``--threads`` and ``--out`` are not echoed, so the
same command gives byte-identical output for any worker count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import asymptotics as asy
from . import dpoly as dp
from . import energy as en
from . import freq as fq
from . import fundamental as fu
from . import norms

NOT_ECHOED = {"threads", "out", "func"}


class UsageError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        x = float(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in NOT_ECHOED}


def _emit(args, result, rows=None):
    if args.format == "csv":
        if rows is None:
            raise UsageError(f"--format csv is not available for '{args.command}'")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if rows:
            header = list(rows[0].keys())
            w.writerow(header)
            for r in rows:
                w.writerow([_csv_cell(r.get(h)) for h in header])
        text = buf.getvalue()
    else:
        doc = {"tool": "dhardy", "version": __version__, "command": args.command,
               "config": _config(args), "result": result}
        text = json.dumps(_jsonable(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_cell(v):
    v = _jsonable(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return v


# ---------------------------------------------------------------- inputs

def _freq(desc, n_hint=None):
    if desc is None:
        raise UsageError("--freq is required")
    try:
        return fq.make_frequency(desc, n_hint=n_hint)
    except fq.FrequencyError as exc:
        where = f" (term {exc.index})" if exc.index is not None else ""
        raise UsageError(f"bad frequency {desc!r}{where}: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad frequency {desc!r}: {exc}") from None


def _index_set(s, what="--set"):
    if s is None:
        raise UsageError(f"{what} is required")
    try:
        out = dp.parse_index_set(s)
    except (ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad index set {s!r}: {exc}") from None
    if not out or out[0] < 1:
        raise UsageError(f"{what} must contain positive indices")
    return out


def _poly(args):
    spec = args.poly
    if spec is None:
        if args.freq is None or args.set is None:
            raise UsageError("give --poly, or --freq together with --set")
        A = _index_set(args.set)
        return dp.indicator(_freq(args.freq, max(A)), A)
    try:
        if spec.startswith("rs:"):
            return dp.rudin_shapiro(int(spec[3:]))
        if spec.startswith("kernel:"):
            return dp.dirichlet_kernel(int(spec[7:]))
        if spec.lstrip().startswith("{"):
            return dp.from_json(spec)
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise UsageError(f"polynomial file not found: {spec}") from None
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad polynomial {spec!r}: {exc}") from None
    try:
        return dp.from_json(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{spec}: invalid JSON at line {exc.lineno} column {exc.colno}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{spec}: {exc}") from None


def _p_list(s, default):
    try:
        return [norms.parse_p(x) for x in (s or default).split(",") if x.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad exponent list {s!r}: {exc}") from None


def _one_p(s):
    ps = _p_list(s, "")
    if len(ps) != 1:
        raise UsageError("--p takes one exponent here")
    return ps[0]


def _range(s, what):
    try:
        out = asy.parse_range(s.replace("..", ":")) if s else None
    except ValueError as exc:
        raise UsageError(f"bad {what} {s!r}: {exc}") from None
    if not out:
        raise UsageError(f"{what} is required")
    return out


# ---------------------------------------------------------------- commands

def cmd_energy(args):
    A = _index_set(args.set)
    f = _freq(args.freq, max(A))
    if args.k is None or args.k < 1:
        raise UsageError("--k must be a positive integer")
    method = args.method if args.method in en.METHODS else "mitm"
    res = en.additive_energy(f, A, args.k, method).as_dict()
    res["freq"] = f.describe()
    _emit(args, res, [res])
    return 0


def cmd_norm(args):
    poly = _poly(args)
    p = _one_p(args.p or "2")
    kw = {"rtol": args.rtol} if args.rtol is not None else {}
    try:
        est = norms.norm(poly, p, args.method or "auto", **kw)
    except norms.EngineError as exc:
        raise UsageError(str(exc)) from None
    res = est.as_dict()
    res["terms"] = len(poly)
    row = {k: res[k] for k in ("value", "p", "method", "certainty", "lower", "upper", "converged")}
    _emit(args, res, [row])
    return 0


def cmd_phi(args):
    p = _one_p(args.p or "2")
    pool = _index_set(args.pool, "--pool")
    Ns = _range(args.N, "--N")
    f = _freq(args.freq, max(pool))
    try:
        which = fu.canonical_which(args.which or "u")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    mode = {"random": "randomized"}.get(args.mode, args.mode)
    opts = (("rtol", args.rtol),) if args.rtol is not None else ()
    space = fu.SpaceSpec(p, f, args.method or "auto", opts)
    out = []
    for N in Ns:
        try:
            b = fu.phi(space, pool, N, which, args.signs, mode, seed=args.seed,
                       budget=args.budget, threads=args.threads)
        except fu.SearchBudgetError as exc:
            raise UsageError(str(exc)) from None
        out.append(b.as_dict())
    rows = [{k: d[k] for k in ("which", "p", "N", "lower", "upper", "value", "certainty", "mode",
                                "witness")} for d in out]
    _emit(args, out, rows)
    return 0


def cmd_rs(args):
    if args.k is None or args.k < 0:
        raise UsageError("--k must be a non-negative integer")
    poly = dp.rudin_shapiro(args.k)
    _emit(args, dp.to_json(poly), [{"index": i, "coeff": a} for i, a in poly.items])
    return 0


def cmd_kernel(args):
    Ns = _range(args.N, "--N")
    if len(Ns) != 1:
        raise UsageError("kernel takes a single --N")
    poly = dp.dirichlet_kernel(Ns[0])
    _emit(args, dp.to_json(poly), [{"index": i, "coeff": a} for i, a in poly.items])
    return 0


def _random_poly(rng, freq):
    n = len(freq)
    size = int(rng.integers(1, n + 1))
    A = sorted(rng.choice(n, size=size, replace=False).tolist())
    a = rng.normal(size=size) + 1j * rng.normal(size=size)
    return dp.DirichletPolynomial(freq, tuple((j + 1, complex(c)) for j, c in zip(A, a)))


def cmd_check(args):
    ps = _p_list(args.p, "1,4/3,2" if args.kind == "hy" else "1,4")
    rows = []
    if args.kind == "hy":
        if args.poly or (args.freq and args.set):
            polys = [_poly(args)]
        else:
            f = _freq(args.freq or "int:16")
            rng = np.random.default_rng(args.seed)
            polys = [_random_poly(rng, f) for _ in range(args.trials)]
        for i, poly in enumerate(polys):
            for p in ps:
                if not 1 <= p <= 2:
                    raise UsageError("Hausdorff-Young check needs p in [1, 2]")
                r = norms.hausdorff_young_check(poly, p)
                rows.append({"poly": i, "terms": len(poly), "p": r["p"], "p_conj": r["p_conj"],
                             "margin": r["margin"], "dual_margin": r["dual_margin"],
                             "tolerance": r["tolerance"],
                             "ok": r["margin"] <= r["tolerance"] and r["dual_margin"] <= r["tolerance"]})
    else:
        A = _index_set(args.set or "1..8")
        f = _freq(args.freq or "logprimes", max(A))
        for p in ps:
            r = norms.khinchin_sample(f, A, p, args.trials, args.seed)
            rows.append({"p": r["p"], "n": r["n"], "trials": r["trials"], "seed": r["seed"],
                         "min": r["min"], "mean": r["mean"], "max": r["max"]})
    _emit(args, rows, rows)
    return 0


def cmd_verify(args):
    Ns = _range(args.N or "16:4096:geom", "--N")
    ps = _p_list(args.p, ",".join(asy.DEFAULT_PS))
    rep = asy.theorem_report(args.theorem, ps, Ns, tol=args.tol,
                             rtol=args.rtol if args.rtol is not None else 1e-6,
                             threads=args.threads)
    rows = []
    for c in rep["cells"]:
        fit = c.get("fit") or {}
        rows.append({"p": c["p"], "family": c["family"], "which": c["which"],
                     "expected": c.get("expected"), "exponent": fit.get("exponent"),
                     "model": fit.get("model"), "pass": c.get("pass"), "gap": c.get("gap")})
    _emit(args, rep, rows)
    return 0 if rep["summary"]["all_pass"] else 1


# ---------------------------------------------------------------- parser

def _common(sp):
    sp.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    sp.add_argument("--budget", type=int, default=fu.DEFAULT_BUDGET,
                    help="maximum norm evaluations for searches")
    sp.add_argument("--rtol", type=float, default=None, help="quadrature relative tolerance")
    sp.add_argument("--out", default=None, help="write output to this path")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                    help="worker threads (does not change results)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dhardy", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("--version", action="version", version=f"dhardy {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("energy", help="k-th additive energy of a frequency set")
    sp.add_argument("--freq", required=True)
    sp.add_argument("--set", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--method", default="mitm", choices=en.METHODS)
    _common(sp)
    sp.set_defaults(func=cmd_energy)

    sp = sub.add_parser("norm", help="norm of a Dirichlet polynomial")
    sp.add_argument("--poly", help="JSON file, inline JSON, rs:<k> or kernel:<N>")
    sp.add_argument("--freq")
    sp.add_argument("--set")
    sp.add_argument("--p", default="2")
    sp.add_argument("--method", default="auto", choices=("auto",) + norms.METHODS)
    _common(sp)
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("phi", help="fundamental functions over a pool")
    sp.add_argument("--which", default="u", help="u, l, ue (u-eps) or le (l-eps)")
    sp.add_argument("--p", default="2")
    sp.add_argument("--freq", required=True)
    sp.add_argument("--pool", required=True)
    sp.add_argument("--N", required=True, help="a value or a range a:b")
    sp.add_argument("--mode", default="exhaustive", choices=("exhaustive", "random", "randomized", "greedy"))
    sp.add_argument("--signs", default=None, help="ones, real or roots:q")
    sp.add_argument("--method", default="auto", choices=("auto",) + norms.METHODS)
    _common(sp)
    sp.set_defaults(func=cmd_phi)

    sp = sub.add_parser("rs", help="Rudin-Shapiro polynomial P_k")
    sp.add_argument("--k", type=int, required=True)
    _common(sp)
    sp.set_defaults(func=cmd_rs)

    sp = sub.add_parser("kernel", help="Dirichlet kernel D_N")
    sp.add_argument("--N", required=True)
    _common(sp)
    sp.set_defaults(func=cmd_kernel)

    sp = sub.add_parser("check", help="inequality diagnostics (CSV tables)")
    sp.add_argument("kind", choices=("hy", "khinchin"))
    sp.add_argument("--poly")
    sp.add_argument("--freq")
    sp.add_argument("--set")
    sp.add_argument("--p", default=None)
    sp.add_argument("--trials", type=int, default=20)
    _common(sp)
    sp.set_defaults(func=cmd_check, format="csv")

    sp = sub.add_parser("verify", help="compare fitted growth exponents with the asymptotic laws")
    sp.add_argument("--theorem", default="ordinary", choices=asy.THEOREMS)
    sp.add_argument("--p", default=None)
    sp.add_argument("--N", default=None, help="range, e.g. 16:4096:geom")
    sp.add_argument("--tol", type=float, default=asy.DEFAULT_TOL)
    _common(sp)
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "check" and "--format" not in (argv if argv is not None else sys.argv):
        args.format = "csv"
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dhardy: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
