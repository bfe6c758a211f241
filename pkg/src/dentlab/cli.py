"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .norms import MLUR3, ConvexBody, get_norm, lur_oracle, nonsym_sup_norm
from .operators import Proj, cond29_grid, thm_fn_estimate
from .probes import CSV_COLUMNS, DELTA_GRID, SliceSpec, classify, lur_gap_grid, midpoint_modulus_grid, slice_diameter
from .search import SearchBudget
from .seqspace import basis, functional_from_json, vec_from_json
from .suite import CASES, report_json, run_suite

SUITES = tuple(CASES) + ("determinism", "all")
BUDGET_KEYS = ("seed", "restarts", "iters", "horizon")


class UsageError(Exception):
    pass


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value.strip('"')
    return out


def _settings(args: argparse.Namespace) -> dict:
    cfg = read_config(args.config) if args.config else {}
    unknown = set(cfg) - set(BUDGET_KEYS) - {"metric", "out"}
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged = {}
    for key in BUDGET_KEYS + ("metric", "out"):
        flag = getattr(args, key, None)
        merged[key] = flag if flag is not None else cfg.get(key)
    return merged


def _budget(settings: dict) -> SearchBudget:
    kw = {}
    for key in BUDGET_KEYS:
        if settings[key] is not None:
            try:
                kw[key] = int(settings[key])
            except ValueError:
                raise UsageError(f"{key} must be an integer") from None
    return SearchBudget(**kw)


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad number list {text!r}") from None


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(rows)
    return buf.getvalue().rstrip("\n")


# ---------------------------------------------------------------- commands


def cmd_norm(args, settings) -> int:
    g = get_norm(args.norm)
    x = vec_from_json(args.vector)
    value = g(x)
    lines = [repr(value)]
    if g.name == "nonsym":
        lines.append("j = " + repr(tuple(nonsym_sup_norm(x)[1])))
    _emit("\n".join(lines), settings["out"])
    return 0


def _boundary_vec(g, text: str, normalize: bool):
    x = vec_from_json(text)
    if normalize:
        s = g(x)
        if not s > 0:
            raise UsageError("cannot normalize a vector with zero gauge")
        x = x / s
    return x


def cmd_classify(args, settings) -> int:
    g = get_norm(args.norm)
    x = _boundary_vec(g, args.vector, args.normalize)
    budget = _budget(settings)
    bundle = classify(ConvexBody(g), x, budget)
    bundle["budget"] = budget.to_dict()
    _emit(json.dumps(bundle, sort_keys=True), settings["out"])
    return 0


def cmd_slice_diam(args, settings) -> int:
    g = get_norm(args.norm)
    body = ConvexBody(g)
    f = functional_from_json(args.functional)
    budget = _budget(settings)
    if (args.depth is None) == (args.threshold is None):
        raise UsageError("give exactly one of --depth or --threshold")
    if args.depth is not None:
        spec = SliceSpec.depth(body, f, args.depth, budget)
    else:
        spec = SliceSpec.threshold(body, f, args.threshold, budget)
    rep = slice_diameter(body, spec, budget, settings["metric"] or "sup")
    _emit(rep.to_json(), settings["out"])
    return 0


def cmd_verify(args, settings) -> int:
    budget = _budget(settings)
    results = run_suite(args.suite, budget)
    header = "# dentlab verify {} seed={} restarts={} iters={} horizon={}".format(
        args.suite, budget.seed, budget.restarts, budget.iters, budget.horizon
    )
    print("\n".join([header] + [r.line() for r in results]))
    if settings["out"]:
        Path(settings["out"]).write_text(report_json(results, budget) + "\n")
    return 0 if all(r.passed for r in results) else 1


def cmd_sweep(args, settings) -> int:
    budget = _budget(settings)
    q = args.quantity
    rows = []
    if q == "cond29":
        g = lur_oracle()
        x = basis(1) / g(basis(1))
        eps = _floats(args.eps or "1e-3,1e-2,1e-1")
        for n in (int(v) for v in _floats(args.n or "1,2,5,10,20")):
            for e in cond29_grid(Proj(n), x, args.lam, eps, g, g, budget):
                rows.append((f"cond29:n={n}", e.extra["eps"], e.value, e.value, e.side, budget.seed))
    elif q == "fn":
        body = ConvexBody(MLUR3)
        x = basis(1) / MLUR3(basis(1))
        for m in (int(v) for v in _floats(args.n or "4,8,16")):
            for eps in _floats(args.eps or "1e-6,1e-4,1e-2"):
                r = thm_fn_estimate(Proj(m), body, x, args.lam, eps, budget)
                rows.append((f"fn:m={m}", eps, r["upper"], r["lower"], "lower", budget.seed))
    elif q in ("modulus", "lur-gap"):
        if not (args.norm and args.vector):
            raise UsageError(f"sweep {q} needs --norm and --vector")
        g = get_norm(args.norm)
        x = _boundary_vec(g, args.vector, args.normalize)
        deltas = _floats(args.eps) if args.eps else DELTA_GRID
        probe = midpoint_modulus_grid if q == "modulus" else lur_gap_grid
        rows = probe(ConvexBody(g), x, deltas, budget).csv_rows()
    else:
        raise UsageError(f"unknown sweep quantity {q!r}")
    _emit(_csv(rows), settings["out"])
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--restarts", type=int)
    common.add_argument("--iters", type=int)
    common.add_argument("--horizon", type=int)
    common.add_argument("--metric", choices=("sup", "mlur3"))
    common.add_argument("--out")
    common.add_argument("--config", help="file of key = value lines; flags take precedence")

    p = argparse.ArgumentParser(prog="dentlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("norm", parents=[common], help="evaluate a norm")
    s.add_argument("norm")
    s.add_argument("vector", help='JSON, e.g. \'{"head":[1,-1],"tail":0}\'')
    s.set_defaults(fn=cmd_norm)

    s = sub.add_parser("classify", parents=[common], help="probe a boundary point")
    s.add_argument("norm")
    s.add_argument("vector")
    s.add_argument("--normalize", action="store_true", help="rescale the vector onto the unit sphere")
    s.set_defaults(fn=cmd_classify)

    s = sub.add_parser("slice-diam", parents=[common], help="estimate a slice diameter")
    s.add_argument("norm")
    s.add_argument("functional", help='JSON, e.g. \'{"head":[1],"tail":0}\'')
    s.add_argument("--depth", type=float)
    s.add_argument("--threshold", type=float)
    s.set_defaults(fn=cmd_slice_diam)

    s = sub.add_parser("verify", parents=[common], help="run verification cases")
    s.add_argument("suite", choices=SUITES)
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("sweep", parents=[common], help="write a CSV sweep")
    s.add_argument("quantity", choices=("cond29", "fn", "modulus", "lur-gap"))
    s.add_argument("--n", help="comma list of n (cond29) or m (fn)")
    s.add_argument("--eps", help="comma list of eps / delta values")
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--norm")
    s.add_argument("--vector")
    s.add_argument("--normalize", action="store_true")
    s.set_defaults(fn=cmd_sweep)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _settings(args)
        return args.fn(args, settings)
    except (UsageError, ValueError, KeyError, json.JSONDecodeError, OSError) as exc:
        print(f"dentlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
