"""Command-line front end.

Subcommands map one-to-one onto the library: eval, sample, lipcheck,
closure, extcount, chain, analyze, experiment, report, connectives.
Every failure raised by the library lands as a one-line message on
stderr with exit status 2.
"""

from __future__ import annotations

import argparse
import ast as _pyast
import json
import math
import sys
from pathlib import Path

from .analysis import check_relative_lipschitz
from .asymval import Pow, ZERO, is_zero
from .closures import closure, count_extensions, strictly_balanced_chain
from .connectives import default_registry, make_user_connective
from .engine import analyze_dense, analyze_sparse
from .errors import AggraphError, InputError
from .evaluate import Environment, eval_term
from .graphs import (
    format_graph_literal,
    induced_subgraph,
    parse_graph_literal,
    parse_pair_literal,
)
from .harness import (
    ExperimentConfig,
    emit_report,
    report_to_dict,
    run_concentration_experiment,
)
from .parser import parse
from .randgraphs import Dense, Sparse, sample
from .terms import free_vars, metrics


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except AggraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="aggraph")
    sub = top.add_subparsers(required=True)

    p = sub.add_parser("eval", help="evaluate a term on a graph")
    p.add_argument("--term", required=True, help="term text or a file holding it")
    p.add_argument("--graph", required=True, help="graph literal file")
    p.add_argument("--assign", default="", help="free-variable bindings u=3,v=7")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("sample", help="sample a random graph")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--regime", required=True,
                   help="dense:p=0.5 or sparse:alpha=0.7")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--replicate", type=int, default=0)
    p.add_argument("--out", default="-", help="output file, - for stdout")
    p.set_defaults(handler=_cmd_sample)

    p = sub.add_parser("lipcheck", help="relative-Lipschitz battery check")
    p.add_argument("--fn", required=True,
                   help="registry name, or an expression in x1..xk")
    p.add_argument("--box", default="1e-4,1e14", help="lo,hi of the sample box")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=20260816)
    p.set_defaults(handler=_cmd_lipcheck)

    p = sub.add_parser("closure", help="closure of a tuple at rank s")
    p.add_argument("--graph", required=True)
    p.add_argument("--tuple", required=True, dest="tuple_", metavar="TUPLE")
    p.add_argument("--s", required=True, type=int)
    p.add_argument("--alpha", required=True, type=float)
    p.set_defaults(handler=_cmd_closure)

    p = sub.add_parser("extcount", help="count rooted pattern extensions")
    p.add_argument("--graph", required=True)
    p.add_argument("--tuple", required=True, dest="tuple_", metavar="TUPLE")
    p.add_argument("--pattern", required=True, help="pair literal file")
    p.set_defaults(handler=_cmd_extcount)

    p = sub.add_parser("chain", help="strictly balanced decomposition")
    p.add_argument("--pair", required=True, help="pair literal file")
    p.set_defaults(handler=_cmd_chain)

    p = sub.add_parser("analyze", help="leading-order prediction for a term")
    p.add_argument("--term", required=True, help="term text or a file holding it")
    p.add_argument("--regime", required=True, choices=["dense", "sparse"])
    p.add_argument("--dense-p", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--D", type=int)
    p.add_argument("--W", type=int)
    p.add_argument("--native-means", action="store_true")
    p.add_argument("--json", action="store_true", dest="as_json")
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("experiment", help="run a sampling experiment")
    p.add_argument("--config", required=True, help="flat key=value file")
    p.add_argument("--out", default="-", help="JSON report file, - for stdout")
    p.add_argument("--csv", default=None, help="also write per-size CSV rows")
    p.set_defaults(handler=_cmd_experiment)

    p = sub.add_parser("report", help="post-process an emitted report")
    rsub = p.add_subparsers(required=True)
    rp = rsub.add_parser("plot", help="gnuplot-ready data from a JSON report")
    rp.add_argument("--in", required=True, dest="in_", metavar="REPORT")
    rp.add_argument("--out", default="-")
    rp.set_defaults(handler=_cmd_report_plot)

    p = sub.add_parser("connectives", help="registry catalog as JSON")
    p.set_defaults(handler=_cmd_connectives)

    return top


# ---------------------------------------------------------------------------
# helpers


def _read_maybe_file(text: str) -> str:
    path = Path(text)
    try:
        if path.is_file():
            return path.read_text()
    except OSError:
        pass
    return text


def _read_file(name: str) -> str:
    try:
        return Path(name).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {name}: {exc}") from exc


def _write_out(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    try:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc}") from exc


def _parse_regime(text: str):
    kind, _, rest = text.partition(":")
    params = {}
    if rest:
        for piece in rest.split(","):
            key, _, val = piece.partition("=")
            if not val:
                raise InputError(f"bad regime parameter {piece!r}")
            params[key.strip()] = float(val)
    if kind == "dense":
        if set(params) != {"p"}:
            raise InputError("dense regime needs exactly p=..., "
                             f"got {text!r}")
        return Dense(params["p"])
    if kind == "sparse":
        if set(params) != {"alpha"}:
            raise InputError("sparse regime needs exactly alpha=..., "
                             f"got {text!r}")
        return Sparse(params["alpha"])
    raise InputError(f"unknown regime {kind!r} (want dense:p=.. or sparse:alpha=..)")


def _parse_tuple(text: str) -> tuple[int, ...]:
    if not text.strip():
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise InputError(f"bad vertex tuple {text!r}") from exc


def _parse_assignment(text: str, names: tuple[str, ...]) -> tuple[int, ...]:
    bound: dict[str, int] = {}
    if text.strip():
        for piece in text.split(","):
            key, eq, val = piece.partition("=")
            key = key.strip()
            if not eq or not key:
                raise InputError(f"bad assignment entry {piece!r}")
            try:
                bound[key] = int(val)
            except ValueError as exc:
                raise InputError(f"bad vertex {val!r} for {key!r}") from exc
    missing = [x for x in names if x not in bound]
    if missing:
        raise InputError(f"unassigned free variables: {missing}")
    extra = [x for x in bound if x not in names]
    if extra:
        raise InputError(f"assignment names not free in the term: {extra}")
    return tuple(bound[x] for x in names)


def _asym_dict(a) -> dict:
    if is_zero(a):
        return {"zero": True, "c": 0.0, "gamma": None}
    return {"zero": False, "c": a.c, "gamma": a.gamma}


# ---------------------------------------------------------------------------
# subcommands


def _cmd_eval(args) -> int:
    term = parse(_read_maybe_file(args.term))
    g, _ = parse_graph_literal(_read_file(args.graph))
    names = free_vars(term)
    assignment = _parse_assignment(args.assign, names)
    value = eval_term(term, Environment(g, assignment), cache=True)
    print(f"{value:.12g}")
    return 0


def _cmd_sample(args) -> int:
    g = sample(args.n, _parse_regime(args.regime), args.seed,
               replicate=args.replicate)
    _write_out(format_graph_literal(g), args.out)
    return 0


_EXPR_FUNCS = {
    "sin": math.sin, "cos": math.cos, "exp": math.exp, "ln": math.log,
    "log": math.log, "sqrt": math.sqrt, "abs": abs, "min": min, "max": max,
}


def _compile_expr(text: str):
    """Arithmetic in x1..xk -> (function on tuples, arity).

    Only numbers, the variables, +-*/**, and a few math functions are
    admitted; anything else in the tree is rejected by name.
    """
    try:
        tree = _pyast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise InputError(f"bad expression: {exc}") from exc
    arity = 0

    def walk(node):
        nonlocal arity
        if isinstance(node, _pyast.Expression):
            return walk(node.body)
        if isinstance(node, _pyast.Constant) and isinstance(node.value, (int, float)):
            return
        if isinstance(node, _pyast.Name):
            if node.id.startswith("x") and node.id[1:].isdigit():
                arity = max(arity, int(node.id[1:]))
                return
            raise InputError(f"unknown name {node.id!r} (variables are x1..xk)")
        if isinstance(node, _pyast.BinOp) and isinstance(
                node.op, (_pyast.Add, _pyast.Sub, _pyast.Mult, _pyast.Div,
                          _pyast.Pow)):
            walk(node.left)
            walk(node.right)
            return
        if isinstance(node, _pyast.UnaryOp) and isinstance(
                node.op, (_pyast.UAdd, _pyast.USub)):
            walk(node.operand)
            return
        if isinstance(node, _pyast.Call) and isinstance(node.func, _pyast.Name) \
                and node.func.id in _EXPR_FUNCS and not node.keywords:
            for a in node.args:
                walk(a)
            return
        raise InputError(
            f"unsupported construct {type(node).__name__} in expression")

    walk(tree)
    if arity == 0:
        raise InputError("expression uses no variable x1..xk")
    code = compile(tree, "<fn>", "eval")

    def fn(xs):
        scope = {f"x{i + 1}": float(xs[i]) for i in range(arity)}
        scope.update(_EXPR_FUNCS)
        return float(eval(code, {"__builtins__": {}}, scope))

    return fn, arity


def _cmd_lipcheck(args) -> int:
    reg = default_registry()
    if args.fn in reg.names():
        conn = reg.get(args.fn)
    else:
        fn, arity = _compile_expr(args.fn)
        conn = make_user_connective("cli_expr", arity, fn)
    lo, _, hi = args.box.partition(",")
    try:
        box = (float(lo), float(hi))
    except ValueError as exc:
        raise InputError(f"bad box {args.box!r}") from exc
    report = check_relative_lipschitz(conn, box=box, samples=args.samples,
                                      seed=args.seed)
    doc = {
        "fn": args.fn,
        "verdict": report.verdict,
        "estimated_c": report.estimated_c,
        "samples": report.samples,
        "box": list(report.box),
        "c_bound": report.c_bound,
        "witness": None if report.witness is None else {
            "specialization": list(report.witness[0]),
            "x": [float(t) for t in report.witness[1]],
            "y": [float(t) for t in report.witness[2]],
            "quotient": float(report.witness[3]),
        },
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def _cmd_closure(args) -> int:
    g, _ = parse_graph_literal(_read_file(args.graph))
    u = _parse_tuple(args.tuple_)
    cl = closure(g, u, args.s, args.alpha)
    inside = sorted(cl.vertices)
    print("vertices:", ",".join(str(v) for v in inside))
    sub, _ = induced_subgraph(g, inside)
    print(format_graph_literal(sub), end="")
    return 0


def _cmd_extcount(args) -> int:
    g, _ = parse_graph_literal(_read_file(args.graph))
    u = _parse_tuple(args.tuple_)
    pair = parse_pair_literal(_read_file(args.pattern))
    print(count_extensions(g, u, pair))
    return 0


def _cmd_chain(args) -> int:
    pair = parse_pair_literal(_read_file(args.pair))
    steps = strictly_balanced_chain(pair)
    previous = 0
    for verts, graph in steps:
        fresh = graph.n - previous
        previous = graph.n
        print(f"vertices={sorted(verts)} n={graph.n} "
              f"edges={graph.edge_count} fresh={fresh}")
    return 0


def _cmd_analyze(args) -> int:
    term = parse(_read_maybe_file(args.term))
    if args.regime == "dense":
        if args.dense_p is None:
            raise InputError("dense analysis needs --dense-p")
        result = analyze_dense(term, args.dense_p)
    else:
        if args.alpha is None:
            raise InputError("sparse analysis needs --alpha")
        m = metrics(term)
        d = args.D if args.D is not None else m.depth
        w = args.W if args.W is not None else max(m.width, 1)
        result = analyze_sparse(term, args.alpha, d, w,
                                native_means=args.native_means)
    doc = _asym_dict(result.asym)
    if args.as_json:
        tables = []
        for node in result.table.walk():
            tables.append({
                "term": repr(node.term_node),
                "entries": {
                    repr(key): _asym_dict(val)
                    for key, val in sorted(node.entries.items(), key=repr)
                },
            })
        doc["tables"] = tables
        doc["caps"] = result.table.meta.get("caps")
        doc["meta"] = {
            k: v for k, v in sorted(result.table.meta.items())
            if k not in ("caps",) and _json_safe(v)
        }
        print(json.dumps(doc, indent=2, sort_keys=True, default=str))
    else:
        if doc["zero"]:
            print("asym: zero")
        else:
            print(f"asym: {doc['c']:.12g} * n^{doc['gamma']:.12g}")
    return 0


def _json_safe(v) -> bool:
    if isinstance(v, (bool, int, float, str, type(None))):
        return True
    if isinstance(v, (list, tuple)):
        return all(_json_safe(x) for x in v)
    if isinstance(v, dict):
        return all(isinstance(k, str) and _json_safe(x) for k, x in v.items())
    return False


def _parse_config(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise InputError(f"config line {lineno}: expected key = value")
        out[key.strip()] = val.strip()
    return out


def _cmd_experiment(args) -> int:
    kv = _parse_config(_read_file(args.config))
    required = ("term", "regime", "n_ladder", "replicates", "seed")
    missing = [k for k in required if k not in kv]
    if missing:
        raise InputError(f"config is missing {missing}")

    prediction = None
    if "prediction" in kv:
        text = kv["prediction"]
        if text == "zero":
            prediction = ZERO
        else:
            parts = text.split(",")
            if len(parts) != 2:
                raise InputError(
                    "prediction must be 'zero' or 'c,gamma', got "
                    f"{text!r}")
            prediction = Pow(float(parts[0]), float(parts[1]))

    extras = {}
    for key in ("dense_lambda", "sparse_epsilon"):
        if key in kv:
            extras[key] = float(kv[key])
    if "budget" in kv:
        extras["budget"] = int(kv["budget"])

    cfg = ExperimentConfig(
        term=parse(_read_maybe_file(kv["term"])),
        regime=_parse_regime(kv["regime"]),
        n_ladder=_parse_tuple(kv["n_ladder"]),
        replicates=int(kv["replicates"]),
        seed=int(kv["seed"]),
        prediction=prediction,
        **extras,
    )
    report = run_concentration_experiment(cfg)
    if args.out == "-":
        print(json.dumps(report_to_dict(report), indent=2, sort_keys=True))
    else:
        emit_report(report, args.out, "json")
    if args.csv:
        emit_report(report, args.csv, "csv")
    return 0


def _cmd_report_plot(args) -> int:
    try:
        doc = json.loads(_read_file(args.in_))
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.in_} is not a JSON report: {exc}") from exc
    rows = doc.get("per_n")
    if not isinstance(rows, list) or not rows:
        raise InputError(f"{args.in_} has no per-size rows to plot")

    check = doc.get("prediction_check") or {}
    have_power = check.get("kind") == "power"
    header = "# n mean sd min max" + (" predicted" if have_power else "")
    lines = [header]
    for row in rows:
        cells = [str(row["n"])] + [
            f"{row[k]:.12g}" for k in ("mean", "sd", "min", "max")
        ]
        if have_power:
            cells.append(f"{check['c'] * row['n'] ** check['gamma']:.12g}")
        lines.append(" ".join(cells))
    _write_out("\n".join(lines), args.out)
    return 0


def _cmd_connectives(args) -> int:
    print(json.dumps(default_registry().descriptors(), indent=2,
                     sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
