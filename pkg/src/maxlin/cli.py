"""``maxlin`` command-line interface.

Exit status is 0 on success, 2 for usage or input errors and 3 when an
internal invariant fails.  Every command prints a run manifest to stderr
and, when it writes a file, also saves it as ``<out>.manifest.json``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from . import io as mio
from .errors import InvariantViolation, MaxLinError
from .estimate import (
    atom_probability,
    bhat,
    empirical_marginals,
    learn_structure,
    model_marginals,
    recover_innovation_cdfs,
    required_sample_size,
)
from .experiment import CONSISTENCY_HEADER, consistency
from .gmle import gmle_compare
from .model import ml_matrix_from_weights, ratio_profile, validate_ml_matrix
from .simulate import simulate_model

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _edge(text: str) -> tuple[int, int]:
    sep = "->" if "->" in text else ","
    try:
        k, i = (int(v) for v in text.split(sep))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an edge like 1,2 or 1->2, got {text!r}") from None
    return k, i


def parse_grid(text: str) -> np.ndarray:
    """``a,b,c`` lists points; ``start:stop:count`` is an evenly spaced grid."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            xs = np.linspace(float(start), float(stop), int(count))
        else:
            xs = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use a,b,c or start:stop:count") from None
    if xs.size == 0 or not np.all(np.isfinite(xs)) or not np.all(xs > 0):
        raise argparse.ArgumentTypeError("grid points must be positive and finite")
    return xs


def _dump(out, obj) -> None:
    if out is None:
        print(json.dumps(obj, indent=2))
    else:
        mio.write_json(out, obj)


# --- commands ------------------------------------------------------------------------


def cmd_simulate(args) -> dict:
    wd, spec = mio.read_model(args.model)
    x = simulate_model(wd, spec, args.n, args.seed, replicate=args.replicate, method=args.method)
    mio.write_samples_csv(args.out, x)
    return {"model": args.model}


def cmd_estimate(args) -> dict:
    dag = mio.read_dag(args.dag)
    x = mio.read_samples_csv(args.samples, d=dag.d)
    report = bhat(x, dag)
    obj = report.to_json()
    obj["valid"] = validate_ml_matrix(report.b_hat, dag)
    _dump(args.out, obj)
    return {"samples": args.samples, "dag": args.dag}


def cmd_learn(args) -> dict:
    x = mio.read_samples_csv(args.samples)
    learned = learn_structure(x, tie_rtol=args.tie_tol, min_hits=args.min_hits, project=args.project)
    obj = learned.to_json()
    obj["tie_tol"] = args.tie_tol
    obj["min_hits"] = args.min_hits
    _dump(args.out, obj)
    return {"samples": args.samples}


def cmd_analyze(args) -> dict:
    if args.model is not None:
        wd, _ = mio.read_model(args.model)
        b = ml_matrix_from_weights(wd)
        src = {"model": args.model}
    else:
        b = mio.read_matrix(args.b)
        src = {"b": args.b}
    _dump(args.out, ratio_profile(b, args.j, args.i).to_json())
    return src


def cmd_gmle_test(args) -> dict:
    dag = mio.read_dag(args.dag)
    x = mio.read_samples_csv(args.samples, d=dag.d)
    b_hat = bhat(x, dag).b_hat
    results = []
    for name, q in mio.read_candidates(args.candidates):
        if isinstance(q, Exception):
            results.append({"name": name, "error": str(q)})
            continue
        try:
            if q.shape != (dag.d, dag.d) or not validate_ml_matrix(q, dag):
                raise MaxLinError("not an ML coefficient matrix for the dag")
            results.append({"name": name, "verdict": gmle_compare(x, b_hat, q, dag).value})
        except MaxLinError as exc:
            results.append({"name": name, "error": str(exc)})
    _dump(args.out, {"b_hat": b_hat.tolist(), "results": results})
    return {"samples": args.samples, "dag": args.dag, "candidates": args.candidates}


def cmd_sample_size(args) -> dict:
    if args.prob_strict is not None:
        if args.model is not None:
            raise MaxLinError("give either --prob-strict or --model, not both")
        n = required_sample_size(args.p, args.prob_strict)
        obj = {"n": n, "p": args.p, "prob_strict": args.prob_strict}
        src = {}
    else:
        if args.model is None or args.edge is None:
            raise MaxLinError("need --prob-strict, or --model with --edge")
        wd, spec = mio.read_model(args.model)
        atom = atom_probability(wd, spec, args.edge, args.mc, args.seed)
        if not 0.0 < atom.prob_strict < 1.0:
            raise MaxLinError(f"measured prob_strict is {atom.prob_strict}; increase --mc")
        n = required_sample_size(args.p, atom.prob_strict)
        obj = {
            "n": n,
            "p": args.p,
            "edge": list(args.edge),
            "prob_strict": atom.prob_strict,
            "stderr": atom.stderr,
            "n_mc": atom.n_mc,
        }
        src = {"model": args.model}
    _dump(args.out, obj)
    return src


def cmd_recover(args) -> dict:
    src = {}
    if args.b is not None:
        b = mio.read_matrix(args.b)
        src["b"] = args.b
    if args.samples is not None:
        x = mio.read_samples_csv(args.samples)
        marginals = empirical_marginals(x)
        src["samples"] = args.samples
        if args.b is None:
            raise MaxLinError("--samples needs --b")
    else:
        wd, spec = mio.read_model(args.model)
        src["model"] = args.model
        if args.b is None:
            b = ml_matrix_from_weights(wd)
        marginals = model_marginals(b, spec)
    if b.shape[0] != len(marginals):
        raise MaxLinError(f"b is {b.shape[0]}x{b.shape[0]} but data has {len(marginals)} columns")
    table = recover_innovation_cdfs(b, marginals, args.grid)
    d = b.shape[0]
    header = ["x"] + [f"z{k + 1}" for k in range(d)] + [f"z{k + 1}_censored" for k in range(d)]
    rows = []
    for g, xv in enumerate(table.xs):
        vals = [None if table.censored[g, k] else float(table.values[g, k]) for k in range(d)]
        rows.append([float(xv)] + vals + [bool(c) for c in table.censored[g]])
    mio.write_table_csv(args.out, header, rows)
    return src


def cmd_consistency(args) -> dict:
    wd, spec = mio.read_model(args.model)
    rows = consistency(wd, spec, args.n_grid, args.replicates, args.seed)
    table = [r.as_list() for r in rows]
    mio.write_table_csv(args.out, CONSISTENCY_HEADER, table)
    return {"model": args.model}


# --- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="maxlin", description="Recursive max-linear models on DAGs.")
    p.add_argument("--version", action="version", version=f"maxlin {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="draw samples from a model file")
    s.add_argument("--model", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--replicate", type=int, default=0)
    s.add_argument("--method", choices=["odot", "recursive"], default="odot")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("estimate", help="estimate B on a known DAG")
    s.add_argument("--samples", required=True)
    s.add_argument("--dag", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("learn", help="estimate B without a DAG")
    s.add_argument("--samples", required=True)
    s.add_argument("--tie-tol", type=float, default=1e-9)
    s.add_argument("--min-hits", type=int, default=2)
    s.add_argument("--project", action="store_true", help="also report the closure of the detected entries")
    s.add_argument("--out")
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("analyze", help="support and atoms of X_i / X_j")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--model")
    g.add_argument("--b")
    s.add_argument("--i", type=int, required=True)
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("gmle-test", help="compare candidate matrices against the estimate")
    s.add_argument("--samples", required=True)
    s.add_argument("--dag", required=True)
    s.add_argument("--candidates", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_gmle_test)

    s = sub.add_parser("sample-size", help="observations needed for exact recovery")
    s.add_argument("--p", type=float, required=True, help="allowed failure probability")
    s.add_argument("--prob-strict", type=float)
    s.add_argument("--model")
    s.add_argument("--edge", type=_edge)
    s.add_argument("--mc", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample_size)

    s = sub.add_parser("recover-innovations", help="innovation CDFs from B and the marginals")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--samples")
    g.add_argument("--model")
    s.add_argument("--b")
    s.add_argument("--grid", type=parse_grid, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_recover)

    s = sub.add_parser("consistency", help="exact-recovery frequency of the estimator versus n")
    s.add_argument("--model", required=True)
    s.add_argument("--replicates", type=int, required=True)
    s.add_argument("--n-grid", type=_int_list, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_consistency)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.time()
    try:
        inputs = args.func(args)
    except InvariantViolation as exc:
        print(f"maxlin: internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except MaxLinError as exc:
        print(f"maxlin: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"maxlin: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    manifest = mio.build_manifest(args.command, argv, getattr(args, "seed", None), inputs, started)
    mio.emit_manifest(manifest, args.out)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
