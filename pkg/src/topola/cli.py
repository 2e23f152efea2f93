"""Command-line front end.

Every command is a pure function of its input files, flags and ``--seed``;
files are written atomically. Exit codes: 0 success, 2 usage or
configuration error, 3 numerical failure (including a failed oracle check).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from contextlib import nullcontext

import numpy as np

from . import __version__
from ._rng import component_rng
from .core import (cn_matrix, fastnr_enhance, lambda_grid, nr_enhance, singular_transform,
                   topola_distance, topola_series)
from .diffusion import RwrParams, cnrwr, rwr, rwr_closed_form, transition_matrix, trwr
from .netcore import (IngestError, _atomic_write, dense_to_csv, figs9_path, format_float,
                      load_dense_matrix, load_matrix)
from .paths import EnumerationLimit, path_census, walk_count
from .spectral import SpectralError, condition_number, singular_values

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
TOP_SIGMA = 10
FIGS9_EXPECTED = (1, 10, 89)


class ConfigError(Exception):
    pass


class OracleFailure(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    return x


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def _emit(text, path):
    if path:
        _atomic_write(path, text)
    else:
        sys.stdout.write(text)


def _load(args):
    if not args.input:
        raise ConfigError("--input is required")
    kwargs = {}
    fmt = args.format
    if fmt != "dense":
        kwargs = dict(directed=args.directed, weighted=args.weighted, sort_labels=args.sort_labels)
    mat, index = load_matrix(args.input, fmt=fmt, **kwargs)
    return mat.values, index


def _need_lambda(args):
    if args.lam is None:
        raise ConfigError("--lambda is required for this method")
    return args.lam


def _labels(index, size):
    return [str(index.label(i)) for i in range(size)] if index is not None else None


def _node(index, label):
    if label in index:
        return index.index(label)
    # dense inputs are labelled 0..n-1 as integers
    try:
        return index.index(int(label))
    except (ValueError, KeyError):
        raise ConfigError(f"unknown node {label!r}") from None


# ---------------------------------------------------------------- commands

def cmd_enhance(args):
    A, index = _load(args)
    method = args.method or "nr"
    lam = None
    if method == "nr":
        lam = _need_lambda(args)
        out = nr_enhance(A, lam)
    elif method == "fastnr":
        lam = _need_lambda(args)
        if (args.rank is None) == (args.tol is None):
            raise ConfigError("fastnr needs exactly one of --rank or --tol")
        out = fastnr_enhance(A, lam, rank=args.rank, tol=args.tol, block=args.block,
                             power=args.power, seed=component_rng(args.seed, "sketch"))
    elif method == "cn":
        out = cn_matrix(A)
    else:
        raise ConfigError(f"enhance method must be nr, fastnr or cn, got {method!r}")
    summary = {"method": method, "lambda": lam, "shape": list(out.shape),
               "sigma_before": singular_values(A)[:TOP_SIGMA],
               "sigma_after": singular_values(out)[:TOP_SIGMA],
               "labels": _labels(index, A.shape[0])}
    if args.output:
        _atomic_write(args.output, dense_to_csv(out))
        sys.stdout.write(_dumps(summary))
    else:
        sys.stdout.write(dense_to_csv(out))
        sys.stderr.write(_dumps(summary))


def cmd_distance(args):
    A, _ = _load(args)
    D = topola_distance(A, _need_lambda(args)).values
    _emit(dense_to_csv(D), args.output)


def cmd_predict(args):
    A, index = _load(args)
    method = args.method or "rwr"
    if args.alpha is None:
        raise ConfigError("--alpha is required for predict")
    params = RwrParams(args.alpha, args.normalization)
    if args.initial:
        if A.shape[0] != A.shape[1]:
            raise ConfigError("--initial needs a square network")
        P0 = load_dense_matrix(args.initial).values
        if P0.shape[0] != A.shape[0]:
            raise ConfigError(f"initial state has {P0.shape[0]} rows, network has {A.shape[0]}")
        scores = rwr_closed_form(transition_matrix(A, args.normalization), P0, args.alpha).scores
    elif method == "rwr":
        scores = rwr(A, params).scores
    elif method == "trwr":
        scores = trwr(A, params, _need_lambda(args)).scores
    elif method == "cnrwr":
        scores = cnrwr(A, params).scores
    else:
        raise ConfigError(f"predict method must be rwr, trwr or cnrwr, got {method!r}")
    if args.mask_train:
        scores = np.array(scores, copy=True)
        scores[A != 0] = -np.inf
        if scores.shape[0] == scores.shape[1]:
            np.fill_diagonal(scores, -np.inf)
    if args.top is not None:
        _emit(_ranked_pairs(scores, A, index, args.top), args.output)
    else:
        _emit(dense_to_csv(scores), args.output)


def _ranked_pairs(scores, A, index, top):
    """CSV of the ``top`` highest-scoring absent pairs (labels, score)."""
    square = A.shape[0] == A.shape[1]
    undirected = square and np.array_equal(A, A.T)
    mask = (A == 0) & np.isfinite(scores)
    if square:
        np.fill_diagonal(mask, False)
        if undirected:
            mask = np.triu(mask, k=1)
    cells = np.argwhere(mask)
    s = scores[cells[:, 0], cells[:, 1]]
    if undirected:
        s = 0.5 * (s + scores[cells[:, 1], cells[:, 0]])
    order = np.lexsort((np.arange(s.size), -s))[:top]
    lines = ["source,target,score\n"]
    for k in order:
        i, j = cells[k]
        lines.append(f"{index.label(i)},{index.label(j)},{format_float(s[k])}\n")
    return "".join(lines)


def cmd_eval(args):
    from .eval.linkpred import run_link_prediction

    A, _ = _load(args)
    method = args.method or "rwr"
    if method not in ("rwr", "trwr", "cnrwr"):
        raise ConfigError(f"eval method must be rwr, trwr or cnrwr, got {method!r}")
    params = RwrParams(args.alpha, args.normalization) if args.alpha is not None else None
    report = run_link_prediction(
        A, method, rwr_params=params, topo_params=args.lam, k=args.folds, seed=args.seed,
        mask_train=args.mask_train, directed=True if args.directed else None,
        normalization=args.normalization, neg_sample=args.neg_sample,
        select_metric=args.select_metric)
    _emit(_dumps(report.to_dict()), args.output)


def cmd_spectrum(args):
    A, _ = _load(args)
    s = singular_values(A)
    lam = args.lam if args.lam is not None else lambda_grid(A, [0])[0]
    out = {"shape": list(A.shape), "lambda": lam, "sigma": s, "gaps": -np.diff(s),
           "sigma_enhanced": singular_transform(s, lam), "condition_number": condition_number(A)}
    _emit(_dumps(out), args.output)


def cmd_lambda_grid(args):
    A, _ = _load(args)
    exps = list(range(args.min_exp, args.max_exp + 1))
    grid = lambda_grid(A, exps)
    _emit(_dumps({"exponents": exps, "lambdas": grid}), args.output)


def cmd_oracle(args):
    from .core import SeriesDivergenceWarning
    import warnings

    path = args.graph or args.input or str(figs9_path())
    default_graph = not (args.graph or args.input)
    mat, index = load_matrix(path, fmt=args.format, sort_labels=args.sort_labels)
    A = mat.values
    src, dst = args.pair or (["D", "E"] if default_graph else [None, None])
    if src is None:
        raise ConfigError("--pair is required with a custom graph")
    i, j = _node(index, src), _node(index, dst)
    expected = args.expect or (list(FIGS9_EXPECTED) if default_graph else None)
    if expected is not None and len(expected) != len(args.hops):
        raise ConfigError("--expect needs one value per --hops entry")

    lines, ok = [], True
    walks = [walk_count(A, n, i, j) for n in args.hops]
    lines.append(f"walks {src}->{dst}: " + ", ".join(f"{n}-hop={w}" for n, w in zip(args.hops, walks)))
    if expected is not None:
        match = walks == list(expected)
        ok &= match
        lines.append(f"expected {list(expected)}: {'PASS' if match else 'FAIL'}")
    for n in args.hops:
        census = path_census(A, n, i, j)
        good = census.total == census.a_n + census.b + census.c and census.c >= 0
        ok &= good
        lines.append(f"census n={n}: total={census.total} a_n={census.a_n} b={census.b} "
                     f"c={census.c} loop_free={[census.a[l] for l in sorted(census.a)]} "
                     f"{'PASS' if good else 'FAIL'}")
    smax2 = float(singular_values(A)[0]) ** 2
    lam = args.lam if args.lam is not None else smax2 / 0.5
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeriesDivergenceWarning)
        series = topola_series(A, lam, args.terms)
    closed = topola_distance(A, lam).values
    resid = float(np.max(np.abs(series - closed)))
    scale = float(np.max(np.abs(A @ A.T))) / lam
    convergent = smax2 < lam
    good = convergent and resid <= 1e-8 * scale
    ok &= good
    lines.append(f"series lambda={format_float(lam)} terms={args.terms} "
                 f"ratio={format_float(smax2 / lam)}: max|closed-series|={resid:.3e} "
                 f"(limit {1e-8 * scale:.3e}) {'PASS' if good else 'FAIL'}")
    lines.append("PASS" if ok else "FAIL")
    _emit("\n".join(lines) + "\n", args.output)
    if not ok:
        raise OracleFailure("oracle check failed")


def cmd_analyze(args):
    from .eval.analysis import band_spearman, pair_analysis
    from .eval.synthetic import gnm_graph

    if args.input:
        A, _ = _load(args)
    elif args.nodes is not None and args.edges is not None:
        A = gnm_graph(args.nodes, args.edges, seed=component_rng(args.seed, "graph"))
    else:
        raise ConfigError("analyze needs --input or both --nodes and --edges")
    lam = args.lam if args.lam is not None else lambda_grid(A, [0])[0]
    table = pair_analysis(A, lam)
    if args.output:
        table.save_csv(args.output)
    else:
        sys.stdout.write(table.to_csv())
        return
    sys.stdout.write(_dumps({"lambda": lam, "pairs": len(table),
                             "bands": band_spearman(table)}))


COMMANDS = {
    "enhance": (cmd_enhance, "enhance a network with NR, fastNR or CN"),
    "distance": (cmd_distance, "write the TopoLa distance matrix"),
    "predict": (cmd_predict, "score node pairs with RWR, TRWR or CNRWR"),
    "eval": (cmd_eval, "cross-validated link prediction report"),
    "spectrum": (cmd_spectrum, "singular values, gaps, enhanced values, condition number"),
    "oracle": (cmd_oracle, "walk-count, path-census and series checks"),
    "analyze": (cmd_analyze, "node-pair degree/similarity study"),
    "lambda-grid": (cmd_lambda_grid, "candidate lambda values scaled to the spectrum"),
}


# ---------------------------------------------------------------- parser

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", help="edge list or dense .csv matrix")
    p.add_argument("--output", help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("auto", "edges", "dense"), default="auto")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--method")
    p.add_argument("--rank", type=_positive_int)
    p.add_argument("--tol", type=float)
    p.add_argument("--block", type=_positive_int, default=16)
    p.add_argument("--power", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--folds", type=_positive_int, default=10)
    p.add_argument("--normalization", choices=("column", "row", "symmetric"), default="column")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--mask-train", action="store_true")
    p.add_argument("--sort-labels", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topola", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    subs = {name: sub.add_parser(name, parents=[common], help=text)
            for name, (_, text) in COMMANDS.items()}
    subs["predict"].add_argument("--top", type=_positive_int,
                                 help="write the top absent pairs instead of the score matrix")
    subs["predict"].add_argument("--initial", help="dense CSV initial state for the restart walk")
    subs["eval"].add_argument("--select-metric", choices=("auc", "aupr"), default="auc")
    subs["eval"].add_argument("--neg-sample", type=_positive_int)
    subs["oracle"].add_argument("--graph")
    subs["oracle"].add_argument("--pair", nargs=2, metavar=("SOURCE", "TARGET"))
    subs["oracle"].add_argument("--hops", type=_positive_int, nargs="+", default=[2, 4, 6])
    subs["oracle"].add_argument("--expect", type=int, nargs="+")
    subs["oracle"].add_argument("--terms", type=_positive_int, default=60)
    subs["analyze"].add_argument("--nodes", type=_positive_int)
    subs["analyze"].add_argument("--edges", type=_positive_int)
    subs["lambda-grid"].add_argument("--min-exp", type=int, default=-3)
    subs["lambda-grid"].add_argument("--max-exp", type=int, default=3)
    return parser


def _thread_limit():
    raw = os.environ.get("TOPOLA_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"TOPOLA_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError("TOPOLA_THREADS must be >= 0")
    if n == 0:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = COMMANDS[args.command][0]
    try:
        with _thread_limit(), np.errstate(over="raise", invalid="raise"):
            handler(args)
    except OracleFailure:
        return EXIT_NUMERIC
    except (ConfigError, IngestError, FileNotFoundError, IsADirectoryError,
            EnumerationLimit) as exc:
        sys.stderr.write(f"topola {args.command}: {exc}\n")
        return EXIT_CONFIG
    except (ArithmeticError, SpectralError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"topola {args.command}: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:
        sys.stderr.write(f"topola {args.command}: {exc}\n")
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
