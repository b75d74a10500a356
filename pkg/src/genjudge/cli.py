"""Command-line entry point: ``genjudge gen|featurize|eval|compare|selftest``.

Exit codes: 0 success, 1 selftest failure, 2 usage error, 3 I/O error,
4 pipeline error. Logs and diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, selftest
from .classifier import CvConfig
from .errors import DatasetError, GenJudgeError, GraphFormatError, InvalidParams
from .evaluator import (
    NORMALIZATIONS,
    ComparisonRow,
    ComparisonTable,
    EvaluationConfig,
    build_kernel,
    compare_generators,
    comparison_csv,
    evaluate_generator,
    family_of,
    rank_rows,
)
from .generators import Family, GeneratorSpec, fit_parameters, sample_mixed
from .graph import Label, RngSeed, fresh_seed, load_dataset, save_dataset
from .graphlets import CountingMode, feature_matrix, features_to_csv
from .kernel import kernel_to_csv

log = logging.getLogger("genjudge")

EXIT_OK, EXIT_SELFTEST, EXIT_USAGE, EXIT_IO, EXIT_PIPELINE = 0, 1, 2, 3, 4
FITTABLE = ("ba", "caveman", "er")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Pipeline(Exception):
    pass


# ---------------------------------------------------------------- config

def _default_threads() -> int:
    env = os.environ.get("GENJUDGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"GENJUDGE_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _parse_sizes(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(int(k) for k in text)
    try:
        return tuple(int(tok) for tok in str(text).split(",") if tok.strip())
    except ValueError:
        raise UsageError(f"--sizes expects comma-separated integers, got {text!r}") from None


def _load_config_file(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must be a JSON object")
    known = set(EvaluationConfig().to_dict())
    unknown = set(doc) - known
    if unknown:
        raise UsageError(f"config {path} has unknown keys {sorted(unknown)}")
    return doc


def resolve_config(args) -> EvaluationConfig:
    """Merge flags over the config file over built-in defaults."""
    merged = EvaluationConfig().to_dict()
    merged["master_seed"] = None
    if getattr(args, "config", None):
        doc = _load_config_file(args.config)
        for key, val in doc.items():
            if isinstance(merged.get(key), dict) and isinstance(val, dict):
                merged[key] = {**merged[key], **val}
            else:
                merged[key] = val

    flags = {
        "sizes": args.sizes,
        "kernel": args.kernel,
        "smoothing": args.smoothing,
        "normalize": args.normalize,
        "trials": getattr(args, "trials", None),
        "master_seed": args.seed,
    }
    merged.update({k: v for k, v in flags.items() if v is not None})
    if args.counting is not None:
        merged["counting"] = {**merged["counting"], "kind": args.counting}
    if args.samples is not None:
        merged["counting"] = {**merged["counting"], "samples": args.samples}
    cv_flags = {"folds": args.folds, "repeats": args.repeats, "c_param": args.c_param,
                "tolerance": args.tolerance, "max_passes": args.max_passes}
    merged["cv"] = {**merged["cv"], **{k: v for k, v in cv_flags.items() if v is not None}}

    if merged["master_seed"] is None:
        merged["master_seed"] = fresh_seed()
        print(f"seed={merged['master_seed']}", file=sys.stderr)

    try:
        counting = merged["counting"]
        mode = CountingMode(counting.get("kind", "exact"), int(counting.get("samples") or 0))
        cv = merged["cv"]
        return EvaluationConfig(
            sizes=_parse_sizes(merged["sizes"]),
            counting=mode,
            kernel=merged["kernel"],
            smoothing=float(merged["smoothing"]),
            normalize=merged["normalize"],
            cv=CvConfig(int(cv["folds"]), int(cv["repeats"]), 0, float(cv["c_param"]),
                        float(cv["tolerance"]), int(cv["max_passes"])),
            trials=int(merged["trials"]),
            master_seed=RngSeed(int(merged["master_seed"])),
        )
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


# ---------------------------------------------------------------- sources

def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _parse_params(text: str) -> dict:
    out = {}
    for tok in filter(None, text.split(",")):
        if "=" not in tok:
            raise UsageError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


_FAMILY_PARAMS = {"ba": ("n", "m"), "caveman": ("l", "k"), "er": ("n", "p")}


def _family_spec(family: str, params: dict) -> GeneratorSpec:
    names = _FAMILY_PARAMS[family]
    missing = [k for k in names if k not in params]
    extra = sorted(set(params) - set(names))
    if missing:
        raise UsageError(f"{family}: missing parameter {missing[0]}")
    if extra:
        raise UsageError(f"{family}: unknown parameters {extra}")
    return getattr(GeneratorSpec, family)(*(params[k] for k in names))


def parse_source(text: str) -> tuple[str, GeneratorSpec | tuple]:
    """``name=kind[:args]`` where kind is dir, ba, caveman, er, rewire or fit.

    Examples: ``mine=dir:out/``, ``ba=ba:n=100,m=2``, ``copy=rewire:0.3``,
    ``fitted=fit:ba``. A family without parameters is fitted to the real set later.
    """
    if "=" not in text:
        raise UsageError(f"--source expects name=spec, got {text!r}")
    name, spec = text.split("=", 1)
    kind, _, rest = spec.partition(":")
    name = name.strip()
    if not name:
        raise UsageError(f"--source {text!r} has an empty name")
    if kind == "dir":
        if not rest:
            raise UsageError(f"--source {name}: dir needs a path")
        return name, GeneratorSpec.external(rest)
    if kind == "rewire":
        try:
            frac = float(rest.split("=", 1)[-1]) if rest else 0.0
        except ValueError:
            raise UsageError(f"--source {name}: bad rewire fraction {rest!r}") from None
        return name, GeneratorSpec.rewire(frac)
    if kind == "fit":
        if rest not in FITTABLE:
            raise UsageError(f"--source {name}: fit needs one of {', '.join(FITTABLE)}")
        return name, ("fit", rest)
    if kind in FITTABLE:
        params = _parse_params(rest)
        return name, ("fit", kind) if not params else _family_spec(kind, params)
    raise UsageError(f"--source {name}: unknown kind {kind!r}")


def _resolve_fit(spec, real) -> GeneratorSpec:
    if isinstance(spec, tuple):
        return fit_parameters(Family(spec[1]), real)
    return spec


# ---------------------------------------------------------------- commands

def _int_or_range(text: str):
    lo, sep, hi = text.partition(":")
    try:
        return (int(lo), int(hi)) if sep else int(lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or lo:hi, got {text!r}") from None


def _draw(value, rng):
    if isinstance(value, tuple):
        lo, hi = value
        if lo > hi:
            raise UsageError(f"empty range {lo}:{hi}")
        return int(rng.integers(lo, hi + 1))
    return value


def cmd_gen(args) -> int:
    seed = args.seed if args.seed is not None else fresh_seed()
    if args.seed is None:
        print(f"seed={seed}", file=sys.stderr)
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    master = RngSeed(seed)
    # parameter ranges ("--n 60:120") are drawn per graph from a separate stream
    rng = master.stream(1).generator()
    specs = []
    for name in _FAMILY_PARAMS[args.family]:
        if getattr(args, name) is None:
            raise UsageError(f"--family {args.family} needs --{name}")
    for _ in range(args.count):
        if args.family == "ba":
            specs.append(GeneratorSpec.ba(_draw(args.n, rng), _draw(args.m, rng)))
        elif args.family == "caveman":
            specs.append(GeneratorSpec.caveman(_draw(args.l, rng), _draw(args.k, rng)))
        else:
            specs.append(GeneratorSpec.er(_draw(args.n, rng), args.p))
    ds = sample_mixed(specs, master.stream(0), Label(args.label))
    try:
        manifest = save_dataset(ds, args.out)
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc}") from None
    log.info("wrote %d graphs to %s", len(ds), manifest.parent)
    return EXIT_OK


def _load_real(path):
    try:
        return load_dataset(path)
    except (DatasetError, GraphFormatError, OSError) as exc:
        raise InputError(f"cannot load {path}: {type(exc).__name__}: {exc}") from None


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from None


def cmd_featurize(args) -> int:
    config = resolve_config(args)
    ds = _load_real(args.manifest)
    try:
        feats = feature_matrix(ds.graphs, config.sizes, config.counting,
                               config.master_seed.stream(2).stream(0), args.threads)
        _write(Path(args.out), features_to_csv(feats, config.sizes))
        if args.kernel_out:
            k = build_kernel(feats, config)
            _write(Path(args.kernel_out), kernel_to_csv(k, config.sizes))
    except GenJudgeError as exc:
        raise _Pipeline(f"featurize: {type(exc).__name__}: {exc}") from None
    return EXIT_OK


def _fake_spec(args, real) -> GeneratorSpec:
    chosen = [x for x in (args.fake_dir, args.fake_family, args.fake_rewire) if x is not None]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --fake-dir, --fake-family, --fake-rewire")
    if args.fake_dir is not None:
        return GeneratorSpec.external(args.fake_dir)
    if args.fake_rewire is not None:
        return GeneratorSpec.rewire(args.fake_rewire)
    params = {k: getattr(args, k) for k in ("n", "m", "l", "k", "p") if getattr(args, k) is not None}
    if not params:
        return ("fit", args.fake_family)
    return _family_spec(args.fake_family, params)


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def cmd_eval(args) -> int:
    config = resolve_config(args)
    real = _load_real(args.real)
    spec = _fake_spec(args, real)
    try:
        spec = _resolve_fit(spec, real)
        report = evaluate_generator(real, spec, config, args.name, args.graph_family, args.threads)
    except GenJudgeError as exc:
        raise _Pipeline(str(exc) if hasattr(exc, "stage") else f"{type(exc).__name__}: {exc}") from None
    _write(Path(args.out), _dump_json(report.to_dict()))
    print(f"accuracy={report.mean_accuracy:.6f} error={report.mean_error:.6f}")
    return EXIT_OK


def cmd_compare(args) -> int:
    if not args.source:
        raise UsageError("compare needs at least one --source")
    config = resolve_config(args)
    real = _load_real(args.real)
    parsed = [parse_source(s) for s in args.source]
    names = [n for n, _ in parsed]
    if len(set(names)) != len(names):
        raise UsageError("--source names must be unique")

    sources, unfittable = [], {}
    for name, spec in parsed:
        try:
            sources.append((name, _resolve_fit(spec, real)))
        except GenJudgeError as exc:
            unfittable[name] = f"{type(exc).__name__}: {exc}"
    family = args.graph_family or family_of(real)
    try:
        table = compare_generators(real, sources, config, family, args.threads) if sources else None
    except GenJudgeError as exc:
        raise _Pipeline(f"{type(exc).__name__}: {exc}") from None
    if table is None:
        table = ComparisonTable(family)
    if unfittable:
        table.rows = rank_rows(table.rows + [ComparisonRow(n, failure=f) for n, f in unfittable.items()])

    out = Path(args.out_dir)
    _write(out / "comparison.csv", comparison_csv([table], "combined"))
    _write(out / "comparison_accuracy.csv", comparison_csv([table], "accuracy"))
    _write(out / "comparison_error.csv", comparison_csv([table], "error"))
    doc = {"version": __version__, "config": config.to_dict(), **table.to_dict()}
    _write(out / "comparison.json", _dump_json(doc))
    print(table.format())
    if not table.ranking:
        print("error: every source failed", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_OK


def cmd_selftest(args) -> int:
    return EXIT_OK if selftest.run() else EXIT_SELFTEST


# ---------------------------------------------------------------- parser

def _add_eval_flags(p: argparse.ArgumentParser, with_trials: bool = True) -> None:
    g = p.add_argument_group("evaluation")
    g.add_argument("--config", help="JSON file mirroring the report's config block")
    g.add_argument("--seed", type=int, help="master seed (drawn and printed if omitted)")
    g.add_argument("--sizes", help="graphlet sizes, e.g. 3,4")
    g.add_argument("--counting", choices=("exact", "sampled"))
    g.add_argument("--samples", type=int, help="samples per size in sampled mode")
    g.add_argument("--kernel", choices=("base", "deep"))
    g.add_argument("--smoothing", type=float, help="PPMI smoothing for the deep kernel")
    g.add_argument("--normalize", choices=sorted(NORMALIZATIONS))
    g.add_argument("--folds", type=int)
    g.add_argument("--repeats", type=int)
    g.add_argument("--C", dest="c_param", type=float)
    g.add_argument("--tolerance", type=float)
    g.add_argument("--max-passes", type=int)
    if with_trials:
        g.add_argument("--trials", type=int)
    g.add_argument("--threads", type=int, default=None, help="worker processes (default: $GENJUDGE_THREADS or CPU count)")


def _add_family_params(p: argparse.ArgumentParser, ranges: bool) -> None:
    kind = _int_or_range if ranges else int
    suffix = " (integer or lo:hi)" if ranges else ""
    p.add_argument("--n", type=kind, help="node count" + suffix)
    p.add_argument("--m", type=kind, help="BA edges per new node" + suffix)
    p.add_argument("--l", type=kind, help="caveman clique count" + suffix)
    p.add_argument("--k", type=kind, help="caveman clique size" + suffix)
    p.add_argument("--p", type=float, help="ER edge probability")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genjudge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="per-stage progress on stderr")
    # -v is accepted after the subcommand too
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a labeled dataset of synthetic graphs")
    p.add_argument("--family", required=True, choices=FITTABLE)
    _add_family_params(p, ranges=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--label", choices=("real", "fake"), default="real")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("featurize", parents=[common], help="write graphlet features (and optionally the kernel) as CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default="features.csv")
    p.add_argument("--kernel-out", help="also write the normalized kernel matrix here")
    _add_eval_flags(p, with_trials=False)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("eval", parents=[common], help="score one generator against a real dataset")
    p.add_argument("--real", required=True, help="manifest.json of the target graphs")
    p.add_argument("--fake-dir", help="directory of externally generated .el files")
    p.add_argument("--fake-family", choices=FITTABLE, help="built-in family (fitted unless parameters given)")
    p.add_argument("--fake-rewire", type=float, help="perturbed copies of the real graphs")
    _add_family_params(p, ranges=False)
    p.add_argument("--name", help="generator name in the report")
    p.add_argument("--graph-family", help="family name in the report (default: from manifest tags)")
    p.add_argument("--out", default="report.json")
    _add_eval_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", parents=[common], help="rank several generators against one real dataset")
    p.add_argument("--real", required=True)
    p.add_argument("--source", action="append", default=[], metavar="NAME=SPEC",
                   help="dir:PATH, ba[:n=..,m=..], caveman[:l=..,k=..], er[:n=..,p=..], rewire:FRACTION, fit:FAMILY")
    p.add_argument("--graph-family")
    p.add_argument("--out-dir", default=".")
    _add_eval_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("selftest", parents=[common], help="run the built-in calibration battery")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if hasattr(args, "threads") and args.threads is None:
            args.threads = _default_threads()
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except (UsageError, InvalidParams) as exc:
        print(f"genjudge {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"genjudge {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (_Pipeline, GenJudgeError) as exc:
        print(f"genjudge {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
