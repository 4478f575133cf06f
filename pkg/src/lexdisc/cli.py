"""Command-line entry point.

::

    lexdisc summarize --manifest corpus.csv
    lexdisc exp1 --manifest corpus.csv --registers ADS,IDS --out results
    lexdisc exp2 --manifest corpus.csv --seed 7 --samples 100 --no-onomatopoeia
    lexdisc abx --manifest corpus.csv --speaker spk01 --register IDS
    lexdisc ned --manifest corpus.csv

Options can also come from a ``key=value`` file given with ``--config``;
keys are the long option names without dashes (``registers=ADS,RS``).
Command-line flags win over the file.

Exit status: 0 success, 2 configuration error, 3 manifest or audio error,
4 not enough data for a paired test.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .corpus import ManifestError, load_manifest, summarize_corpus
from .distance import build_distance_table
from .experiments import (DEFAULT_REGISTERS, Corpus, InsufficientData, RunConfig, run,
                          write_outputs)
from .features import FrontendConfig, FrontendError, featurize_token
from .metrics import EmptyResult, abx_pairs, mean_ned

EXIT_CONFIG, EXIT_MANIFEST, EXIT_DATA = 2, 3, 4

# option name -> (parser for config-file values, built-in default)
OPTIONS = {
    "manifest": (str, None),
    "registers": (str, None),
    "seed": (int, 0),
    "samples": (int, 100),
    "no_onomatopoeia": (lambda v: v.strip().lower() in ("1", "true", "yes"), False),
    "out": (str, "results"),
    "no_cache": (lambda v: v.strip().lower() in ("1", "true", "yes"), False),
    "jobs": (int, 1),
    "window_ms": (float, 25.0),
    "hop_ms": (float, 10.0),
    "fmin": (float, 100.0),
    "fmax": (float, 6855.0),
    "nfilters": (int, 13),
    "speaker": (str, None),
    "register": (str, None),
}


class ConfigError(ValueError):
    pass


def read_config(path) -> dict:
    """Parse a ``key=value`` file; blank lines and ``#`` comments are ignored."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in OPTIONS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = OPTIONS[key][0](value)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return values


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file with default options")
    common.add_argument("--manifest", help="corpus manifest (CSV)")
    common.add_argument("--registers", help="two registers to compare, e.g. ADS,IDS")
    common.add_argument("--seed", type=int, help="sampling seed (default 0)")
    common.add_argument("--samples", type=int, help="lexicon samples per register (default 100)")
    common.add_argument("--no-onomatopoeia", action="store_true", default=None,
                        help="drop onomatopoeic types before sampling")
    common.add_argument("--out", help="output directory (default ./results)")
    common.add_argument("--no-cache", action="store_true", default=None,
                        help="recompute features and distances")
    common.add_argument("--jobs", type=int, help="worker threads for distance tables")
    fe = common.add_argument_group("front end")
    fe.add_argument("--window-ms", type=float)
    fe.add_argument("--hop-ms", type=float)
    fe.add_argument("--fmin", type=float)
    fe.add_argument("--fmax", type=float)
    fe.add_argument("--nfilters", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lexdisc", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("summarize", parents=[common], help="duration/type/token totals per register")
    for name, text in [("exp1", "acoustic scores on common words"),
                       ("control", "exp1 machinery on ADS vs RS"),
                       ("exp2", "mean NED on matched lexicon samples"),
                       ("exp3", "ABX on matched lexicon samples")]:
        sub.add_parser(name, parents=[common], help=text)
    for name, text in [("abx", "ABX score of every type pair"),
                       ("ned", "mean NED of every lexicon")]:
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--speaker")
        p.add_argument("--register")
    return parser


def resolve_options(args) -> dict:
    """Merge flags, config file and defaults (in that order of precedence)."""
    file_values = read_config(args.config) if args.config else {}
    opts = {}
    for key, (_, default) in OPTIONS.items():
        value = getattr(args, key, None)
        if value is None:
            value = file_values.get(key, default)
        opts[key] = value
    if opts["manifest"] is None:
        raise ConfigError("no manifest given (--manifest or manifest= in --config)")
    return opts


def frontend_from(opts) -> FrontendConfig:
    try:
        return FrontendConfig(n_filters=opts["nfilters"], f_min_hz=opts["fmin"],
                              f_max_hz=opts["fmax"], hop_s=opts["hop_ms"] / 1000.0,
                              window_s=opts["window_ms"] / 1000.0)
    except FrontendError as err:
        raise ConfigError(str(err)) from None


def config_from(opts, experiment: str) -> RunConfig:
    registers = DEFAULT_REGISTERS[experiment]
    if opts["registers"]:
        registers = tuple(r.strip() for r in opts["registers"].split(","))
    try:
        return RunConfig(
            manifest=opts["manifest"], experiment=experiment, registers=registers,
            n_samples=opts["samples"], seed=opts["seed"],
            remove_onomatopoeia=bool(opts["no_onomatopoeia"]), output_dir=Path(opts["out"]),
            use_cache=not opts["no_cache"], frontend=frontend_from(opts), n_jobs=opts["jobs"])
    except ValueError as err:
        raise ConfigError(str(err)) from None


def _print_comparisons(result, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["metric", "register_x", "register_y", "n", "mean_x", "mean_y",
                "t", "df", "p", "d_z", "d_av", "relative_pct"])
    for c in result.comparisons:
        w.writerow([c.metric, c.register_x, c.register_y, c.n, f"{c.mean_x:.6g}",
                    f"{c.mean_y:.6g}", f"{c.t:.4f}", c.df, f"{c.p:.4g}", f"{c.d_z:.4f}",
                    f"{c.d_av:.4f}", f"{c.relative_pct:.3f}"])


def cmd_summarize(opts, out):
    rows = summarize_corpus(load_manifest(opts["manifest"]))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["register", "duration_s", "types", "tokens"])
    for r in rows:
        w.writerow([r.register, f"{r.duration_s:.3f}", r.n_types, r.n_tokens])


def _selected(lexicons, opts):
    return [lex for lex in lexicons
            if (opts["speaker"] is None or lex.speaker_id == opts["speaker"])
            and (opts["register"] is None or lex.register == opts["register"])]


def cmd_abx(opts, out):
    frontend = frontend_from(opts)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["speaker_id", "register", "type_a", "type_b", "score", "n_triplets"])
    for lex in _selected(load_manifest(opts["manifest"]), opts):
        seqs = [featurize_token(t, frontend) for t in lex.tokens]
        table = build_distance_table(seqs, n_jobs=opts["jobs"])
        scores, _ = abx_pairs(lex, table)
        for (a, b), ps in scores.items():
            w.writerow([lex.speaker_id, lex.register, a, b, repr(ps.score), ps.count])


def cmd_ned(opts, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["speaker_id", "register", "n_types", "mean_ned"])
    for lex in _selected(load_manifest(opts["manifest"]), opts):
        try:
            value = repr(mean_ned(lex.types))
        except EmptyResult:
            value = ""
        w.writerow([lex.speaker_id, lex.register, len(lex), value])


def cmd_experiment(opts, experiment, out):
    cfg = config_from(opts, experiment)
    try:
        corpus = Corpus(cfg)
    except ValueError as err:
        if isinstance(err, ManifestError):
            raise
        raise ConfigError(str(err)) from None
    result = run(cfg, corpus)
    path = write_outputs(result)
    _print_comparisons(result, out)
    print(f"# reports written to {path}", file=out)


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = resolve_options(args)
        if args.command == "summarize":
            cmd_summarize(opts, out)
        elif args.command == "abx":
            cmd_abx(opts, out)
        elif args.command == "ned":
            cmd_ned(opts, out)
        else:
            cmd_experiment(opts, args.command, out)
    except ConfigError as err:
        print(f"lexdisc: configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (ManifestError, FrontendError, FileNotFoundError) as err:
        print(f"lexdisc: input error: {err}", file=sys.stderr)
        return EXIT_MANIFEST
    except InsufficientData as err:
        print(f"lexdisc: insufficient data: {err}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
