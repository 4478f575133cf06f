"""End-to-end register comparisons.

``run_exp1`` / ``run_control``
    Acoustic scores on the word types a speaker uses in both registers.
``run_exp2``
    Mean normalized edit distance on frequency-weighted lexicon samples
    matched in type count across registers.
``run_exp3``
    ABX discriminability on the same samples as ``run_exp2``.

Each run yields per-speaker :class:`MetricReport` rows and one
:class:`PairedComparison` per metric; :func:`write_outputs` serializes them.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from .corpus import (Lexicon, common_types, load_manifest, manifest_hash,
                     remove_onomatopoeia, sample_lexicons)
from .distance import DistanceTable, build_distance_table, read_table, save_table
from .features import FeatureCache, FrontendConfig, featurize_token
from .metrics import (EmptyResult, MetricReport, PairTable, abx_aggregate, abx_pairs,
                      mean_score, ned_pairs, sampled_metric, separation, variability)
from .stats import DegenerateInput, PairedComparison, compare

log = logging.getLogger(__name__)

EXPERIMENTS = ("exp1", "control", "exp2", "exp3")
DEFAULT_REGISTERS = {"exp1": ("ADS", "IDS"), "control": ("ADS", "RS"),
                     "exp2": ("ADS", "IDS"), "exp3": ("ADS", "IDS")}


class InsufficientData(RuntimeError):
    """Fewer than two speakers left for a paired comparison."""


@dataclass
class RunConfig:
    manifest: Path
    experiment: str = "exp1"
    registers: tuple[str, str] | None = None
    n_samples: int = 100
    seed: int = 0
    remove_onomatopoeia: bool = False
    output_dir: Path | None = None
    use_cache: bool = True
    frontend: FrontendConfig = field(default_factory=FrontendConfig)
    n_jobs: int = 1

    def __post_init__(self):
        self.manifest = Path(self.manifest)
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.registers is None:
            self.registers = DEFAULT_REGISTERS[self.experiment]
        self.registers = tuple(self.registers)
        if len(self.registers) != 2 or self.registers[0] == self.registers[1]:
            raise ValueError("exactly two distinct registers are compared")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.output_dir is not None:
            self.output_dir = Path(self.output_dir)

    def as_dict(self) -> dict:
        return {
            "manifest": str(self.manifest),
            "experiment": self.experiment,
            "registers": list(self.registers),
            "n_samples": self.n_samples,
            "seed": self.seed,
            "remove_onomatopoeia": self.remove_onomatopoeia,
            "frontend": {k: getattr(self.frontend, k) for k in
                         ("n_filters", "f_min_hz", "f_max_hz", "hop_s", "window_s")},
        }


@dataclass
class RunResult:
    config: RunConfig
    reports: list[MetricReport]
    rows: dict[str, list]  # metric -> [(speaker, score_x, score_y)]
    skipped: dict[str, list[str]]  # metric -> speakers left out
    comparisons: list[PairedComparison] = field(default_factory=list)


class Corpus:
    """Lexicons of one manifest plus cached features and distance tables."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.lexicons = {(lex.speaker_id, lex.register): lex
                         for lex in load_manifest(cfg.manifest)}
        self.manifest_hash = manifest_hash(cfg.manifest)
        self._tables: dict[tuple[str, str], DistanceTable] = {}
        cache_root = cfg.output_dir / "cache" if (cfg.output_dir and cfg.use_cache) else None
        self._cache_root = cache_root
        self._features = FeatureCache(cache_root / "features", cfg.frontend) if cache_root else None
        registers = {reg for _, reg in self.lexicons}
        missing = [r for r in cfg.registers if r not in registers]
        if missing:
            raise ValueError(f"register(s) {missing} not present in {cfg.manifest}")

    def speakers(self) -> list[str]:
        x, y = self.cfg.registers
        return sorted(s for s, r in self.lexicons if r == x and (s, y) in self.lexicons)

    def lexicon(self, speaker: str, register: str) -> Lexicon:
        return self.lexicons[(speaker, register)]

    def _table_path(self, lex: Lexicon) -> Path:
        ids = "\n".join(t.token_id for t in lex.tokens)
        key = hashlib.sha256(
            f"{self.manifest_hash}|{self.cfg.frontend.digest()}|{ids}".encode()).hexdigest()
        return self._cache_root / "distances" / f"{key[:32]}.dtab"

    def table(self, speaker: str, register: str) -> DistanceTable:
        """DTW distances between all tokens of one speaker-register lexicon."""
        if (speaker, register) in self._tables:
            return self._tables[(speaker, register)]
        lex = self.lexicon(speaker, register)
        path = self._table_path(lex) if self._cache_root else None
        if path is not None and path.exists():
            table = read_table(path)
        else:
            if self._features is not None:
                seqs = [self._features.get(t) for t in lex.tokens]
            else:
                seqs = [featurize_token(t, self.cfg.frontend) for t in lex.tokens]
            table = build_distance_table(seqs, n_jobs=self.cfg.n_jobs)
            if path is not None:
                save_table(table, path)
        self._tables[(speaker, register)] = table
        return table


def compare_registers(result: RunResult) -> RunResult:
    """Fill ``result.comparisons`` with one paired test per metric."""
    cfg = result.config
    x, y = cfg.registers
    seed = cfg.seed if cfg.experiment in ("exp2", "exp3") else None
    out = []
    for metric, rows in result.rows.items():
        if len(rows) < 2:
            raise InsufficientData(
                f"{metric}: only {len(rows)} usable speaker(s); a paired test needs 2")
        try:
            out.append(compare(metric, x, y, rows, seed=seed,
                               skipped=result.skipped.get(metric)))
        except DegenerateInput as err:
            raise InsufficientData(f"{metric}: {err}") from err
    result.comparisons = out
    return result


def score_exp1(cfg: RunConfig, corpus: Corpus | None = None) -> RunResult:
    """ABX, separation and variability on the types common to both registers.

    ABX is averaged over the type pairs that can be scored in both
    registers; variability over the types with two or more tokens in both.
    """
    corpus = corpus or Corpus(cfg)
    x, y = cfg.registers
    reports: list[MetricReport] = []
    per_metric: dict[str, list] = {"abx": [], "separation": [], "variability": []}
    skipped: dict[str, list[str]] = {m: [] for m in per_metric}
    for speaker in corpus.speakers():
        lx, ly = corpus.lexicon(speaker, x), corpus.lexicon(speaker, y)
        shared = sorted(common_types(lx, ly))
        if len(shared) < 2:
            log.info("speaker %s: fewer than two common types, skipped", speaker)
            for m in skipped:
                skipped[m].append(speaker)
            continue
        lexs = {x: lx.restrict(shared), y: ly.restrict(shared)}
        tables = {r: corpus.table(speaker, r) for r in (x, y)}

        pair_scores = {r: abx_pairs(lexs[r], tables[r])[0] for r in (x, y)}
        both = sorted(set(pair_scores[x]) & set(pair_scores[y]))
        if both:
            vals = {}
            for r in (x, y):
                detail = [pair_scores[r][k] for k in both]
                vals[r] = abx_aggregate(detail)
                reports.append(MetricReport(speaker, r, "abx", vals[r], len(both), detail=detail))
            per_metric["abx"].append((speaker, vals[x], vals[y]))
        else:
            skipped["abx"].append(speaker)

        vals = {}
        for r in (x, y):
            toks = {k: [t.token_id for t in wt.tokens] for k, wt in lexs[r].types.items()}
            detail = [separation(toks[a], toks[b], tables[r], a, b)
                      for i, a in enumerate(shared) for b in shared[i + 1:]]
            vals[r] = mean_score(detail)
            reports.append(MetricReport(speaker, r, "separation", vals[r], len(detail),
                                        detail=detail))
        per_metric["separation"].append((speaker, vals[x], vals[y]))

        usable = [k for k in shared
                  if lexs[x].types[k].token_count >= 2 and lexs[y].types[k].token_count >= 2]
        if usable:
            vals = {}
            for r in (x, y):
                detail = [(k, variability([t.token_id for t in lexs[r].types[k].tokens],
                                          tables[r])) for k in usable]
                vals[r] = math.fsum(v for _, v in detail) / len(detail)
                reports.append(MetricReport(speaker, r, "variability", vals[r], len(usable),
                                            detail=detail))
            per_metric["variability"].append((speaker, vals[x], vals[y]))
        else:
            skipped["variability"].append(speaker)
    return RunResult(cfg, reports, per_metric, skipped)


def run_exp1(cfg: RunConfig, corpus: Corpus | None = None) -> RunResult:
    return compare_registers(score_exp1(cfg, corpus))


def run_control(cfg: RunConfig, corpus: Corpus | None = None) -> RunResult:
    """Same computation as :func:`run_exp1`, by default on ADS versus RS."""
    return run_exp1(cfg, corpus)


def draw_samples(cfg: RunConfig, corpus: Corpus):
    """Type-matched samples per speaker: ``{speaker: {register: [SampledLexicon]}}``.

    Both registers are sampled down to the smaller type count; speakers
    whose target size is below two are returned in a separate list.
    """
    x, y = cfg.registers
    samples, skipped = {}, []
    for speaker in corpus.speakers():
        lexs = {r: corpus.lexicon(speaker, r) for r in (x, y)}
        if cfg.remove_onomatopoeia:
            lexs = {r: remove_onomatopoeia(lex) for r, lex in lexs.items()}
        target = min(len(lex) for lex in lexs.values())
        if target < 2:
            skipped.append(speaker)
            continue
        samples[speaker] = {r: sample_lexicons(lex, target, cfg.n_samples, cfg.seed)
                            for r, lex in lexs.items()}
    return samples, skipped


def _score_sampled(cfg, corpus, metric, pair_table_for) -> RunResult:
    x, y = cfg.registers
    samples, skipped = draw_samples(cfg, corpus)
    reports, rows = [], []
    for speaker, by_reg in samples.items():
        vals = {}
        for r in (x, y):
            table = pair_table_for(speaker, r)
            n_pairs = {}

            def score(sample, table=table, n_pairs=n_pairs):
                value, n_pairs[sample.sample_index] = table.mean_over(sample.type_keys)
                return value

            vals[r], per_sample = sampled_metric(by_reg[r], score)
            for s, value in zip(by_reg[r], per_sample):
                reports.append(MetricReport(speaker, r, metric, value, n_pairs[s.sample_index],
                                            seed=cfg.seed, sample_index=s.sample_index))
            reports.append(MetricReport(speaker, r, metric, vals[r], len(by_reg[r][0]),
                                        seed=cfg.seed))
        rows.append((speaker, vals[x], vals[y]))
    return RunResult(cfg, reports, {metric: rows}, {metric: skipped})


def score_exp2(cfg: RunConfig, corpus: Corpus | None = None) -> RunResult:
    corpus = corpus or Corpus(cfg)

    def ned_table(speaker, register):
        return PairTable(ned_pairs(corpus.lexicon(speaker, register).types))

    return _score_sampled(cfg, corpus, "ned", ned_table)


def score_exp3(cfg: RunConfig, corpus: Corpus | None = None) -> RunResult:
    corpus = corpus or Corpus(cfg)

    def abx_table(speaker, register):
        lex = corpus.lexicon(speaker, register)
        scores, _ = abx_pairs(lex, corpus.table(speaker, register))
        return PairTable({k: v.score for k, v in scores.items()})

    try:
        return _score_sampled(cfg, corpus, "abx", abx_table)
    except EmptyResult as err:
        raise InsufficientData(str(err)) from err


def run_exp2(cfg: RunConfig, corpus: Corpus | None = None) -> RunResult:
    """Mean normalized edit distance over matched lexicon samples."""
    return compare_registers(score_exp2(cfg, corpus))


def run_exp3(cfg: RunConfig, corpus: Corpus | None = None) -> RunResult:
    """ABX over the same matched samples as :func:`run_exp2`."""
    return compare_registers(score_exp3(cfg, corpus))


RUNNERS = {"exp1": run_exp1, "control": run_control, "exp2": run_exp2, "exp3": run_exp3}


def run(cfg: RunConfig, corpus: Corpus | None = None) -> RunResult:
    return RUNNERS[cfg.experiment](cfg, corpus)


REPORT_COLUMNS = ("speaker_id", "register", "metric", "value", "n_pairs_or_types",
                  "seed", "sample_index")


def reports_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in reports:
        writer.writerow([r.speaker_id, r.register, r.metric, repr(float(r.value)), r.n_items,
                         "" if r.seed is None else r.seed,
                         "" if r.sample_index is None else r.sample_index])
    return buf.getvalue()


def summary_json(comparisons) -> str:
    return json.dumps([c.to_dict() for c in comparisons], indent=2, sort_keys=True) + "\n"


def output_name(cfg: RunConfig) -> str:
    name = cfg.experiment
    if cfg.remove_onomatopoeia and cfg.experiment in ("exp2", "exp3"):
        name += "_no_onomatopoeia"
    return name


def write_outputs(result: RunResult, out_dir=None) -> Path:
    """Write ``scores.csv``, ``summary.json`` and ``run.json`` for one run."""
    cfg = result.config
    out_dir = Path(out_dir or cfg.output_dir) / output_name(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "scores.csv").write_text(reports_csv(result.reports), encoding="utf-8")
    (out_dir / "summary.json").write_text(summary_json(result.comparisons), encoding="utf-8")
    meta = {
        "config": cfg.as_dict(),
        "tool_version": __version__,
        "manifest_sha256": manifest_hash(cfg.manifest),
        "skipped_speakers": result.skipped,
    }
    (out_dir / "run.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                      encoding="utf-8")
    return out_dir


def with_experiment(cfg: RunConfig, experiment: str, **changes) -> RunConfig:
    """Copy of ``cfg`` retargeted at another experiment, keeping its registers."""
    return replace(cfg, experiment=experiment, **changes)
