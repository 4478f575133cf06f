"""Corpus manifests, per-speaker lexicons and frequency-weighted sampling.

A manifest is a comma-separated table with one row per word token::

    token_id,speaker_id,register,type_key,audio_path,start_s,end_s,onomatopoeia,exclude

``type_key`` holds the phonemes of the word separated by single spaces.
Tokens sharing a phoneme string are homophones and end up in the same
:class:`WordType`.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

MANIFEST_COLUMNS = (
    "token_id",
    "speaker_id",
    "register",
    "type_key",
    "audio_path",
    "start_s",
    "end_s",
    "onomatopoeia",
    "exclude",
)


class ManifestError(ValueError):
    """Raised when a manifest cannot be loaded."""


@dataclass(frozen=True)
class TokenRecord:
    token_id: str
    speaker_id: str
    register: str
    type_key: str
    audio_path: str
    start_s: float
    end_s: float
    onomatopoeia: bool = False
    exclude: bool = False

    @property
    def duration(self) -> float:
        return self.end_s - self.start_s

    @property
    def phonemes(self) -> tuple[str, ...]:
        return tuple(self.type_key.split(" "))


@dataclass(frozen=True)
class WordType:
    type_key: str
    tokens: tuple[TokenRecord, ...]
    onomatopoeia: bool = False

    @property
    def token_count(self) -> int:
        return len(self.tokens)

    @property
    def phonemes(self) -> tuple[str, ...]:
        return tuple(self.type_key.split(" "))


@dataclass(frozen=True)
class Lexicon:
    speaker_id: str
    register: str
    types: Mapping[str, WordType] = field(default_factory=dict)

    def __post_init__(self):
        # sorted, read-only view so iteration order never depends on input order
        ordered = {k: self.types[k] for k in sorted(self.types)}
        object.__setattr__(self, "types", MappingProxyType(ordered))

    def __len__(self):
        return len(self.types)

    @property
    def tokens(self) -> list[TokenRecord]:
        return [tok for wt in self.types.values() for tok in wt.tokens]

    @property
    def token_count(self) -> int:
        return sum(wt.token_count for wt in self.types.values())

    def restrict(self, type_keys) -> "Lexicon":
        """Sub-lexicon holding only ``type_keys`` (which must all exist)."""
        missing = set(type_keys) - set(self.types)
        if missing:
            raise KeyError(f"types not in lexicon: {sorted(missing)}")
        return Lexicon(self.speaker_id, self.register,
                       {k: self.types[k] for k in type_keys})


@dataclass(frozen=True)
class SampledLexicon:
    parent: Lexicon
    sample_index: int
    seed: int
    type_keys: frozenset

    def __len__(self):
        return len(self.type_keys)

    def as_lexicon(self) -> Lexicon:
        return self.parent.restrict(self.type_keys)


def _parse_bool(value: str, column: str, lineno: int) -> bool:
    value = value.strip()
    if value == "1":
        return True
    if value == "0":
        return False
    raise ManifestError(f"row {lineno}: column {column!r} must be 0 or 1, got {value!r}")


def _parse_row(row: dict, lineno: int) -> TokenRecord:
    try:
        start = float(row["start_s"])
        end = float(row["end_s"])
    except ValueError:
        raise ManifestError(f"row {lineno}: start_s/end_s are not decimal numbers") from None
    if not (start >= 0 and end > start):
        raise ManifestError(
            f"row {lineno}: malformed interval start_s={start} end_s={end} "
            f"(token {row['token_id']!r})")
    type_key = " ".join(row["type_key"].split())
    if not type_key:
        raise ManifestError(f"row {lineno}: empty type_key")
    return TokenRecord(
        token_id=row["token_id"].strip(),
        speaker_id=row["speaker_id"].strip(),
        register=row["register"].strip(),
        type_key=type_key,
        audio_path=row["audio_path"].strip(),
        start_s=start,
        end_s=end,
        onomatopoeia=_parse_bool(row["onomatopoeia"], "onomatopoeia", lineno),
        exclude=_parse_bool(row["exclude"], "exclude", lineno),
    )


def read_manifest(path) -> list[TokenRecord]:
    """Parse and validate every row of a manifest, excluded rows included.

    Relative ``audio_path`` values are resolved against the manifest's
    directory.
    """
    path = Path(path)
    base = path.parent
    records: list[TokenRecord] = []
    seen: dict[str, int] = {}
    flags: dict[tuple[str, str, str], tuple[bool, int]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, skipinitialspace=True)
        header = [c.strip() for c in (reader.fieldnames or [])]
        missing = [c for c in MANIFEST_COLUMNS if c not in header]
        if missing:
            raise ManifestError(f"{path}: missing column(s) {', '.join(missing)}")
        reader.fieldnames = header
        for lineno, row in enumerate(reader, start=2):
            if None in row.values():
                raise ManifestError(f"row {lineno}: expected {len(header)} fields")
            rec = _parse_row(row, lineno)
            if rec.token_id in seen:
                raise ManifestError(
                    f"row {lineno}: duplicate token_id {rec.token_id!r} "
                    f"(first seen at row {seen[rec.token_id]})")
            seen[rec.token_id] = lineno
            key = (rec.speaker_id, rec.register, rec.type_key)
            if key in flags and flags[key][0] != rec.onomatopoeia:
                raise ManifestError(
                    f"row {lineno}: inconsistent onomatopoeia flag for type "
                    f"{rec.type_key!r} (row {flags[key][1]} disagrees)")
            flags.setdefault(key, (rec.onomatopoeia, lineno))
            audio = Path(rec.audio_path)
            if not audio.is_absolute():
                rec = _replace_audio(rec, str(base / audio))
            records.append(rec)
    return records


def _replace_audio(rec: TokenRecord, audio_path: str) -> TokenRecord:
    return TokenRecord(rec.token_id, rec.speaker_id, rec.register, rec.type_key,
                       audio_path, rec.start_s, rec.end_s, rec.onomatopoeia, rec.exclude)


def build_lexicons(records) -> list[Lexicon]:
    """Group non-excluded token records into one lexicon per (speaker, register)."""
    groups: dict[tuple[str, str], dict[str, list[TokenRecord]]] = {}
    for rec in records:
        if rec.exclude:
            continue
        by_type = groups.setdefault((rec.speaker_id, rec.register), {})
        by_type.setdefault(rec.type_key, []).append(rec)
    lexicons = []
    for (speaker, register) in sorted(groups):
        types = {
            key: WordType(key, tuple(toks), toks[0].onomatopoeia)
            for key, toks in groups[(speaker, register)].items()
        }
        lexicons.append(Lexicon(speaker, register, types))
    return lexicons


def load_manifest(path) -> list[Lexicon]:
    """Load a manifest into lexicons sorted by speaker then register."""
    return build_lexicons(read_manifest(path))


def manifest_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def common_types(a: Lexicon, b: Lexicon) -> set[str]:
    """Word types present in both lexicons of the same speaker."""
    if a.speaker_id != b.speaker_id:
        raise ValueError(
            f"lexicons belong to different speakers ({a.speaker_id!r}, {b.speaker_id!r})")
    return set(a.types) & set(b.types)


def remove_onomatopoeia(lex: Lexicon) -> Lexicon:
    return Lexicon(lex.speaker_id, lex.register,
                   {k: wt for k, wt in lex.types.items() if not wt.onomatopoeia})


def _label_words(label: str) -> list[int]:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


def sample_stream(seed: int, speaker_id: str, register: str, sample_index: int):
    """Random generator for one sample of one speaker-register lexicon.

    PCG64 seeded from ``(seed, hash(speaker), hash(register), sample_index)``
    so each sample can be regenerated on its own.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    entropy = [seed & 0xFFFFFFFF, seed >> 32 & 0xFFFFFFFF]
    entropy += _label_words(speaker_id) + _label_words(register) + [int(sample_index)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def weighted_draw(keys, weights, k: int, rng) -> list:
    """Draw ``k`` distinct keys by successive draws proportional to ``weights``.

    After each draw the chosen key is removed and the remaining weights are
    renormalized.  Weights are integers so the cumulative sums are exact.
    """
    keys = list(keys)
    weights = [int(w) for w in weights]
    if any(w <= 0 for w in weights):
        raise ValueError("weights must be positive")
    if not 0 <= k <= len(keys):
        raise ValueError(f"cannot draw {k} items from {len(keys)}")
    chosen = []
    for _ in range(k):
        cum = np.cumsum(weights)
        u = rng.random() * cum[-1]
        idx = int(np.searchsorted(cum, u, side="right"))
        chosen.append(keys.pop(idx))
        weights.pop(idx)
    return chosen


def sample_lexicons(lex: Lexicon, target_size: int, n_samples: int,
                    seed: int) -> list[SampledLexicon]:
    """Frequency-weighted type samples of ``lex``, each of ``target_size`` types.

    A type's chance of being drawn is proportional to its token count.
    Sample ``i`` depends only on ``(seed, speaker, register, i)``.
    """
    n_types = len(lex.types)
    if not 1 <= target_size <= n_types:
        raise ValueError(
            f"target_size {target_size} outside [1, {n_types}] for "
            f"{lex.speaker_id}/{lex.register}")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    keys = list(lex.types)
    weights = [lex.types[k].token_count for k in keys]
    samples = []
    for i in range(n_samples):
        if target_size == n_types:
            drawn = keys
        else:
            rng = sample_stream(seed, lex.speaker_id, lex.register, i)
            drawn = weighted_draw(keys, weights, target_size, rng)
        samples.append(SampledLexicon(lex, i, seed, frozenset(drawn)))
    return samples


@dataclass(frozen=True)
class RegisterSummary:
    register: str
    duration_s: float
    n_types: int
    n_tokens: int


def summarize_corpus(lexicons) -> list[RegisterSummary]:
    """Duration, type and token totals per register, pooled over speakers.

    Types are counted as distinct phoneme strings across all speakers.
    """
    by_register: dict[str, list[Lexicon]] = {}
    for lex in lexicons:
        by_register.setdefault(lex.register, []).append(lex)
    rows = []
    for register in sorted(by_register):
        lexs = by_register[register]
        tokens = [tok for lex in lexs for tok in lex.tokens]
        if not tokens:
            continue
        duration = float(sum(tok.duration for tok in tokens))
        types = {k for lex in lexs for k in lex.types}
        rows.append(RegisterSummary(register, duration, len(types), len(tokens)))
    return rows
