"""Synthetic speech corpora with controlled category geometry.

Words are strings of pseudo-phonemes.  Each phoneme is rendered as a short
mixture of sinusoids at phoneme-specific frequencies; every token draws its
own segment durations, frequency deviations and phases.  A register can add
extra per-token jitter on top of the shared draws, which widens its word
categories without changing anything else.  That is how register differences
in within-category variability are simulated.

Onomatopoeic words are reduplicated forms built from a separate phoneme
inventory and are flagged in the manifest.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import MANIFEST_COLUMNS
from .features import write_wav

SAMPLE_RATE = 16000

CONSONANTS = "p t k b d g m n s z r h".split()
VOWELS = "a i u e o".split()
ONO_CONSONANTS = "w j f c x N".split()
ONO_VOWELS = "a: o: e:".split()

# vowel formants in Hz (F1, F2, F3)
_VOWEL_FORMANTS = {
    "a": (800, 1300, 2600), "i": (300, 2300, 3000), "u": (350, 1300, 2400),
    "e": (500, 1900, 2700), "o": (500, 900, 2500),
    "a:": (750, 1150, 3300), "o:": (450, 750, 3600), "e:": (600, 2100, 3900),
}


def _consonant_table() -> dict[str, tuple[float, ...]]:
    rng = np.random.default_rng(20240611)
    table = {}
    for c in CONSONANTS + ONO_CONSONANTS:
        table[c] = tuple(np.sort(rng.uniform(250, 6200, size=3)).round())
    return table


PHONEME_FREQS = {**_consonant_table(), **_VOWEL_FORMANTS}


def core_word(rng) -> str:
    """Random CV word of two or three syllables."""
    n_syll = int(rng.integers(2, 4))
    phones = []
    for _ in range(n_syll):
        phones += [CONSONANTS[rng.integers(len(CONSONANTS))], VOWELS[rng.integers(len(VOWELS))]]
    return " ".join(phones)


def onomatopoeic_word(rng) -> str:
    """Reduplicated word from the onomatopoeia inventory, e.g. ``w a: N w a: N``."""
    unit = [ONO_CONSONANTS[rng.integers(len(ONO_CONSONANTS))],
            ONO_VOWELS[rng.integers(len(ONO_VOWELS))]]
    if rng.random() < 0.5:
        unit += [ONO_CONSONANTS[rng.integers(len(ONO_CONSONANTS))],
                 ONO_VOWELS[rng.integers(len(ONO_VOWELS))]]
    return " ".join(unit + unit)


def _distinct_words(make, n, rng, taken) -> list[str]:
    words = []
    while len(words) < n:
        w = make(rng)
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


@dataclass
class TokenDraw:
    """Standard-normal draws shared by registers that render the same token."""
    dur: np.ndarray
    freq: np.ndarray
    phase: np.ndarray
    gain: float

    @classmethod
    def new(cls, n_phones, rng):
        return cls(rng.standard_normal(n_phones), rng.standard_normal((n_phones, 3)),
                   rng.uniform(0, 2 * np.pi, (n_phones, 3)), float(rng.uniform(0.5, 1.0)))


def render_token(phones, draw: TokenDraw, speaker_scale: float, jitter: float,
                 extra: float, rng, noise: float = 0.003) -> np.ndarray:
    """Waveform of one token.

    ``jitter`` scales the shared draws, ``extra`` adds fresh per-token
    deviations (log-scale) on top of them.
    """
    pieces = []
    for k, ph in enumerate(phones):
        base_dur = 0.09 if ph in _VOWEL_FORMANTS else 0.06
        dur_dev = jitter * draw.dur[k] + extra * rng.standard_normal()
        freq_dev = jitter * draw.freq[k] + extra * rng.standard_normal(3)
        n = max(16, int(round(base_dur * np.exp(dur_dev) * SAMPLE_RATE)))
        t = np.arange(n) / SAMPLE_RATE
        freqs = np.asarray(PHONEME_FREQS[ph]) * speaker_scale * np.exp(freq_dev)
        seg = sum(np.sin(2 * np.pi * f * t + p) / (i + 1)
                  for i, (f, p) in enumerate(zip(freqs, draw.phase[k])))
        ramp = min(80, n // 4)
        env = np.ones(n)
        env[:ramp] = np.linspace(0, 1, ramp)
        env[n - ramp:] = np.linspace(1, 0, ramp)
        pieces.append(seg * env)
    wave = np.concatenate(pieces) * 0.2 * draw.gain
    return wave + noise * rng.standard_normal(wave.size)


@dataclass
class FixtureSpec:
    """Layout of a synthetic two-register corpus.

    ``extra_jitter`` maps a register to the additional per-token deviation
    applied on top of the shared token draws.  Shared types are rendered in
    both registers from the same draws, so the second register's tokens are
    the first register's tokens plus that register's perturbation.
    """
    registers: tuple[str, str] = ("ADS", "IDS")
    n_speakers: int = 10
    n_shared: int = 20
    n_x_only: int = 0
    n_y_only: int = 0
    n_onomatopoeia: int = 0  # extra flagged types in the second register
    tokens_per_type: tuple[int, int] = (3, 5)
    jitter: float = 0.2
    extra_jitter: dict = field(default_factory=lambda: {"ADS": 0.0, "IDS": 0.15})
    n_excluded: int = 1  # excluded tokens per speaker-register
    seed: int = 0


def make_fixture(out_dir, spec: FixtureSpec | None = None) -> Path:
    """Write WAV files and a manifest for ``spec`` under ``out_dir``.

    Returns the manifest path.  Output depends only on ``spec``.
    """
    spec = spec or FixtureSpec()
    out_dir = Path(out_dir)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    rx, ry = spec.registers
    rows = []
    master = np.random.default_rng(spec.seed)
    for s in range(spec.n_speakers):
        speaker = f"spk{s:02d}"
        rng = np.random.default_rng(master.integers(2 ** 63))
        scale = float(np.exp(rng.normal(0, 0.05)))
        taken: set[str] = set()
        shared = _distinct_words(core_word, spec.n_shared, rng, taken)
        x_only = _distinct_words(core_word, spec.n_x_only, rng, taken)
        y_only = _distinct_words(core_word, spec.n_y_only, rng, taken)
        ono = _distinct_words(onomatopoeic_word, spec.n_onomatopoeia, rng, taken)
        plan = {rx: [(w, False) for w in shared + x_only],
                ry: [(w, False) for w in shared + y_only] + [(w, True) for w in ono]}
        lo, hi = spec.tokens_per_type
        # shared draws per (word, token slot) so both registers render the same token
        draws: dict[tuple[str, int], TokenDraw] = {}
        counts = {}
        for reg in (rx, ry):
            for w, _ in plan[reg]:
                counts[(reg, w)] = int(rng.integers(lo, hi + 1))
        for reg in (rx, ry):
            reg_rng = np.random.default_rng(rng.integers(2 ** 63))
            extra = spec.extra_jitter.get(reg, 0.0)
            signal, cursor = [np.zeros(800)], 800
            n_tok = 0
            entries = [(w, ono_flag, i) for w, ono_flag in plan[reg]
                       for i in range(counts[(reg, w)])]
            excluded = set(range(min(spec.n_excluded, len(entries))))
            for w, ono_flag, i in entries:
                phones = w.split()
                if (w, i) not in draws:
                    draws[(w, i)] = TokenDraw.new(len(phones), rng)
                wav = render_token(phones, draws[(w, i)], scale, spec.jitter, extra, reg_rng)
                start = cursor / SAMPLE_RATE
                signal.append(wav)
                cursor += wav.size
                end = cursor / SAMPLE_RATE
                gap = 800
                signal.append(np.zeros(gap))
                cursor += gap
                rows.append({
                    "token_id": f"{speaker}_{reg}_{n_tok:04d}",
                    "speaker_id": speaker,
                    "register": reg,
                    "type_key": w,
                    "audio_path": f"audio/{speaker}_{reg}.wav",
                    "start_s": f"{start:.6f}",
                    "end_s": f"{end:.6f}",
                    "onomatopoeia": int(ono_flag),
                    "exclude": int(n_tok in excluded),
                })
                n_tok += 1
            write_wav(audio_dir / f"{speaker}_{reg}.wav", np.concatenate(signal), SAMPLE_RATE)
    manifest = out_dir / "manifest.csv"
    write_manifest(manifest, rows)
    return manifest


def write_manifest(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
