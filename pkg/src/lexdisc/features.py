"""Auditory front end: cube-root compressed mel filterbank frames.

Each word token becomes a sequence of 13-dimensional frames at 100 frames
per second: Hamming-windowed power spectra pooled by triangular filters
spaced on the mel scale between 100 and 6855 Hz, then cube-root compressed.
"""

from __future__ import annotations

import hashlib
import struct
import wave
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np


class FrontendError(ValueError):
    """Bad front-end configuration or unusable audio."""


@dataclass(frozen=True)
class FrontendConfig:
    n_filters: int = 13
    f_min_hz: float = 100.0
    f_max_hz: float = 6855.0
    hop_s: float = 0.010
    window_s: float = 0.025

    def __post_init__(self):
        if self.n_filters < 1:
            raise FrontendError("n_filters must be positive")
        if not 0 <= self.f_min_hz < self.f_max_hz:
            raise FrontendError(
                f"need 0 <= f_min < f_max, got {self.f_min_hz}, {self.f_max_hz}")
        if self.hop_s <= 0 or self.window_s <= 0:
            raise FrontendError("hop and window lengths must be positive")

    def window_samples(self, sample_rate: int) -> int:
        return int(round(self.window_s * sample_rate))

    def hop_samples(self, sample_rate: int) -> int:
        return int(round(self.hop_s * sample_rate))

    def fft_size(self, sample_rate: int) -> int:
        n = self.window_samples(sample_rate)
        return 1 << max(0, (n - 1).bit_length())

    def digest(self) -> str:
        text = ",".join(f"{k}={v!r}" for k, v in sorted(asdict(self).items()))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class FeatureSequence:
    token_id: str
    frames: np.ndarray  # (n_frames, n_filters), float64
    frame_rate_hz: float = 100.0

    def __post_init__(self):
        frames = np.ascontiguousarray(self.frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[0] < 1:
            raise ValueError(f"token {self.token_id!r}: frames must be a non-empty 2-D array")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    def __len__(self):
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def filter_edges(cfg: FrontendConfig) -> np.ndarray:
    """The ``n_filters + 2`` band edges in Hz, equally spaced in mel."""
    mels = np.linspace(hz_to_mel(cfg.f_min_hz), hz_to_mel(cfg.f_max_hz), cfg.n_filters + 2)
    edges = mel_to_hz(mels)
    edges[0], edges[-1] = cfg.f_min_hz, cfg.f_max_hz
    return edges


def make_filterbank(cfg: FrontendConfig, sample_rate: int, fft_size: int) -> np.ndarray:
    """Triangular mel filters as a ``(n_filters, fft_size // 2 + 1)`` matrix.

    Filter ``i`` rises linearly from edge ``i`` to a peak of 1 at edge
    ``i + 1`` and falls back to 0 at edge ``i + 2``; weights are the
    triangle evaluated at the FFT bin frequencies.
    """
    if sample_rate / 2 < cfg.f_max_hz:
        raise FrontendError(
            f"Nyquist frequency {sample_rate / 2} Hz is below f_max {cfg.f_max_hz} Hz")
    edges = filter_edges(cfg)
    freqs = np.arange(fft_size // 2 + 1) * (sample_rate / fft_size)
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs - lo) / (mid - lo)
    falling = (hi - freqs) / (hi - mid)
    fb = np.clip(np.minimum(rising, falling), 0.0, None)
    empty = np.flatnonzero(fb.max(axis=1) <= 0)
    if empty.size:
        raise FrontendError(
            f"filters {empty.tolist()} cover no FFT bin (fft_size={fft_size}, "
            f"sample_rate={sample_rate}); increase the window length")
    return fb


def frame_signal(signal: np.ndarray, win: int, hop: int) -> np.ndarray:
    """Split ``signal`` into overlapping frames, zero-padding short input to one frame."""
    if signal.shape[0] < win:
        signal = np.concatenate([signal, np.zeros(win - signal.shape[0])])
    n_frames = 1 + (signal.shape[0] - win) // hop
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    return signal[idx]


def featurize(audio, sample_rate: int, cfg: FrontendConfig | None = None,
              token_id: str = "") -> FeatureSequence:
    """Compressed filterbank frames for one mono PCM segment."""
    cfg = cfg or FrontendConfig()
    audio = np.asarray(audio, dtype=np.float64)
    if audio.ndim != 1:
        raise FrontendError(f"expected mono audio, got array of shape {audio.shape}")
    win = cfg.window_samples(sample_rate)
    hop = cfg.hop_samples(sample_rate)
    nfft = cfg.fft_size(sample_rate)
    fb = make_filterbank(cfg, sample_rate, nfft)
    frames = frame_signal(audio, win, hop) * np.hamming(win)
    power = np.abs(np.fft.rfft(frames, n=nfft, axis=1)) ** 2
    energies = power @ fb.T
    return FeatureSequence(token_id, np.cbrt(energies), 1.0 / cfg.hop_s)


_WIDTHS = {2: np.dtype("<i2"), 4: np.dtype("<i4")}


def read_wav(path, start_s: float | None = None, end_s: float | None = None):
    """Read a mono 16- or 32-bit PCM WAV file, optionally one interval of it.

    Returns ``(samples, sample_rate)`` with samples scaled to [-1, 1).
    """
    try:
        with wave.open(str(path), "rb") as fh:
            channels = fh.getnchannels()
            width = fh.getsampwidth()
            rate = fh.getframerate()
            n_total = fh.getnframes()
            if channels != 1:
                raise FrontendError(f"{path}: {channels} channels, only mono is supported")
            if width not in _WIDTHS:
                raise FrontendError(f"{path}: unsupported sample width {8 * width} bits")
            first = 0 if start_s is None else int(round(start_s * rate))
            last = n_total if end_s is None else int(round(end_s * rate))
            first, last = max(0, first), min(n_total, last)
            fh.setpos(min(first, n_total))
            raw = fh.readframes(max(0, last - first))
    except (wave.Error, EOFError) as err:
        raise FrontendError(f"{path}: not a PCM WAV file ({err})") from None
    samples = np.frombuffer(raw, dtype=_WIDTHS[width]).astype(np.float64)
    return samples / float(2 ** (8 * width - 1)), rate


def write_wav(path, samples, sample_rate: int) -> None:
    """Write float samples in [-1, 1] as 16-bit mono PCM."""
    pcm = np.clip(np.round(np.asarray(samples) * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(sample_rate)
        fh.writeframes(pcm.tobytes())


def featurize_token(token, cfg: FrontendConfig | None = None) -> FeatureSequence:
    """Read a token's interval from its audio file and featurize it."""
    cfg = cfg or FrontendConfig()
    samples, rate = read_wav(token.audio_path, token.start_s, token.end_s)
    if rate < 2 * cfg.f_max_hz:
        raise FrontendError(
            f"{token.audio_path}: sample rate {rate} Hz too low for f_max {cfg.f_max_hz} Hz")
    return featurize(samples, rate, cfg, token_id=token.token_id)


# On-disk feature records: 16-byte header then row-major little-endian float64.
FEATURE_MAGIC = b"LXFS"
FEATURE_VERSION = 1
_HEADER = struct.Struct("<4sIII")


def dump_features(seq: FeatureSequence) -> bytes:
    n, dim = seq.frames.shape
    header = _HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, dim, n)
    return header + seq.frames.astype("<f8").tobytes()


def load_features(data: bytes, token_id: str = "") -> FeatureSequence:
    if len(data) < _HEADER.size:
        raise ValueError("truncated feature record")
    magic, version, dim, n = _HEADER.unpack_from(data)
    if magic != FEATURE_MAGIC or version != FEATURE_VERSION:
        raise ValueError("not a feature record (bad magic or version)")
    body = data[_HEADER.size:]
    if len(body) != 8 * dim * n:
        raise ValueError(f"feature record holds {len(body)} bytes, expected {8 * dim * n}")
    frames = np.frombuffer(body, dtype="<f8").reshape(n, dim)
    return FeatureSequence(token_id, frames.astype(np.float64))


class FeatureCache:
    """Directory of feature records keyed by audio content, interval and config."""

    def __init__(self, root, cfg: FrontendConfig):
        self.root = Path(root) / cfg.digest()
        self.cfg = cfg
        self._file_hashes: dict[str, str] = {}

    def _file_hash(self, path: str) -> str:
        if path not in self._file_hashes:
            self._file_hashes[path] = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        return self._file_hashes[path]

    def key(self, token) -> str:
        text = f"{self._file_hash(token.audio_path)}|{token.start_s!r}|{token.end_s!r}"
        return hashlib.sha256(text.encode()).hexdigest()

    def get(self, token) -> FeatureSequence:
        path = self.root / f"{self.key(token)}.feat"
        if path.exists():
            return load_features(path.read_bytes(), token.token_id)
        seq = featurize_token(token, self.cfg)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(dump_features(seq))
        tmp.replace(path)
        return seq
