import math
import wave

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lexdisc.corpus import TokenRecord
from lexdisc.features import (FeatureCache, FeatureSequence, FrontendConfig, FrontendError,
                              dump_features, featurize, featurize_token, filter_edges,
                              hz_to_mel, load_features, make_filterbank, mel_to_hz, read_wav,
                              write_wav)

SR = 16000


def tone(freq, seconds=0.3, phase=0.0, sr=SR):
    t = np.arange(int(seconds * sr)) / sr
    return np.sin(2 * np.pi * freq * t + phase)


def test_mel_values():
    assert hz_to_mel(0) == 0
    # 2595 * log10(1 + 700/700) = 2595 * log10(2)
    assert hz_to_mel(700) == pytest.approx(781.1728, abs=1e-4)
    assert hz_to_mel(700) == pytest.approx(2595 * math.log10(2), rel=1e-15)


@given(st.floats(0, 24000))
def test_mel_inverse(f):
    assert mel_to_hz(hz_to_mel(f)) == pytest.approx(f, rel=1e-9, abs=1e-9)


def test_mel_monotone():
    f = np.linspace(0, 8000, 1000)
    assert np.all(np.diff(hz_to_mel(f)) > 0)


def test_filterbank_shape_and_coverage():
    cfg = FrontendConfig()
    fb = make_filterbank(cfg, SR, 512)
    assert fb.shape == (13, 257)
    assert np.all(fb.max(axis=1) > 0)
    assert np.all(fb >= 0) and np.all(fb <= 1)


def test_filter_edges_equally_spaced_in_mel():
    edges = filter_edges(FrontendConfig())
    assert len(edges) == 15
    assert edges[0] == 100 and edges[-1] == 6855
    assert np.allclose(np.diff(hz_to_mel(edges)), (hz_to_mel(6855) - hz_to_mel(100)) / 14)
    assert np.all(np.diff(edges[1:-1]) > 0)


def test_filter_peaks_match_edge_formula():
    # oracle: centre i is mel-equally spaced point i+1 between mel(100) and mel(6855)
    lo, hi = 2595 * math.log10(1 + 100 / 700), 2595 * math.log10(1 + 6855 / 700)
    step = (hi - lo) / 14
    centres = [700 * (10 ** ((lo + (i + 1) * step) / 2595) - 1) for i in range(13)]
    fb = make_filterbank(FrontendConfig(), SR, 512)
    bin_hz = SR / 512
    for i, c in enumerate(centres):
        assert abs(np.argmax(fb[i]) - c / bin_hz) <= 1.0


def test_filterbank_nyquist_error():
    with pytest.raises(FrontendError, match="Nyquist"):
        make_filterbank(FrontendConfig(), 8000, 256)


def test_bad_config():
    with pytest.raises(FrontendError):
        FrontendConfig(f_min_hz=7000, f_max_hz=6855)
    with pytest.raises(FrontendError):
        FrontendConfig(hop_s=0)


def test_one_second_gives_98_frames():
    # floor((16000 - 400) / 160) + 1 = 98
    seq = featurize(np.random.default_rng(0).standard_normal(SR), SR)
    assert seq.frames.shape == (98, 13)
    assert seq.frame_rate_hz == pytest.approx(100)


def test_short_token_padded_to_one_frame():
    seq = featurize(tone(1000, 0.01), SR)
    assert len(seq) == 1
    assert np.all(seq.frames > 0)


def test_silence_gives_zero_frames():
    seq = featurize(np.zeros(4000), SR)
    assert np.all(seq.frames == 0)


def test_features_non_negative():
    seq = featurize(np.random.default_rng(1).standard_normal(5000), SR)
    assert np.all(seq.frames >= 0) and seq.dim == 13


@pytest.mark.parametrize("c", [0.01, 0.5, 3.0, 1000.0])
def test_scale_covariance(c):
    x = np.random.default_rng(2).standard_normal(8000)
    base = featurize(x, SR).frames
    scaled = featurize(c * x, SR).frames
    np.testing.assert_allclose(scaled, c ** (2 / 3) * base, rtol=1e-6)


def test_tone_peaks_in_covering_filter():
    edges = filter_edges(FrontendConfig())
    covering = {i for i in range(13) if edges[i] < 1000 < edges[i + 2]}
    peaks = set()
    for phase in np.random.default_rng(3).uniform(0, 2 * np.pi, 8):
        seq = featurize(tone(1000, phase=phase), SR)
        peaks |= set(np.argmax(seq.frames, axis=1).tolist())
    assert len(peaks) == 1 and peaks <= covering


def test_hop_shift_permutes_frames():
    x = np.random.default_rng(4).standard_normal(6000)
    shifted = np.concatenate([np.zeros(3 * 160), x])
    a = featurize(x, SR).frames
    b = featurize(shifted, SR).frames
    np.testing.assert_array_equal(b[3:3 + len(a)], a)


def test_feature_record_roundtrip():
    seq = featurize(tone(440), SR, token_id="t1")
    blob = dump_features(seq)
    assert len(blob) == 16 + 8 * seq.frames.size
    assert blob[:4] == b"LXFS"
    back = load_features(blob, "t1")
    np.testing.assert_array_equal(back.frames, seq.frames)
    with pytest.raises(ValueError):
        load_features(blob[:-8])


def test_feature_sequence_validation():
    with pytest.raises(ValueError):
        FeatureSequence("t", np.zeros((0, 13)))


def test_wav_roundtrip_and_interval(tmp_path):
    x = 0.5 * tone(300, 1.0)
    path = tmp_path / "a.wav"
    write_wav(path, x, SR)
    y, rate = read_wav(path)
    assert rate == SR and y.shape == x.shape
    np.testing.assert_allclose(y, x, atol=1 / 32767)
    part, _ = read_wav(path, 0.25, 0.5)
    assert part.shape == (4000,)
    np.testing.assert_array_equal(part, y[4000:8000])


def test_stereo_rejected(tmp_path):
    path = tmp_path / "stereo.wav"
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(2)
        fh.setsampwidth(2)
        fh.setframerate(SR)
        fh.writeframes(np.zeros(200, dtype="<i2").tobytes())
    with pytest.raises(FrontendError, match="mono"):
        read_wav(path)


def test_non_wav_rejected(tmp_path):
    path = tmp_path / "x.wav"
    path.write_bytes(b"ID3 not a wave file at all")
    with pytest.raises(FrontendError):
        read_wav(path)


def test_low_sample_rate_rejected(tmp_path):
    path = tmp_path / "low.wav"
    write_wav(path, tone(300, 0.5, sr=8000), 8000)
    tok = TokenRecord("t", "s", "ADS", "a", str(path), 0.0, 0.3)
    with pytest.raises(FrontendError, match="sample rate"):
        featurize_token(tok)


def test_feature_cache(tmp_path):
    path = tmp_path / "a.wav"
    write_wav(path, 0.3 * tone(500, 1.0), SR)
    tok = TokenRecord("t", "s", "ADS", "a", str(path), 0.1, 0.6)
    cache = FeatureCache(tmp_path / "cache", FrontendConfig())
    first = cache.get(tok)
    assert len(list((tmp_path / "cache").rglob("*.feat"))) == 1
    second = FeatureCache(tmp_path / "cache", FrontendConfig()).get(tok)
    np.testing.assert_array_equal(first.frames, second.frames)
    np.testing.assert_array_equal(first.frames, featurize_token(tok).frames)
