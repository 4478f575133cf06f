"""
Mel filterbank front end
========================

Turn a waveform into a sequence of 13-dimensional frames and look at how
the frames respond to a pure tone and to a change of loudness.
"""

import numpy as np

from lexdisc.features import FrontendConfig, featurize, filter_edges

sr = 16000
cfg = FrontendConfig()
print("window", cfg.window_samples(sr), "samples, hop", cfg.hop_samples(sr),
      "samples, FFT", cfg.fft_size(sr))

# filter corner frequencies, equally spaced on the mel scale
edges = filter_edges(cfg)
print("edges (Hz):", np.round(edges).astype(int))

# one second of a 1 kHz tone
t = np.arange(sr) / sr
tone = np.sin(2 * np.pi * 1000 * t)
seq = featurize(tone, sr)
print("frames:", seq.frames.shape)

# the energy sits in the filters whose band covers 1 kHz
print("mean frame:", np.round(seq.frames.mean(axis=0), 3))
print("loudest filter:", int(np.argmax(seq.frames.mean(axis=0))))

# cube-root compression: doubling the amplitude scales features by 2^(2/3)
louder = featurize(2 * tone, sr)
print("ratio:", float(np.median(louder.frames / seq.frames)), "expected", 2 ** (2 / 3))
