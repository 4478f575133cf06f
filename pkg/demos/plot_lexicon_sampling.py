"""
Phonological density and matched lexicon samples
================================================

Mean normalized edit distance (NED) says how far apart the words of a
lexicon are. Lexicons of different size are compared on samples of equal
type count, drawn with probability proportional to token frequency.
"""

import numpy as np

from lexdisc.corpus import Lexicon, TokenRecord, WordType, sample_lexicons
from lexdisc.metrics import mean_ned, ned

print("NED(t O l, b O l) =", ned("t O l", "b O l"))

# a lexicon of minimal pairs is dense, one of unrelated words is sparse
print("minimal pairs:", mean_ned(["p a t", "b a t", "k a t", "m a t"]))
print("unrelated:", mean_ned(["p a t", "o k i", "s u m e", "r i"]))


def lexicon(register, counts):
    types = {}
    for key, n in counts.items():
        toks = tuple(TokenRecord(f"{register}-{key}-{i}", "spk", register, key, "x.wav",
                                 float(i), i + 0.5) for i in range(n))
        types[key] = WordType(key, toks)
    return Lexicon("spk", register, types)


rng = np.random.default_rng(1)
words = ["k a t a", "k a s a", "t a k a", "s a k a", "m o r i", "h o n e", "p i k a",
         "w a N w a N", "b u u b u u", "k o r o k o r o"]
big = lexicon("IDS", {w: int(rng.integers(1, 9)) for w in words})
small = lexicon("ADS", {w: int(rng.integers(1, 9)) for w in words[:6]})

# both registers are brought down to the smaller type count
target = min(len(big), len(small))
samples = sample_lexicons(big, target, 100, seed=7)
print("sample 0:", sorted(samples[0].type_keys))

values = [mean_ned(s.type_keys) for s in samples]
print("IDS sampled NED: %.4f +- %.4f" % (np.mean(values), np.std(values)))
print("ADS NED: %.4f" % mean_ned(small.types))
