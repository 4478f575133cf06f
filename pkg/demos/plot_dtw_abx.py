"""
DTW distances and ABX discriminability
======================================

Synthesize tokens of two word types, compare them with dynamic time
warping and ask how often a token is closer to its own type than to the
other one.
"""

import numpy as np

from lexdisc.distance import build_distance_table, dtw_distance
from lexdisc.features import featurize
from lexdisc.metrics import abx_pair, medoids, separation, variability
from lexdisc.synth import TokenDraw, render_token

rng = np.random.default_rng(0)
sr = 16000


def tokens(word, n, jitter):
    out = []
    for i in range(n):
        audio = render_token(word.split(), TokenDraw.new(len(word.split()), rng), 1.0, jitter,
                             0.0, rng)
        out.append(featurize(audio, sr, token_id=f"{word}/{i}"))
    return out


cats = tokens("n e k o", 5, 0.2)
dogs = tokens("i n u", 5, 0.2)

# a distance between two sequences of different length
print("cat vs cat:", dtw_distance(cats[0], cats[1]))
print("cat vs dog:", dtw_distance(cats[0], dogs[0]))

table = build_distance_table(cats + dogs)
A = [s.token_id for s in cats]
B = [s.token_id for s in dogs]

score = abx_pair(A, B, table, "n e k o", "i n u")
print("ABX:", score.score, "over", score.count, "triplets")

# medoids, the distance between them, and the spread within each type
print("medoids:", medoids(A, table), medoids(B, table))
print("separation:", separation(A, B, table).score)
print("variability:", variability(A, table), variability(B, table))

# more jitter blurs the categories
noisy = tokens("n e k o", 5, 0.6) + tokens("i n u", 5, 0.6)
t2 = build_distance_table(noisy)
ids = t2.token_ids
print("noisy ABX:", abx_pair(ids[:5], ids[5:], t2).score)
