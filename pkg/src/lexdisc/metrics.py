"""Category-structure scores over a distance table or a set of word forms.

Acoustic scores (ABX discriminability, medoid separation, within-type
variability) read token distances from a :class:`DistanceTable`.  The
phonological score is the mean normalized edit distance between the
phoneme strings of a lexicon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .distance import DistanceTable


class InsufficientTokens(ValueError):
    """A category has too few tokens for the requested score."""


class EmptyResult(ValueError):
    """Nothing was left to aggregate."""


@dataclass(frozen=True)
class PairScore:
    type_a: str
    type_b: str
    score: float
    count: int  # triplets for ABX, medoid pairs for separation

    @property
    def key(self) -> tuple[str, str]:
        return tuple(sorted((self.type_a, self.type_b)))


@dataclass
class MetricReport:
    speaker_id: str
    register: str
    metric: str
    value: float
    n_items: int
    seed: int | None = None
    sample_index: int | None = None
    detail: list = field(default_factory=list, repr=False)


def _mean(values) -> float:
    values = list(values)
    if not values:
        raise EmptyResult("mean of an empty collection")
    return math.fsum(values) / len(values)


def _triplet_counts(D, ia, ib) -> tuple[int, int, int]:
    # x and a range over ia (x != a), b over ib; compare d(a, x) with d(b, x)
    same = D[np.ix_(ia, ia)]
    other = D[np.ix_(ia, ib)]
    valid = ~np.eye(len(ia), dtype=bool)[:, :, None]
    s = same[:, :, None]
    o = other[:, None, :]
    wins = int(np.count_nonzero((s < o) & valid))
    ties = int(np.count_nonzero((s == o) & valid))
    total = len(ia) * (len(ia) - 1) * len(ib)
    return wins, ties, total


def abx_pair(A, B, d: DistanceTable, type_a: str = "A", type_b: str = "B") -> PairScore:
    """ABX discriminability of two token categories.

    Every triplet takes ``x`` and ``a`` from one category (``x != a``) and
    ``b`` from the other, in both directions.  A triplet scores 1 when
    ``d(a, x) < d(b, x)``, 0 when greater, 0.5 on an exact tie.
    """
    A, B = list(A), list(B)
    if set(A) & set(B):
        raise ValueError("categories share tokens")
    if not A or not B:
        raise InsufficientTokens("empty category")
    if len(A) < 2 and len(B) < 2:
        raise InsufficientTokens(f"{type_a!r} and {type_b!r} both have a single token")
    ia, ib = d.indices(A), d.indices(B)
    w1, t1, n1 = _triplet_counts(d.values, ia, ib)
    w2, t2, n2 = _triplet_counts(d.values, ib, ia)
    n = n1 + n2
    return PairScore(type_a, type_b, (w1 + w2 + 0.5 * (t1 + t2)) / n, n)


def mean_score(pairs) -> float:
    """Unweighted mean of pair scores, whatever their triplet counts."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyResult("no scored pairs")
    return _mean(p.score for p in pairs)


abx_aggregate = mean_score


def _type_tokens(lexicon) -> dict[str, list[str]]:
    return {k: [t.token_id for t in wt.tokens] for k, wt in lexicon.types.items()}


def abx_pairs(lexicon, d: DistanceTable, type_keys=None):
    """Score every unordered pair of types of ``lexicon``.

    Returns ``(scores, skipped)``: ``scores`` maps sorted type-key pairs to
    :class:`PairScore`; ``skipped`` lists pairs where both types have one
    token.
    """
    tokens = _type_tokens(lexicon)
    keys = sorted(tokens if type_keys is None else type_keys)
    scores, skipped = {}, []
    for a, b in combinations(keys, 2):
        try:
            scores[(a, b)] = abx_pair(tokens[a], tokens[b], d, a, b)
        except InsufficientTokens:
            skipped.append((a, b))
    return scores, skipped


def medoids(A, d: DistanceTable) -> list[str]:
    """Tokens with the smallest mean distance to the rest of ``A`` (all ties kept)."""
    A = list(A)
    if not A:
        raise InsufficientTokens("empty category")
    if len(A) == 1:
        return A
    block = d.block(A, A)
    sums = [math.fsum(row) for row in block]
    best = min(sums)
    return [tok for tok, s in zip(A, sums) if s == best]


def separation(A, B, d: DistanceTable, type_a: str = "A", type_b: str = "B") -> PairScore:
    """Mean distance between the medoids of two categories."""
    ma, mb = medoids(A, d), medoids(B, d)
    dists = d.block(ma, mb).ravel()
    return PairScore(type_a, type_b, _mean(dists), dists.size)


def variability(A, d: DistanceTable) -> float:
    """Mean distance over all unordered token pairs within one category."""
    A = list(A)
    if len(A) < 2:
        raise InsufficientTokens("variability needs at least two tokens")
    block = d.block(A, A)
    rows, cols = np.triu_indices(len(A), k=1)
    return _mean(block[rows, cols])


def _symbols(x) -> tuple:
    if isinstance(x, str):
        return tuple(x.split())
    return tuple(x)


def edit_distance(x, y) -> int:
    """Levenshtein distance between two phoneme sequences, unit costs.

    Strings are split on whitespace, so ``"t O l"`` is three symbols.
    """
    x, y = _symbols(x), _symbols(y)
    if len(x) < len(y):
        x, y = y, x
    prev = list(range(len(y) + 1))
    for i, xs in enumerate(x, start=1):
        cur = [i]
        for j, ys in enumerate(y, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (xs != ys)))
        prev = cur
    return prev[-1]


def ned(x, y) -> float:
    """Edit distance divided by the length of the longer sequence."""
    x, y = _symbols(x), _symbols(y)
    longest = max(len(x), len(y))
    if longest == 0:
        raise ValueError("normalized edit distance undefined for two empty sequences")
    return edit_distance(x, y) / longest


def ned_pairs(type_keys) -> dict[tuple[str, str], float]:
    keys = sorted(type_keys)
    return {(a, b): ned(a, b) for a, b in combinations(keys, 2)}


def mean_ned(type_keys) -> float:
    """Mean normalized edit distance over all unordered pairs of types."""
    keys = set(type_keys)
    if len(keys) < 2:
        raise EmptyResult("mean NED needs at least two types")
    return _mean(ned_pairs(keys).values())


class PairTable:
    """Precomputed pair scores that can be averaged over any subset of types.

    Sampled lexicons reuse the scores of the full lexicon: a pair's ABX or
    NED value only depends on the two types involved.
    """

    def __init__(self, scores: dict[tuple[str, str], float]):
        self.scores = {tuple(sorted(k)): v for k, v in scores.items()}

    def mean_over(self, type_keys) -> tuple[float, int]:
        keys = sorted(type_keys)
        vals = [self.scores[p] for p in combinations(keys, 2) if p in self.scores]
        if not vals:
            raise EmptyResult("no scored pairs among the requested types")
        return _mean(vals), len(vals)


def sampled_metric(samples, score) -> tuple[float, list[float]]:
    """Score every sample with ``score(sample)`` and average across samples.

    Returns the mean and the per-sample values.
    """
    samples = list(samples)
    if not samples:
        raise EmptyResult("no samples")
    values = []
    for s in samples:
        try:
            values.append(float(score(s)))
        except ValueError as err:
            raise type(err)(f"sample {s.sample_index}: {err}") from err
    return _mean(values), values
