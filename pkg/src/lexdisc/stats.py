"""Paired comparison of per-speaker scores between two registers."""

from __future__ import annotations

import math
from dataclasses import dataclass


class DegenerateInput(ValueError):
    """The paired differences have zero variance (or too few pairs)."""


def _betacf(a: float, b: float, x: float, eps: float = 1e-16, max_iter: int = 10000) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for a Student variable with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0
    t2 = t * t
    if t2 == 0.0:
        return 1.0
    # choose the argument that keeps precision on both tails
    if t2 < df:
        return 1.0 - betainc(0.5, 0.5 * df, t2 / (df + t2))
    return betainc(0.5 * df, 0.5, df / (df + t2))


def t_cdf(t: float, df: float) -> float:
    tail = 0.5 * t_sf_two_sided(t, df)
    return tail if t < 0 else 1.0 - tail


def _mean(xs) -> float:
    return math.fsum(xs) / len(xs)


def _sd(xs) -> float:
    m = _mean(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1))


def _diffs(xs, ys) -> list[float]:
    xs, ys = [float(x) for x in xs], [float(y) for y in ys]
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise DegenerateInput("a paired test needs at least two pairs")
    diffs = [y - x for x, y in zip(xs, ys)]
    if _sd(diffs) == 0.0:
        raise DegenerateInput("paired differences have zero variance")
    return diffs


def paired_t(xs, ys) -> tuple[float, int, float]:
    """Paired Student t-test of ``ys - xs``; returns ``(t, df, p)``, p two-sided."""
    diffs = _diffs(xs, ys)
    n = len(diffs)
    t = _mean(diffs) / (_sd(diffs) / math.sqrt(n))
    return t, n - 1, t_sf_two_sided(t, n - 1)


def cohens_d(xs, ys) -> float:
    """Paired effect size d_z: mean difference over the sd of the differences."""
    diffs = _diffs(xs, ys)
    return _mean(diffs) / _sd(diffs)


def cohens_d_av(xs, ys) -> float:
    """Mean difference over the average of the two groups' standard deviations."""
    diffs = _diffs(xs, ys)
    xs, ys = [float(x) for x in xs], [float(y) for y in ys]
    return _mean(diffs) / ((_sd(xs) + _sd(ys)) / 2.0)


def relative_effect(mean_x: float, mean_y: float) -> float:
    """Change from ``mean_x`` to ``mean_y`` in percent of ``mean_x``."""
    if mean_x == 0:
        raise ZeroDivisionError("relative effect undefined for a zero baseline")
    return 100.0 * (mean_y - mean_x) / mean_x


@dataclass
class PairedComparison:
    metric: str
    register_x: str
    register_y: str
    per_speaker: list  # (speaker_id, score_x, score_y)
    n: int
    mean_x: float
    mean_y: float
    t: float
    df: int
    p: float
    d_z: float
    d_av: float
    relative_pct: float
    seed: int | None = None
    skipped: list | None = None

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "registers": [self.register_x, self.register_y],
            "n": self.n,
            "means": {self.register_x: self.mean_x, self.register_y: self.mean_y},
            "t": self.t,
            "df": self.df,
            "p": self.p,
            "d_z": self.d_z,
            "d_av": self.d_av,
            "relative_pct": self.relative_pct,
            "seed": self.seed,
            "skipped_speakers": list(self.skipped or []),
        }


def compare(metric: str, register_x: str, register_y: str, per_speaker,
            seed: int | None = None, skipped=None) -> PairedComparison:
    """Paired comparison of ``(speaker, score_x, score_y)`` rows."""
    rows = sorted((str(s), float(x), float(y)) for s, x, y in per_speaker)
    xs = [r[1] for r in rows]
    ys = [r[2] for r in rows]
    t, df, p = paired_t(xs, ys)
    mean_x, mean_y = _mean(xs), _mean(ys)
    return PairedComparison(
        metric=metric, register_x=register_x, register_y=register_y,
        per_speaker=rows, n=len(rows), mean_x=mean_x, mean_y=mean_y,
        t=t, df=df, p=p, d_z=cohens_d(xs, ys), d_av=cohens_d_av(xs, ys),
        relative_pct=relative_effect(mean_x, mean_y), seed=seed,
        skipped=sorted(skipped or []),
    )
