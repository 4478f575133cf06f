"""Token-to-token acoustic distance.

Frames are compared by the angle between their feature vectors.  Two tokens
are aligned by dynamic time warping and their distance is the mean frame
angle along the optimal path.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _norms(x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        s = 0.0
        for k in range(x.shape[1]):
            s += x[i, k] * x[i, k]
        out[i] = math.sqrt(s)
    return out


@njit(cache=True, nogil=True)
def _angle_matrix(a, b):
    na = _norms(a)
    nb = _norms(b)
    dim = a.shape[1]
    out = np.empty((a.shape[0], b.shape[0]))
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            if na[i] == 0.0 or nb[j] == 0.0:
                out[i, j] = 0.0 if na[i] == nb[j] else 0.5 * math.pi
                continue
            dot = 0.0
            same = True
            for k in range(dim):
                dot += a[i, k] * b[j, k]
                same = same and a[i, k] == b[j, k]
            if same:
                # acos(1 - ulp) is ~1.5e-8, not 0
                out[i, j] = 0.0
                continue
            c = dot / (na[i] * nb[j])
            if c > 1.0:
                c = 1.0
            elif c < -1.0:
                c = -1.0
            out[i, j] = math.acos(c)
    return out


@njit(cache=True, nogil=True)
def _dtw(cost):
    # accumulate (sum, path length); ties on the sum go to the shorter path
    n, m = cost.shape
    acc = np.empty((n, m))
    steps = np.empty((n, m), dtype=np.int64)
    for i in range(n):
        for j in range(m):
            if i == 0 and j == 0:
                acc[i, j] = cost[i, j]
                steps[i, j] = 1
                continue
            best = np.inf
            best_len = 0
            if i > 0 and j > 0:
                best = acc[i - 1, j - 1]
                best_len = steps[i - 1, j - 1]
            if i > 0:
                s = acc[i - 1, j]
                if s < best or (s == best and steps[i - 1, j] < best_len):
                    best = s
                    best_len = steps[i - 1, j]
            if j > 0:
                s = acc[i, j - 1]
                if s < best or (s == best and steps[i, j - 1] < best_len):
                    best = s
                    best_len = steps[i, j - 1]
            acc[i, j] = best + cost[i, j]
            steps[i, j] = best_len + 1
    return acc[n - 1, m - 1], steps[n - 1, m - 1]


def _as_frames(x) -> np.ndarray:
    frames = getattr(x, "frames", x)
    frames = np.ascontiguousarray(frames, dtype=np.float64)
    if frames.ndim == 1:
        frames = frames[None, :]
    if frames.ndim != 2 or frames.shape[0] == 0:
        raise ValueError("expected a non-empty sequence of frames")
    return frames


def frame_distance(u, v) -> float:
    """Angle in radians between two feature vectors.

    Two zero vectors are at distance 0; a zero vector and a non-zero one
    are at pi/2.
    """
    u = np.ascontiguousarray(u, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    if u.ndim != 1 or u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(_angle_matrix(u[None, :], v[None, :])[0, 0])


def frame_distances(a, b) -> np.ndarray:
    """Matrix of frame angles between two frame sequences."""
    a, b = _as_frames(a), _as_frames(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    return _angle_matrix(a, b)


def dtw_path_cost(cost) -> tuple[float, int]:
    """Minimal path sum and its length over a precomputed local cost matrix."""
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    if cost.ndim != 2 or 0 in cost.shape:
        raise ValueError("cost matrix must be 2-D and non-empty")
    total, length = _dtw(cost)
    return float(total), int(length)


def dtw_distance(a, b) -> float:
    """Mean frame angle along the minimal-sum DTW path between two sequences.

    Steps are (1, 1), (1, 0) and (0, 1); the path runs from the first
    frames to the last frames.  Accepts :class:`FeatureSequence` objects or
    2-D arrays of frames.
    """
    total, length = dtw_path_cost(frame_distances(a, b))
    return total / length


class DistanceTable:
    """Symmetric matrix of token distances with lookup by token id."""

    def __init__(self, token_ids, values):
        self.token_ids = tuple(token_ids)
        values = np.array(values, dtype=np.float64)
        n = len(self.token_ids)
        if values.shape != (n, n):
            raise ValueError(f"values must be {n}x{n}, got {values.shape}")
        values.setflags(write=False)
        self.values = values
        self.index = {tid: i for i, tid in enumerate(self.token_ids)}
        if len(self.index) != n:
            raise ValueError("token ids must be unique")

    def __len__(self):
        return len(self.token_ids)

    def indices(self, token_ids) -> np.ndarray:
        return np.array([self.index[t] for t in token_ids], dtype=np.intp)

    def __call__(self, a: str, b: str) -> float:
        return float(self.values[self.index[a], self.index[b]])

    def block(self, rows, cols) -> np.ndarray:
        return self.values[np.ix_(self.indices(rows), self.indices(cols))]

    def transform(self, fn) -> "DistanceTable":
        """Table with ``fn`` applied to every off-diagonal entry."""
        out = np.array(fn(self.values), dtype=np.float64)
        np.fill_diagonal(out, 0.0)
        return DistanceTable(self.token_ids, out)

    def __eq__(self, other):
        return (isinstance(other, DistanceTable) and self.token_ids == other.token_ids
                and np.array_equal(self.values, other.values))


def build_distance_table(sequences, n_jobs: int = 1) -> DistanceTable:
    """DTW distances between every unordered pair of feature sequences.

    Rows are filled by independent workers and written to fixed cells, so
    the result does not depend on ``n_jobs``.
    """
    ids = [s.token_id for s in sequences]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate token ids")
    frames = [_as_frames(s) for s in sequences]
    n = len(frames)
    values = np.zeros((n, n))

    def fill_row(i):
        for j in range(i + 1, n):
            d = dtw_distance(frames[i], frames[j])
            values[i, j] = d
            values[j, i] = d

    if n_jobs == 1 or n < 3:
        for i in range(n):
            fill_row(i)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(fill_row, range(n)))
    return DistanceTable(ids, values)


# Cache layout: 16-byte header (magic, version, n, id-block length), the
# newline-joined utf-8 token ids, then the strict lower triangle row by row
# as little-endian float64.
TABLE_MAGIC = b"LXDT"
TABLE_VERSION = 1
_HEADER = struct.Struct("<4sIII")


def dump_table(table: DistanceTable) -> bytes:
    ids = "\n".join(table.token_ids).encode("utf-8")
    n = len(table)
    rows, cols = np.tril_indices(n, k=-1)
    tri = table.values[rows, cols].astype("<f8")
    return _HEADER.pack(TABLE_MAGIC, TABLE_VERSION, n, len(ids)) + ids + tri.tobytes()


def load_table(data: bytes) -> DistanceTable:
    magic, version, n, id_len = _HEADER.unpack_from(data)
    if magic != TABLE_MAGIC or version != TABLE_VERSION:
        raise ValueError("not a distance table record")
    start = _HEADER.size
    ids = data[start:start + id_len].decode("utf-8").split("\n") if n else []
    tri = np.frombuffer(data[start + id_len:], dtype="<f8")
    if len(ids) != n or tri.size != n * (n - 1) // 2:
        raise ValueError("corrupt distance table record")
    values = np.zeros((n, n))
    rows, cols = np.tril_indices(n, k=-1)
    values[rows, cols] = tri
    values[cols, rows] = tri
    return DistanceTable(ids, values)


def save_table(table: DistanceTable, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(dump_table(table))
    tmp.replace(path)


def read_table(path) -> DistanceTable:
    return load_table(Path(path).read_bytes())
