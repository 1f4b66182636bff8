"""Counter-based, splittable random streams.

All randomness in instance generation is derived from 64-bit integer
hashing (a splitmix64-style finalizer), so that

* a draw is addressed by ``(seed, domain, key, lane)`` and never depends
  on the order in which other draws happen;
* two instances generated from the same seed at different clause
  densities agree on every shared edge (monotone coupling);
* results are identical across platforms: the sampling path is pure
  fixed-width integer arithmetic, converted to floats only by an exact
  power-of-two scaling (plus libm transcendentals inside the Gaussian
  lanes used for ray amplitudes).

`KeyedStream` exposes the small slice of the `numpy.random.Generator`
API that the rest of the package consumes (``random``, ``integers``,
``standard_normal``), so callers may swap in a real Generator where
streaming identity across runs is not required.
"""

from __future__ import annotations

import numpy as np

_U64 = np.uint64
_MASK = _U64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = _U64(0x9E3779B97F4A7C15)

# Domain tags keep unrelated draw families out of each other's streams.
DOMAIN_GRAPH = 0x61B7
DOMAIN_LABEL = 0x9C55
DOMAIN_PAYLOAD = 0x4E0D
DOMAIN_GENERIC = 0x77F1


def _mix(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer; full-avalanche 64-bit mixing."""
    x = np.asarray(x, dtype=_U64)
    with np.errstate(over="ignore"):
        x = (x ^ (x >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> _U64(27))) * _U64(0x94D049BB133111EB)
        return x ^ (x >> _U64(31))


def derive_key(seed: int, *path: int) -> int:
    """Collapse (seed, path...) into one 64-bit stream key.

    Each path element is folded in through the finalizer, so distinct
    paths give statistically independent keys.
    """
    k = _mix(_U64(seed & 0xFFFFFFFFFFFFFFFF) ^ _GOLDEN)
    for part in path:
        with np.errstate(over="ignore"):
            k = _mix(k ^ (_U64(part & 0xFFFFFFFFFFFFFFFF) * _GOLDEN + _U64(1)))
    return int(k)


def hash_u64(key: int, lanes: np.ndarray) -> np.ndarray:
    """Vectorized draw of one uint64 per lane under a fixed key."""
    lanes = np.asarray(lanes, dtype=_U64)
    with np.errstate(over="ignore"):
        return _mix(_U64(key) ^ (lanes * _GOLDEN + _GOLDEN))


def hash_uniform(key: int, lanes: np.ndarray) -> np.ndarray:
    """Uniforms in [0, 1) addressed by lane; exact 2^-53 scaling."""
    return (hash_u64(key, lanes) >> _U64(11)).astype(np.float64) * 2.0**-53


def hash_normals(key: int, lanes: np.ndarray) -> np.ndarray:
    """Standard normals addressed by lane (Box-Muller on lane pairs).

    ``lanes`` must have even length when callers rely on exact lane
    addressing; internally lane 2k and 2k+1 share the two uniforms that
    feed one Box-Muller rotation.
    """
    lanes = np.asarray(lanes, dtype=_U64)
    pair = lanes >> _U64(1)
    u1 = (hash_u64(key, pair << _U64(1)) >> _U64(11)).astype(np.float64)
    u1 = (u1 + 1.0) * 2.0**-53  # (0, 1]: keeps log() finite
    u2 = hash_uniform(key, (pair << _U64(1)) | _U64(1))
    r = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * np.pi * u2
    return np.where(lanes & _U64(1), r * np.sin(ang), r * np.cos(ang))


class KeyedStream:
    """Sequential reader over one keyed counter stream.

    Mimics the fragment of `numpy.random.Generator` used by this
    package. Draws advance an internal lane counter; the n-th draw from
    a given (seed, path) is therefore reproducible in isolation.
    """

    def __init__(self, seed: int, *path: int):
        self._key = derive_key(seed, *path)
        self._lane = 0

    def _take(self, n: int) -> np.ndarray:
        lanes = np.arange(self._lane, self._lane + n, dtype=np.uint64)
        self._lane += n
        return lanes

    def random(self, size: int | None = None):
        n = 1 if size is None else int(size)
        out = hash_uniform(self._key, self._take(n))
        return float(out[0]) if size is None else out

    def integers(self, low: int, high: int, size: int | None = None):
        """Uniform ints in [low, high); modulo bias < 2^-32 for spans < 2^32."""
        n = 1 if size is None else int(size)
        span = _U64(high - low)
        raw = hash_u64(self._key, self._take(n)) % span
        out = raw.astype(np.int64) + low
        return int(out[0]) if size is None else out

    def standard_normal(self, size: int | None = None):
        n = 1 if size is None else int(size)
        # Round the lane window up to a Box-Muller pair boundary.
        start = self._lane + (self._lane & 1)
        lanes = np.arange(start, start + n + (n & 1), dtype=np.uint64)
        self._lane = start + n + (n & 1)
        out = hash_normals(self._key, lanes)[:n]
        return float(out[0]) if size is None else out


class InstanceRandom:
    """Splittable randomness for one instance draw.

    Every edge's payload stream is keyed by the edge's pair index, so
    payloads are independent of edge enumeration order and rederivable
    one clause at a time.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF

    def graph_stream(self) -> KeyedStream:
        return KeyedStream(self.seed, DOMAIN_GRAPH)

    def pair_uniforms(self, pair_indices: np.ndarray) -> np.ndarray:
        """GNP inclusion uniforms, one per pair index (lane = pair index)."""
        key = derive_key(self.seed, DOMAIN_GRAPH)
        return hash_uniform(key, pair_indices)

    def label_uniforms(self, pair_indices: np.ndarray) -> np.ndarray:
        key = derive_key(self.seed, DOMAIN_LABEL)
        return hash_uniform(key, pair_indices)

    def edge_stream(self, pair_index: int) -> KeyedStream:
        return KeyedStream(self.seed, DOMAIN_PAYLOAD, int(pair_index))

    def generic_stream(self, *path: int) -> KeyedStream:
        return KeyedStream(self.seed, DOMAIN_GENERIC, *path)


def derive_keys(seed: int, domain: int, indices: np.ndarray) -> np.ndarray:
    """Vectorized ``derive_key(seed, domain, k)`` over an index array.

    Bit-identical to the scalar chain, so per-edge payload streams can
    be evaluated in bulk or one edge at a time interchangeably.
    """
    base = _mix(_U64(seed & 0xFFFFFFFFFFFFFFFF) ^ _GOLDEN)
    with np.errstate(over="ignore"):
        base = _mix(base ^ (_U64(domain) * _GOLDEN + _U64(1)))
        idx = np.asarray(indices, dtype=_U64)
        return _mix(base ^ (idx * _GOLDEN + _U64(1)))


def hash_u64_keys(keys: np.ndarray, lane: int) -> np.ndarray:
    """One uint64 per key at a fixed lane (vector-of-keys counterpart)."""
    with np.errstate(over="ignore"):
        return _mix(np.asarray(keys, dtype=_U64) ^ (_U64(lane) * _GOLDEN + _GOLDEN))


def hash_uniform_keys(keys: np.ndarray, lane: int) -> np.ndarray:
    return (hash_u64_keys(keys, lane) >> _U64(11)).astype(np.float64) * 2.0**-53


def hash_normals_keys(keys: np.ndarray, n_lanes: int) -> np.ndarray:
    """(len(keys), n_lanes) standard normals; lane layout matches KeyedStream."""
    keys = np.asarray(keys, dtype=_U64)
    out = np.empty((keys.size, n_lanes), dtype=np.float64)
    for base in range(0, n_lanes, 2):
        u1 = (hash_u64_keys(keys, base) >> _U64(11)).astype(np.float64)
        u1 = (u1 + 1.0) * 2.0**-53
        u2 = hash_uniform_keys(keys, base + 1)
        r = np.sqrt(-2.0 * np.log(u1))
        ang = 2.0 * np.pi * u2
        out[:, base] = r * np.cos(ang)
        if base + 1 < n_lanes:
            out[:, base + 1] = r * np.sin(ang)
    return out


def derive_seed(master: int, *path: int) -> int:
    """Deterministic child seed for (master, path...): sweep lineage contract."""
    return derive_key(master, *path)
