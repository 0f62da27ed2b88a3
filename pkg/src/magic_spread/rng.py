"""Counter-based gate randomness.

Every gate draw is a pure function of ``(seed, sample, chain, layer, pair)``:
the key is folded through the splitmix64 finalizer, so a draw never depends
on how many other draws were made before it. This is what lets the kernels
skip gates outside a string's support and still see the same circuit as every
other string in the sample.
"""
import numpy as np
from numba import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


@njit(cache=True, nogil=True)
def mix64(z):
    z = np.uint64(z) + _GAMMA
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def sample_key(seed, sample):
    return mix64(mix64(np.uint64(seed)) ^ np.uint64(sample))


@njit(cache=True, nogil=True)
def gate_index(skey, chain, layer, pair, n_gates):
    """Uniform index in ``[0, n_gates)`` for one gate slot of a sample."""
    h = mix64(skey ^ np.uint64(chain))
    h = mix64(h ^ np.uint64(layer))
    h = mix64(h ^ np.uint64(pair))
    # 53 random bits; modulo bias is below n_gates / 2**53
    return np.int64((h >> _S11) % np.uint64(n_gates))


@njit(cache=True, nogil=True)
def draw_indices(seed, sample, n, n_gates, out):
    """Fill ``out[:n]`` with consecutive draws (used for uniformity checks)."""
    skey = sample_key(seed, sample)
    for k in range(n):
        out[k] = gate_index(skey, 0, k >> 20, k & 0xFFFFF, n_gates)
    return out


class KeyedGateStream:
    """Gate draws for one circuit sample; ``gate(chain, layer, pair)``."""

    def __init__(self, seed: int, sample: int, n_gates: int):
        self.seed = int(seed)
        self.sample = int(sample)
        self.n_gates = int(n_gates)
        self._key = np.uint64(sample_key(self.seed, self.sample))

    def gate(self, chain: int, layer: int, pair: int) -> int:
        return int(gate_index(self._key, chain, layer, pair, self.n_gates))
