"""Numba kernels for the Monte Carlo hot loop.

Strings are arrays of letter codes (I=0, X=1, Z=2, Y=3) plus a sign bit. For
each site the X and Z strings are evolved in lockstep over their union
support; the Y string is their product ``Y = i X Z`` and is formed only at
readout. Expectations are returned exactly as a half-power exponent ``k``
(``-1`` for zero) and a sign bit.

Gate tables are packed as ``image | sign << 4`` in one uint8 per entry.
"""
import numpy as np
from numba import njit

from .rng import gate_index, sample_key

# letter_a * letter_b = i**_PH[a, b] * letter(a ^ b)
_PH = np.array(
    [
        [0, 0, 0, 0],
        [0, 0, 3, 1],  # X.Z = -iY, X.Y = iZ
        [0, 1, 0, 3],  # Z.X = iY, Z.Y = -iX
        [0, 3, 1, 0],  # Y.X = -iZ, Y.Z = iX
    ],
    dtype=np.int64,
)

FORCE_NONE = -1


@njit(cache=True, nogil=True)
def draw_circuit(seed, sample, n_sites, depth, n_gates, force, gates):
    """Fill ``gates[chain, layer, pair]`` for both parity chains."""
    skey = sample_key(seed, sample)
    half = n_sites // 2
    for chain in range(2):
        for layer in range(1, depth + 1):
            for k in range(half):
                if force >= 0:
                    gates[chain, layer, k] = force
                else:
                    gates[chain, layer, k] = gate_index(skey, chain, layer, k, n_gates)


@njit(cache=True, nogil=True)
def sample_expectations(gates, depth, is_t, table, out_k, out_s, xs, zs):
    """Exact single-site expectations of one circuit sample.

    ``out_k[t, i, m]`` / ``out_s[t, i, m]`` hold the half-power exponent
    (``-1`` for zero) and sign bit of ``<psi0| sigma_m(t) |psi0>`` for
    ``m`` in (X, Y, Z). Odd ``t`` is read from chain 0, even ``t`` from chain 1.
    """
    n = is_t.shape[0]
    # unwrapped coordinates live in [-n, 2n); wrap[s + n] is the ring site
    wrap = np.empty(3 * n, dtype=np.int64)
    for s in range(3 * n):
        wrap[s] = s % n
    for chain in range(2):
        t_last = depth
        if (t_last + chain) % 2 == 0:
            t_last -= 1
        for i in range(n):
            xs[:] = 0
            zs[:] = 0
            xs[i] = 1
            zs[i] = 2
            sx = 0
            sz = 0
            lo = i
            hi = i
            full = False
            for t in range(0, t_last + 1):
                odd = (t + chain) % 2 == 1
                if t > 0:
                    start = 0 if odd else 1
                    if full:
                        s0 = start
                        s1 = n - 1
                    else:
                        s0 = lo - 1
                        if (s0 - start) & 1:
                            s0 = lo
                        s1 = hi
                    s = s0
                    while s <= s1:
                        a = wrap[s + n]
                        b = wrap[s + n + 1]
                        g = gates[chain, t, (a - start) >> 1]
                        cx = xs[a] | (xs[b] << 2)
                        if cx:
                            v = table[g, cx]
                            sx ^= v >> 4
                            xs[a] = v & 3
                            xs[b] = (v >> 2) & 3
                        cz = zs[a] | (zs[b] << 2)
                        if cz:
                            v = table[g, cz]
                            sz ^= v >> 4
                            zs[a] = v & 3
                            zs[b] = (v >> 2) & 3
                        s += 2
                    if not full:
                        lo = s0
                        hi = s - 1
                        j = wrap[lo + n]
                        while xs[j] == 0 and zs[j] == 0:
                            lo += 1
                            j = wrap[lo + n]
                        j = wrap[hi + n]
                        while xs[j] == 0 and zs[j] == 0:
                            hi -= 1
                            j = wrap[hi + n]
                        if lo < 0:
                            lo += n
                            hi += n
                        elif lo >= n:
                            lo -= n
                            hi -= n
                        if hi - lo + 3 > n:
                            full = True
                if not (odd or (chain == 1 and t == 0)):
                    continue
                # readout of X, Z and Y = i X Z over the support
                r0 = 0 if full else lo
                r1 = n - 1 if full else hi
                kx = 0
                kz = 0
                ky = 0
                zx = False
                zz = False
                zy = False
                nx = sx
                nz = sz
                phase_y = 1 + 2 * (sx ^ sz)
                for s in range(r0, r1 + 1):
                    j = wrap[s + n]
                    a = xs[j]
                    b = zs[j]
                    c = a ^ b
                    phase_y += _PH[a, b]
                    if is_t[j]:
                        if a == 2:
                            zx = True
                        elif a != 0:
                            kx += 1
                        if b == 2:
                            zz = True
                        elif b != 0:
                            kz += 1
                        if c == 2:
                            zy = True
                        elif c != 0:
                            ky += 1
                    else:
                        if (a | b | c) & 1:
                            zx = zx or (a & 1) == 1
                            zz = zz or (b & 1) == 1
                            zy = zy or (c & 1) == 1
                out_k[t, i, 0] = -1 if zx else kx
                out_s[t, i, 0] = 0 if zx else nx
                out_k[t, i, 2] = -1 if zz else kz
                out_s[t, i, 2] = 0 if zz else nz
                out_k[t, i, 1] = -1 if zy else ky
                out_s[t, i, 1] = 0 if zy else (phase_y % 4) // 2


@njit(cache=True, nogil=True)
def accumulate(seed, start, stop, depth, is_t, table, force, n_codes, counts):
    """Add spectrum-class counts of samples ``[start, stop)`` into
    ``counts[t, i, code]``, ``code = sum_m (k_m + 1) * n_codes**m``."""
    n_sites = is_t.shape[0]
    n_gates = table.shape[0]
    gates = np.zeros((2, depth + 1, max(n_sites // 2, 1)), dtype=np.int64)
    out_k = np.zeros((depth + 1, n_sites, 3), dtype=np.int64)
    out_s = np.zeros((depth + 1, n_sites, 3), dtype=np.int64)
    xs = np.zeros(n_sites, dtype=np.uint8)
    zs = np.zeros(n_sites, dtype=np.uint8)
    for sample in range(start, stop):
        draw_circuit(seed, sample, n_sites, depth, n_gates, force, gates)
        sample_expectations(gates, depth, is_t, table, out_k, out_s, xs, zs)
        for t in range(depth + 1):
            for i in range(n_sites):
                code = (
                    (out_k[t, i, 0] + 1)
                    + (out_k[t, i, 1] + 1) * n_codes
                    + (out_k[t, i, 2] + 1) * n_codes * n_codes
                )
                counts[t, i, code] += 1


def pack_table(img, sgn):
    return np.ascontiguousarray(img.astype(np.uint8) | (sgn.astype(np.uint8) << 4))
