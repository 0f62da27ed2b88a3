"""Product initial states of |0> and |T> sites and their Pauli expectations.

Expectations factorize over sites. Each nonzero factor is ``+-1`` or
``+-1/sqrt(2)``, so a product is stored exactly as ``(sign, k)`` meaning
``sign * 2**(-k/2)``; ``sign == 0`` is an exact zero.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .pauli import LETTER_CODE, PauliString

ZERO = "0"
T = "T"

# factor tables indexed by letter code (I, X, Z, Y): (sign, half-power)
_FACTORS = {
    ZERO: ((1, 0), (0, 0), (1, 0), (0, 0)),
    T: ((1, 0), (1, 1), (0, 0), (1, 1)),
}


@dataclass(frozen=True)
class ProductState:
    kinds: str

    def __post_init__(self):
        if not self.kinds:
            raise ValueError("empty state")
        bad = set(self.kinds) - {ZERO, T}
        if bad:
            raise ValueError(f"unknown site kinds {sorted(bad)}")

    @classmethod
    def with_magic(cls, n_sites: int, magic_sites) -> ProductState:
        kinds = [ZERO] * n_sites
        for m in magic_sites:
            if not 0 <= m < n_sites:
                raise IndexError(f"magic site {m} out of range")
            kinds[m] = T
        return cls("".join(kinds))

    @property
    def n_sites(self) -> int:
        return len(self.kinds)

    @property
    def magic_sites(self) -> list[int]:
        return [j for j, k in enumerate(self.kinds) if k == T]

    def t_mask(self) -> np.ndarray:
        return np.array([k == T for k in self.kinds], dtype=np.uint8)


def site_factor(kind: str, letter: str) -> float:
    sign, k = _FACTORS[kind][LETTER_CODE[letter]]
    return sign * 2.0 ** (-k / 2)


def expectation_exact(state: ProductState, p: PauliString) -> tuple[int, int]:
    """``(sign, k)`` with ``<psi0|p|psi0> = sign * 2**(-k/2)``."""
    if p.n_sites != state.n_sites:
        raise ValueError("state and string sizes differ")
    if not p.is_hermitian:
        raise ValueError("expectation needs a Hermitian string")
    sign, k = p.sign, 0
    mask = p.x | p.z
    for j, kind in enumerate(state.kinds):
        if not (mask >> j) & 1:
            continue
        s, h = _FACTORS[kind][p.code(j)]
        if s == 0:
            return 0, 0
        sign *= s
        k += h
    return sign, k


def exact_to_float(value: tuple[int, int]) -> float:
    sign, k = value
    return sign * 2.0 ** (-k / 2)


def expectation(state: ProductState, p: PauliString) -> float:
    return exact_to_float(expectation_exact(state, p))


MAX_REGION = 14


def count_nonzero_in_region(state: ProductState, region) -> int:
    """Number of strings supported in ``region`` with nonzero expectation.

    ``region`` is an iterable of sites (or a ``(start, stop)`` half-open
    range); all ``4**w`` strings on it are enumerated.
    """
    if isinstance(region, tuple) and len(region) == 2:
        sites = [j % state.n_sites for j in range(region[0], region[1])]
    else:
        sites = list(region)
    w = len(sites)
    if w > MAX_REGION:
        raise ValueError(f"region of width {w} exceeds enumeration cap {MAX_REGION}")
    # per-site nonzero flags over the 4 letter codes
    flags = np.array([[_FACTORS[state.kinds[j]][c][0] != 0 for c in range(4)] for j in sites])
    count = 0
    head = min(w, 8)
    # vectorize the trailing `head` sites, loop over the rest
    tail_sites = flags[head:]
    ok_head = np.ones(1, dtype=bool)
    for f in flags[:head]:
        ok_head = (ok_head[:, None] & f[None, :]).ravel()
    for combo in itertools.product(range(4), repeat=w - head):
        if all(tail_sites[j][c] for j, c in enumerate(combo)):
            count += int(ok_head.sum())
    return count


def nonzero_count_law(t: int) -> int:
    """Closed form ``3 * 2**(2t - 1)`` for a width-``2t`` region holding one T."""
    return 3 * 2 ** (2 * t - 1)


INV_SQRT2 = 1 / math.sqrt(2)
