"""Order-2 stabilizer Renyi entropy of Pauli spectra (natural log).

For a spectrum ``{|c_P|}`` of an ``n``-qubit reduced state,

    M2 = -log( sum |c_P|^4 / sum |c_P|^2 ).

In single-T experiments every entry is 0, 1/sqrt(2) or 1, so a spectrum is
summarized by ``(a, b)``, the counts of ones and of 1/sqrt(2) entries, and
``M2 = -log((a + b/4) / (a + b/2))``.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .pauli import PauliString, commutes

INV_SQRT2 = 1 / math.sqrt(2)


@dataclass(frozen=True)
class SpectrumCounts:
    a: int
    b: int

    def __post_init__(self):
        if self.a < 1:
            raise ValueError("spectrum must contain the identity entry (a >= 1)")
        if self.b < 0:
            raise ValueError("negative count")


def _neg_log_ratio(num: Fraction, den: Fraction) -> float:
    # ratio == 1 maps to +0.0 exactly, never -0.0
    if num == den:
        return 0.0
    return -math.log(num / den)


def sre2_from_counts(c: SpectrumCounts) -> float:
    return _neg_log_ratio(c.a + Fraction(c.b, 4), c.a + Fraction(c.b, 2))


def sre2_from_values(values) -> float:
    v = np.abs(np.asarray(values, dtype=float))
    s2 = float(np.sum(v**2))
    if s2 == 0:
        raise ValueError("all-zero spectrum")
    s4 = float(np.sum(v**4))
    if s4 == s2:
        return 0.0
    return -math.log(s4 / s2)


def sre2_from_exponents(entries) -> float:
    """Exact SRE for entries given as half-power exponents ``k`` (value
    ``2**(-k/2)``), with ``None`` for zero entries."""
    s2 = sum((Fraction(1, 2**k) for k in entries if k is not None), Fraction(0))
    s4 = sum((Fraction(1, 4**k) for k in entries if k is not None), Fraction(0))
    if s2 == 0:
        raise ValueError("all-zero spectrum")
    return _neg_log_ratio(s4, s2)


def sre_alpha_T_closed_form(alpha: float) -> float:
    """Order-``alpha`` SRE of the single-qubit T state."""
    if alpha <= 0 or alpha == 1:
        raise ValueError("alpha must be positive and different from 1")
    return math.log((1 + 2 / 2**alpha) / 2) / (1 - alpha)


class SpectrumClass(enum.Enum):
    STABILIZER_PURE_LIKE = "{1,0,0,0}"
    STABILIZER = "{1,1,0,0}"
    HALF_MAGIC = "{1,1/sqrt2,0,0}"
    FULL_MAGIC = "{1,1/sqrt2,1/sqrt2,0}"

    @property
    def counts(self) -> SpectrumCounts:
        return _CLASS_COUNTS[self]

    @property
    def sre(self) -> float:
        return sre2_from_counts(self.counts)


_CLASS_COUNTS = {
    SpectrumClass.STABILIZER_PURE_LIKE: SpectrumCounts(1, 0),
    SpectrumClass.STABILIZER: SpectrumCounts(2, 0),
    SpectrumClass.HALF_MAGIC: SpectrumCounts(1, 1),
    SpectrumClass.FULL_MAGIC: SpectrumCounts(1, 2),
}
_BY_COUNTS = {(c.a, c.b): k for k, c in _CLASS_COUNTS.items()}


def spectrum_counts(values, atol: float = 1e-12) -> SpectrumCounts:
    """``(a, b)`` of a spectrum whose entries lie in {0, 1/sqrt2, 1}."""
    a = b = 0
    for v in np.abs(np.asarray(values, dtype=float)):
        if abs(v - 1) <= atol:
            a += 1
        elif abs(v - INV_SQRT2) <= atol:
            b += 1
        elif v > atol:
            raise ValueError(f"spectrum entry {v} outside {{0, 1/sqrt2, 1}}")
    return SpectrumCounts(a, b)


def classify_single_qubit_spectrum(values) -> SpectrumClass:
    if len(values) != 4:
        raise ValueError("single-qubit spectrum has four entries")
    if abs(abs(values[0]) - 1) > 1e-12:
        raise ValueError("identity entry must be 1")
    c = spectrum_counts(values)
    try:
        return _BY_COUNTS[(c.a, c.b)]
    except KeyError:
        raise ValueError(f"spectrum with counts {(c.a, c.b)} is not a single-T class") from None


# -- allowed two-qubit spectra ---------------------------------------------------

_TWO_QUBIT = [PauliString.from_codes((c & 3, c >> 2)) for c in range(16)]
_TWO_QUBIT_MATS = np.stack([p.to_matrix() for p in _TWO_QUBIT])


def _comm(c1: int, c2: int) -> bool:
    return commutes(_TWO_QUBIT[c1], _TWO_QUBIT[c2])


def _marginals_ok(ones, halves) -> bool:
    # Bloch-vector purity of each single-qubit marginal
    for shift in (0, 2):
        s = 0.0
        for c in ones:
            if (c >> (2 - shift)) & 3 == 0 and c:
                s += 1.0
        for c in halves:
            if (c >> (2 - shift)) & 3 == 0:
                s += 0.5
        if s > 1 + 1e-12:
            return False
    return True


def _coset_structure_ok(ones, halves) -> bool:
    """Structure inherited from the initial product state.

    The +-1 entries form a commuting group A; the 1/sqrt2 entries commute with
    A, are unions of A-cosets, and make up at most two cosets whose
    representatives anticommute and multiply to a zero-coefficient string.
    """
    group = {0, *ones}
    if any(not _comm(p, q) for p in group for q in group):
        return False
    if any((p ^ q) not in group for p in group for q in group):
        return False
    half = set(halves)
    if any(not _comm(p, q) for p in group for q in half):
        return False
    if any((p ^ q) not in half for p in group for q in half):
        return False
    cosets = []
    seen = set()
    for q in sorted(half):
        if q in seen:
            continue
        coset = {q ^ g for g in group}
        seen |= coset
        cosets.append(q)
    if len(cosets) > 2:
        return False
    if len(cosets) == 2:
        p, q = cosets
        if _comm(p, q) or (p ^ q) in group or (p ^ q) in half:
            return False
    return True


@dataclass
class AllowedSpectra:
    classes: frozenset  # {(a, b, M2)}
    patterns_checked: int
    psd_tests: int
    min_margin: float  # smallest |eigenvalue| above the exact-zero band


def enumerate_allowed_two_qubit_spectra_detailed(structural: bool = True,
                                                 psd_tol: float = 1e-10) -> AllowedSpectra:
    """Brute-force search over two-qubit spectra with entries in {0, +-1/sqrt2, +-1}.

    Magnitude patterns are pruned by total purity and the single-qubit marginal
    bounds (and, with ``structural``, by the coset structure above); a pattern
    is kept if some sign assignment gives a positive semidefinite
    ``rho = (1/4) sum c_P P``.
    """
    others = list(range(1, 16))
    classes = set()
    n_patterns = n_psd = 0
    min_margin = math.inf
    for n_ones in range(0, 4):
        for ones in itertools.combinations(others, n_ones):
            rest = [c for c in others if c not in ones]
            max_b = int(2 * (4 - 1 - n_ones))
            for b in range(0, max_b + 1):
                for halves in itertools.combinations(rest, b):
                    if not _marginals_ok(ones, halves):
                        continue
                    if structural and not _coset_structure_ok(ones, halves):
                        continue
                    a = 1 + n_ones
                    if (a, b) in {(x[0], x[1]) for x in classes}:
                        continue
                    n_patterns += 1
                    ok, margin, tests = _some_sign_psd(ones, halves, psd_tol)
                    n_psd += tests
                    min_margin = min(min_margin, margin)
                    if ok:
                        classes.add((a, b, sre2_from_counts(SpectrumCounts(a, b))))
    return AllowedSpectra(frozenset(classes), n_patterns, n_psd, min_margin)


def _some_sign_psd(ones, halves, tol):
    idx = list(ones) + list(halves)
    mags = np.array([1.0] * len(ones) + [INV_SQRT2] * len(halves))
    n = len(idx)
    signs = 1 - 2 * ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1)
    coeffs = signs * mags[None, :]
    rho = np.eye(4, dtype=complex)[None] + np.einsum("sk,kij->sij", coeffs, _TWO_QUBIT_MATS[idx])
    eig = np.linalg.eigvalsh(rho / 4)
    lo = eig.min(axis=1)
    absd = np.abs(eig[np.abs(eig) > tol])
    margin = float(absd.min()) if absd.size else math.inf
    return bool((lo >= -tol).any()), margin, len(signs)


def enumerate_allowed_two_qubit_spectra(structural: bool = True) -> frozenset:
    """Distinct ``(a, b, M2)`` classes of reachable two-qubit spectra."""
    return enumerate_allowed_two_qubit_spectra_detailed(structural).classes


TWO_QUBIT_CLASSES = frozenset(
    (a, b, sre2_from_counts(SpectrumCounts(a, b)))
    for a, b in ((1, 0), (2, 0), (4, 0), (1, 1), (1, 2), (2, 2), (2, 4))
)
