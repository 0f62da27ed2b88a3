"""Signed Pauli strings on a ring of qubits.

A string is stored as two bit-packed Python integers (bit ``j`` of ``x`` / ``z``
is the X / Z component on site ``j``) plus a power of ``i``::

    P = i**phase_exp * X^x_0 Z^z_0 (x) X^x_1 Z^z_1 (x) ...

With this convention ``Y = i X Z`` has ``x = z = 1`` and ``phase_exp = 1``.
A string is Hermitian iff ``phase_exp - #Y`` is even, and then its sign in the
per-site letter basis {I, X, Y, Z} is ``i**(phase_exp - #Y)``.

Letter codes used across the package are the symplectic pairs ``x + 2 z``:
I=0, X=1, Z=2, Y=3, so that products modulo phase are XOR.
"""
from __future__ import annotations

from dataclasses import dataclass

LETTERS = "IXZY"
LETTER_CODE = {"I": 0, "X": 1, "Z": 2, "Y": 3}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    n_sites: int
    x: int = 0
    z: int = 0
    phase_exp: int = 0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be positive")
        limit = 1 << self.n_sites
        if self.x < 0 or self.z < 0 or self.x >= limit or self.z >= limit:
            raise ValueError("masks exceed n_sites")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    # construction -----------------------------------------------------------

    @classmethod
    def identity(cls, n_sites: int) -> PauliString:
        return cls(n_sites)

    @classmethod
    def from_letters(cls, letters: str, sign: int = 1) -> PauliString:
        """Build a Hermitian string from letters, site 0 first (``"IXYZ"``).

        A leading ``+``/``-`` (or the unicode minus) overrides ``sign``.
        """
        if letters[:1] in ("+", "-", "−"):
            sign = -1 if letters[0] != "+" else 1
            letters = letters[1:]
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        x = z = 0
        n_y = 0
        for j, ch in enumerate(letters):
            code = LETTER_CODE[ch]
            x |= (code & 1) << j
            z |= (code >> 1) << j
            n_y += code == 3
        return cls(len(letters), x, z, n_y + (0 if sign == 1 else 2))

    @classmethod
    def from_codes(cls, codes, sign: int = 1) -> PauliString:
        """Build from a sequence of letter codes (``x + 2 z``) per site."""
        return cls.from_letters("".join(LETTERS[int(c)] for c in codes), sign)

    # views ------------------------------------------------------------------

    @property
    def y_count(self) -> int:
        return _popcount(self.x & self.z)

    @property
    def is_hermitian(self) -> bool:
        return (self.phase_exp - self.y_count) % 2 == 0

    @property
    def sign(self) -> int:
        """Overall sign in the letter basis; only defined for Hermitian strings."""
        if not self.is_hermitian:
            raise ValueError("sign is only defined for Hermitian strings")
        return 1 if (self.phase_exp - self.y_count) % 4 == 0 else -1

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def letter(self, site: int) -> str:
        return LETTERS[self.code(site)]

    def code(self, site: int) -> int:
        return ((self.x >> site) & 1) | (((self.z >> site) & 1) << 1)

    def codes(self) -> list[int]:
        return [self.code(j) for j in range(self.n_sites)]

    def letters(self) -> str:
        return "".join(self.letter(j) for j in range(self.n_sites))

    def x_bits(self) -> str:
        return "".join(str((self.x >> j) & 1) for j in range(self.n_sites))

    def z_bits(self) -> str:
        return "".join(str((self.z >> j) & 1) for j in range(self.n_sites))

    def support(self) -> set[int]:
        mask = self.x | self.z
        return {j for j in range(self.n_sites) if (mask >> j) & 1}

    def support_interval(self) -> tuple[int, int] | None:
        """(min, max) site of the support, ignoring periodic wraparound."""
        s = self.support()
        return (min(s), max(s)) if s else None

    def __str__(self) -> str:
        if self.is_hermitian:
            return ("+" if self.sign == 1 else "-") + self.letters()
        return ("+i" if (self.phase_exp - self.y_count) % 4 == 1 else "-i") + self.letters()

    # algebra ------------------------------------------------------------------

    def __mul__(self, other: PauliString) -> PauliString:
        return multiply(self, other)

    def negate(self) -> PauliString:
        return PauliString(self.n_sites, self.x, self.z, self.phase_exp + 2)

    def restrict(self, sites) -> PauliString:
        """Sub-string on ``sites`` (in that order), keeping the overall sign."""
        codes = [self.code(j) for j in sites]
        return PauliString.from_codes(codes, self.sign)

    def to_matrix(self):
        """Dense matrix, little-endian (site ``j`` is bit ``j`` of the index)."""
        import numpy as np

        mats = {
            0: np.eye(2, dtype=complex),
            1: np.array([[0, 1], [1, 0]], dtype=complex),
            2: np.array([[1, 0], [0, -1]], dtype=complex),
            3: np.array([[0, -1j], [1j, 0]], dtype=complex),
        }
        out = np.ones((1, 1), dtype=complex)
        for j in reversed(range(self.n_sites)):
            out = np.kron(out, mats[self.code(j)])
        y = self.y_count
        return (1j ** ((self.phase_exp - y) % 4)) * out


def single_site(site: int, letter: str, n_sites: int) -> PauliString:
    """Hermitian string with ``letter`` at ``site`` and identity elsewhere."""
    if not 0 <= site < n_sites:
        raise IndexError(f"site {site} out of range for {n_sites} sites")
    code = LETTER_CODE[letter]
    return PauliString(
        n_sites,
        (code & 1) << site,
        (code >> 1) << site,
        1 if code == 3 else 0,
    )


def _check_sizes(p: PauliString, q: PauliString):
    if p.n_sites != q.n_sites:
        raise ValueError(f"length mismatch: {p.n_sites} vs {q.n_sites}")


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Operator product ``p @ q``."""
    _check_sizes(p, q)
    # Z^a X^b = (-1)^(a.b) X^b Z^a when commuting q's X past p's Z
    phase = p.phase_exp + q.phase_exp + 2 * _popcount(p.z & q.x)
    return PauliString(p.n_sites, p.x ^ q.x, p.z ^ q.z, phase)


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_sizes(p, q)
    return _popcount((p.x & q.z) ^ (p.z & q.x)) % 2 == 0


def support(p: PauliString) -> set[int]:
    return p.support()
