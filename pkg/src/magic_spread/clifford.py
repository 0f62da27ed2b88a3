"""Two-qubit Clifford gates as adjoint actions ``A(P) = C^dagger P C``.

Every gate is kept in two equivalent forms:

* :class:`CliffordGate2`, the signed images of the generators X0, Z0, X1, Z1;
* a 16-entry conjugation table over two-site letter codes
  ``c = l0 + 4 * l1`` (``l = x + 2 z``), giving the image code and a sign bit.

The table form is what the Monte Carlo kernels index into. The full group is
enumerated once by breadth-first search from the identity under the six
primitives, so uniform sampling is an index draw.

Composition orientation: ``compose(g, h)`` is the unitary ``G @ H`` (``h`` acts
on the state first). Its adjoint action is ``P -> A_h(A_g(P))``. Gate words are
listed in unitary order, first applied first.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pauli import PauliString, commutes, multiply

GROUP_ORDER = 11520
PRIMITIVES = ("H0", "H1", "S0", "S1", "CX01", "CX10")
RESTRICTED_SIZE = 32

_GEN_CODES = (1, 2, 4, 8)  # X0, Z0, X1, Z1 as two-site codes


@dataclass(frozen=True)
class CliffordGate2:
    img_x0: PauliString
    img_z0: PauliString
    img_x1: PauliString
    img_z1: PauliString

    @property
    def images(self) -> tuple[PauliString, ...]:
        return (self.img_x0, self.img_z0, self.img_x1, self.img_z1)

    @property
    def key(self) -> int:
        """Dedup key: the four signed images packed into 20 bits."""
        key = 0
        for k, img in enumerate(self.images):
            code = img.code(0) | (img.code(1) << 2)
            key |= (code | (16 if img.sign < 0 else 0)) << (5 * k)
        return key

    def conjugate(self, p: PauliString) -> PauliString:
        return conjugate_pauli(self, p)

    def table(self) -> tuple[np.ndarray, np.ndarray]:
        """(image codes, sign bits), both of length 16."""
        img = np.zeros(16, dtype=np.uint8)
        sgn = np.zeros(16, dtype=np.uint8)
        for c in range(16):
            out = conjugate_pauli(self, _two_site(c))
            img[c] = out.code(0) | (out.code(1) << 2)
            sgn[c] = out.sign < 0
        return img, sgn

    def is_valid(self) -> bool:
        imgs = self.images
        if any(not q.is_hermitian or q.is_identity or q.n_sites != 2 for q in imgs):
            return False
        for a in range(4):
            for b in range(a + 1, 4):
                # only (X0, Z0) and (X1, Z1) anticommute
                expect = not ((a, b) in ((0, 1), (2, 3)))
                if commutes(imgs[a], imgs[b]) != expect:
                    return False
        return True

    def __str__(self) -> str:
        names = ("X0", "Z0", "X1", "Z1")
        return ", ".join(f"{n}->{img}" for n, img in zip(names, self.images))


def _two_site(code: int, sign: int = 1) -> PauliString:
    return PauliString.from_codes((code & 3, code >> 2), sign)


def _from_table_row(img: np.ndarray, sgn: np.ndarray) -> CliffordGate2:
    return CliffordGate2(
        *(_two_site(int(img[c]), -1 if sgn[c] else 1) for c in _GEN_CODES)
    )


IDENTITY = CliffordGate2(*(_two_site(c) for c in _GEN_CODES))


def conjugate_pauli(g: CliffordGate2, p: PauliString) -> PauliString:
    """Image ``C^dagger p C`` of a Hermitian two-site string."""
    if p.n_sites != 2:
        raise ValueError("gate acts on two-site strings")
    if not p.is_hermitian:
        raise ValueError("conjugate_pauli expects a Hermitian string")
    # p = i^k X0^x0 Z0^z0 X1^x1 Z1^z1
    out = PauliString(2, 0, 0, p.phase_exp)
    bits = ((p.x, 0), (p.z, 0), (p.x, 1), (p.z, 1))
    for img, (mask, site) in zip(g.images, bits):
        if (mask >> site) & 1:
            out = multiply(out, img)
    return out


def compose(g: CliffordGate2, h: CliffordGate2) -> CliffordGate2:
    """Gate for the unitary ``G @ H``; ``h`` acts on the state first."""
    out = CliffordGate2(*(conjugate_pauli(h, img) for img in g.images))
    assert out.is_valid(), "composition produced an invalid tableau"
    return out


def primitive(label: str) -> CliffordGate2:
    """Adjoint action of ``H0``, ``H1``, ``S0``, ``S1``, ``CX01`` or ``CX10``.

    ``CXct`` is CNOT with control ``c`` and target ``t``. ``S = diag(1, i)``
    gives ``S^dagger X S = -Y``.
    """
    f = PauliString.from_letters
    table = {
        "H0": ("ZI", "XI", "IX", "IZ"),
        "H1": ("XI", "ZI", "IZ", "IX"),
        "S0": ("-YI", "ZI", "IX", "IZ"),
        "S1": ("XI", "ZI", "-IY", "IZ"),
        "CX01": ("XX", "ZI", "IX", "ZZ"),
        "CX10": ("XI", "ZZ", "XX", "IZ"),
    }
    try:
        images = table[label]
    except KeyError:
        raise ValueError(f"unknown primitive gate {label!r}") from None
    return CliffordGate2(*(f(s) for s in images))


def from_word(word) -> CliffordGate2:
    """Replay a gate word (unitary order) from the identity."""
    g = IDENTITY
    for label in word:
        g = compose(primitive(label), g)
    return g


# dense matrices, little-endian: qubit 0 is the low bit of the 4x4 index

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])
_I2 = np.eye(2, dtype=complex)


def _cnot(control: int) -> np.ndarray:
    u = np.zeros((4, 4), dtype=complex)
    for idx in range(4):
        b0, b1 = idx & 1, idx >> 1
        if control == 0:
            b1 ^= b0
        else:
            b0 ^= b1
        u[b0 | (b1 << 1), idx] = 1
    return u


def primitive_unitary(label: str) -> np.ndarray:
    if label in ("H0", "S0"):
        return np.kron(_I2, _H if label == "H0" else _S)
    if label in ("H1", "S1"):
        return np.kron(_H if label == "H1" else _S, _I2)
    if label == "CX01":
        return _cnot(0)
    if label == "CX10":
        return _cnot(1)
    raise ValueError(f"unknown primitive gate {label!r}")


def word_unitary(word) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    for label in word:
        u = primitive_unitary(label) @ u
    return u


@dataclass(frozen=True)
class GateTable:
    """Conjugation tables for an indexed family of gates."""

    img: np.ndarray  # (n, 16) uint8 image codes
    sgn: np.ndarray  # (n, 16) uint8 sign bits
    words: tuple[tuple[str, ...], ...]

    def __len__(self) -> int:
        return len(self.words)

    def gate(self, index: int) -> CliffordGate2:
        return _from_table_row(self.img[index], self.sgn[index])


def _primitive_tables():
    rows = [primitive(lab).table() for lab in PRIMITIVES]
    return np.stack([r[0] for r in rows]), np.stack([r[1] for r in rows])


def _table_keys(img: np.ndarray, sgn: np.ndarray) -> np.ndarray:
    key = np.zeros(img.shape[0], dtype=np.int64)
    for k, c in enumerate(_GEN_CODES):
        key |= (img[:, c].astype(np.int64) | (sgn[:, c].astype(np.int64) << 4)) << (5 * k)
    return key


@lru_cache(maxsize=1)
def full_group() -> GateTable:
    """All 11520 two-qubit Clifford adjoint actions in BFS order.

    Each element carries a shortest word; ties are resolved by frontier order
    and then by the fixed primitive order in ``PRIMITIVES``.
    """
    p_img, p_sgn = _primitive_tables()
    ident = np.arange(16, dtype=np.uint8)[None, :]
    imgs = [ident]
    sgns = [np.zeros((1, 16), dtype=np.uint8)]
    words: list[tuple[str, ...]] = [()]
    seen = np.zeros(1 << 20, dtype=bool)
    seen[_table_keys(imgs[0], sgns[0])] = True

    f_img, f_sgn, f_words = imgs[0], sgns[0], [()]
    while len(f_words):
        # new = compose(prim, cur): A_new(P) = A_cur(A_prim(P))
        cand_img = np.take_along_axis(
            f_img[:, None, :].repeat(len(PRIMITIVES), 1),
            np.broadcast_to(p_img[None], (len(f_words), *p_img.shape)).astype(np.intp),
            axis=2,
        )
        cand_sgn = p_sgn[None] ^ np.take_along_axis(
            f_sgn[:, None, :].repeat(len(PRIMITIVES), 1),
            np.broadcast_to(p_img[None], (len(f_words), *p_img.shape)).astype(np.intp),
            axis=2,
        )
        cand_img = cand_img.reshape(-1, 16)
        cand_sgn = cand_sgn.reshape(-1, 16)
        keys = _table_keys(cand_img, cand_sgn)
        _, first = np.unique(keys, return_index=True)
        first = np.sort(first)
        first = first[~seen[keys[first]]]
        seen[keys[first]] = True
        n_prim = len(PRIMITIVES)
        f_words = [f_words[j // n_prim] + (PRIMITIVES[j % n_prim],) for j in first]
        f_img, f_sgn = cand_img[first], cand_sgn[first]
        imgs.append(f_img)
        sgns.append(f_sgn)
        words.extend(f_words)

    table = GateTable(np.concatenate(imgs), np.concatenate(sgns), tuple(words))
    table.img.setflags(write=False)
    table.sgn.setflags(write=False)
    return table


def enumerate_full_group() -> list[tuple[CliffordGate2, tuple[str, ...]]]:
    table = full_group()
    return [(table.gate(k), table.words[k]) for k in range(len(table))]


def restricted_draws():
    """All 32 raw draws ``(cnot, (g1, q1), (g2, q2))`` in index order."""
    out = []
    for cnot in ("CX01", "CX10"):
        for g1 in ("H", "S"):
            for q1 in (0, 1):
                for g2 in ("H", "S"):
                    for q2 in (0, 1):
                        out.append((cnot, f"{g1}{q1}", f"{g2}{q2}"))
    return out


@lru_cache(maxsize=1)
def restricted_table() -> GateTable:
    """Tables for the 32 equally likely CNOT + two single-qubit draws.

    Unitary order is CNOT, then the first draw, then the second. Duplicated
    adjoint actions are kept so that a uniform index reproduces the draw
    distribution.
    """
    words = tuple(restricted_draws())
    rows = [from_word(w).table() for w in words]
    table = GateTable(
        np.stack([r[0] for r in rows]), np.stack([r[1] for r in rows]), words
    )
    table.img.setflags(write=False)
    table.sgn.setflags(write=False)
    return table


def gate_table(gate_kind: str) -> GateTable:
    if gate_kind == "full_clifford":
        return full_group()
    if gate_kind == "restricted":
        return restricted_table()
    raise ValueError(f"unknown gate kind {gate_kind!r}")


def sample_uniform(rng: np.random.Generator) -> CliffordGate2:
    return full_group().gate(int(rng.integers(GROUP_ORDER)))


def sample_restricted(rng: np.random.Generator) -> CliffordGate2:
    """CNOT with random direction followed by two independent {H, S} draws."""
    cnot = ("CX01", "CX10")[rng.integers(2)]
    first = "HS"[rng.integers(2)] + str(rng.integers(2))
    second = "HS"[rng.integers(2)] + str(rng.integers(2))
    return from_word((cnot, first, second))
