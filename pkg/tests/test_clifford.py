import time

import numpy as np
import pytest
from scipy.stats import chi2

from magic_spread.clifford import (
    GROUP_ORDER,
    IDENTITY,
    compose,
    conjugate_pauli,
    enumerate_full_group,
    from_word,
    full_group,
    primitive,
    restricted_draws,
    restricted_table,
    sample_restricted,
    sample_uniform,
    word_unitary,
)
from magic_spread.pauli import PauliString, commutes
from magic_spread.rng import draw_indices

P = PauliString.from_letters
ALL16 = [PauliString.from_codes((c & 3, c >> 2)) for c in range(16)]


def images(g):
    return tuple(str(i) for i in g.images)


def test_primitive_examples():
    # generator order X0, Z0, X1, Z1; strings are written site 0 first
    assert images(primitive("H0")) == ("+ZI", "+XI", "+IX", "+IZ")
    s = primitive("S0")
    assert str(s.img_x0) == "-YI" and str(s.img_z0) == "+ZI"
    assert images(primitive("CX01")) == ("+XX", "+ZI", "+IX", "+ZZ")


def test_primitive_rejects_bad_label():
    with pytest.raises(ValueError):
        primitive("T0")
    with pytest.raises(ValueError):
        primitive("H2")


def test_compose_examples():
    g = primitive("CX10")
    assert compose(IDENTITY, g) == g
    assert compose(primitive("H0"), primitive("H0")) == IDENTITY
    z = compose(primitive("S0"), primitive("S0"))
    assert str(z.img_x0) == "-XI" and str(z.img_z0) == "+ZI"


def test_compose_orientation_matches_unitaries():
    # compose(g, h) is the unitary G H (h acts first)
    g, h = from_word(("H0", "CX01")), from_word(("S1",))
    u = word_unitary(("H0", "CX01")) @ word_unitary(("S1",))
    gh = compose(g, h)
    for p in ALL16:
        dense = u.conj().T @ p.to_matrix() @ u
        np.testing.assert_allclose(conjugate_pauli(gh, p).to_matrix(), dense, atol=1e-12)


def test_conjugate_examples():
    for p in ALL16:
        assert conjugate_pauli(IDENTITY, p) == p
    assert conjugate_pauli(primitive("CX01"), P("XI")) == P("XX")


def test_conjugate_rejects_non_hermitian():
    with pytest.raises(ValueError):
        conjugate_pauli(IDENTITY, PauliString(2, 1, 0, 1))


def test_group_order_and_runtime():
    full_group.cache_clear()
    t0 = time.perf_counter()
    table = full_group()
    assert time.perf_counter() - t0 < 1.0
    assert len(table) == GROUP_ORDER == 11520
    keys = {table.gate(k).key for k in range(len(table))}
    assert len(keys) == 11520


def test_identity_first_with_empty_word():
    gates = enumerate_full_group()
    assert gates[0] == (IDENTITY, ())
    assert sum(g == IDENTITY for g, _ in gates) == 1


def test_words_are_shortest_and_bfs_ordered():
    lengths = [len(w) for _, w in enumerate_full_group()]
    assert lengths == sorted(lengths)


def test_every_element_valid_and_replays():
    for g, word in enumerate_full_group():
        assert g.is_valid()
        assert from_word(word) == g


def test_every_element_matches_dense_unitary():
    table = full_group()
    mats = np.stack([p.to_matrix() for p in ALL16])
    for k in range(len(table)):
        u = word_unitary(table.words[k])
        dense = np.einsum("ji,pjk,kl->pil", u.conj(), mats, u)
        img, sgn = table.img[k], table.sgn[k]
        fast = np.stack([(-1 if sgn[c] else 1) * ALL16[img[c]].to_matrix() for c in range(16)])
        np.testing.assert_allclose(fast, dense, atol=1e-12)


def test_conjugation_preserves_commutation(rng):
    table = full_group()
    for _ in range(200):
        g = table.gate(int(rng.integers(len(table))))
        p, q = ALL16[rng.integers(16)], ALL16[rng.integers(16)]
        assert commutes(p, q) == commutes(conjugate_pauli(g, p), conjugate_pauli(g, q))
        assert conjugate_pauli(g, ALL16[0]) == ALL16[0]
        assert conjugate_pauli(g, p).is_hermitian


def test_sample_uniform_deterministic():
    a = [sample_uniform(np.random.default_rng(5)).key for _ in range(3)]
    b = [sample_uniform(np.random.default_rng(5)).key for _ in range(3)]
    assert a == b
    r1, r2 = np.random.default_rng(1), np.random.default_rng(2)
    assert [sample_uniform(r1).key for _ in range(20)] != [sample_uniform(r2).key for _ in range(20)]


def test_keyed_draws_uniform_chi_squared():
    n = 10**7
    out = np.empty(n, dtype=np.int64)
    draw_indices(2024, 0, n, GROUP_ORDER, out)
    counts = np.bincount(out, minlength=GROUP_ORDER)
    expected = n / GROUP_ORDER
    stat = ((counts - expected) ** 2 / expected).sum()
    assert stat < chi2.ppf(0.999, GROUP_ORDER - 1)


def test_restricted_draw_count_and_order():
    draws = restricted_draws()
    assert len(draws) == 32 == len(set(draws))
    assert len(restricted_table()) == 32
    # CNOT(0->1), then H on 0, then S on 0
    g = from_word(("CX01", "H0", "S0"))
    u = word_unitary(("S0",)) @ word_unitary(("H0",)) @ word_unitary(("CX01",))
    for p in ALL16:
        np.testing.assert_allclose(conjugate_pauli(g, p).to_matrix(),
                                   u.conj().T @ p.to_matrix() @ u, atol=1e-12)


def test_restricted_is_strict_subset():
    full = {full_group().gate(k).key for k in range(GROUP_ORDER)}
    restricted = {restricted_table().gate(k).key for k in range(32)}
    assert restricted < full
    for k in range(32):
        g = restricted_table().gate(k)
        assert all(s in (0, 1) for img in g.images for s in img.support())


def test_sample_restricted_in_table(rng):
    keys = {restricted_table().gate(k).key for k in range(32)}
    for _ in range(50):
        assert sample_restricted(rng).key in keys


def test_same_qubit_order_matters():
    # the two single-qubit draws do not commute when they hit the same qubit
    assert from_word(("CX01", "H0", "S0")) != from_word(("CX01", "S0", "H0"))
    # distinct-qubit draws commute
    assert from_word(("CX01", "H0", "S1")) == from_word(("CX01", "S1", "H0"))
