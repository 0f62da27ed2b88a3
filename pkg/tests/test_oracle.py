import math

import numpy as np
import pytest

from magic_spread.clifford import full_group, word_unitary
from magic_spread.magic_state import ProductState, expectation
from magic_spread.oracle import (
    DenseState,
    apply_gate_word,
    apply_single,
    check_circuit_equivalence,
    global_sre2,
    pauli_expectation,
    prepare_initial,
    reduced_density,
    sre_alpha,
)
from magic_spread.pauli import PauliString
from magic_spread.sre import SpectrumCounts, spectrum_counts, sre2_from_counts

LOG43 = math.log(4 / 3)
W = np.exp(1j * np.pi / 4)
X = np.array([[0, 1], [1, 0]])
Y = np.array([[0, -1j], [1j, 0]])


def test_prepare_examples():
    s = prepare_initial("000")
    assert s.amplitudes[0] == 1 and np.count_nonzero(s.amplitudes) == 1
    # site 1 is the more significant bit: |q1 q0>
    np.testing.assert_allclose(prepare_initial("0T").amplitudes, [1, 0, W, 0] / np.sqrt(2))
    with pytest.raises(ValueError):
        prepare_initial("0" * 13)


def test_initial_state_is_two_stabilizer_superposition():
    s = prepare_initial("00T0")
    e = np.zeros(16)
    e[0] = 1
    f = np.zeros(16)
    f[4] = 1
    np.testing.assert_allclose(s.amplitudes, (e + W * f) / np.sqrt(2))


def test_gate_word_examples(rng):
    s = prepare_initial("T0T")
    assert np.array_equal(apply_gate_word(s, (), (0, 1)).amplitudes, s.amplitudes)
    t = apply_single(apply_single(prepare_initial("00"), "H", 1), "T", 1)
    np.testing.assert_allclose(t.amplitudes, prepare_initial("0T").amplitudes, atol=1e-15)
    table = full_group()
    psi = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    state = DenseState(6, psi / np.linalg.norm(psi))
    for k in rng.integers(len(table), size=20):
        state = apply_gate_word(state, table.words[k], (5, 0))
        assert state.norm() == pytest.approx(1.0, abs=1e-12)


def test_apply_matches_kron():
    u = word_unitary(("CX01", "H1"))
    s = prepare_initial("T0")
    # single pair covering both sites in order (0, 1): plain matrix product
    np.testing.assert_allclose(apply_gate_word(s, ("CX01", "H1"), (0, 1)).amplitudes,
                               u @ s.amplitudes, atol=1e-15)
    with pytest.raises(ValueError):
        apply_gate_word(s, ("H0",), (0, 2))


def test_reduced_density_examples():
    s = prepare_initial("0T0")
    rho = reduced_density(s, [0])
    np.testing.assert_allclose(rho @ rho, rho, atol=1e-12)
    rho_t = reduced_density(prepare_initial("0T"), [1])
    np.testing.assert_allclose(rho_t, 0.5 * (np.eye(2) + (X + Y) / np.sqrt(2)), atol=1e-12)
    bell = DenseState(2, np.array([1, 0, 0, 1]) / np.sqrt(2))
    np.testing.assert_allclose(reduced_density(bell, [1]), np.eye(2) / 2, atol=1e-15)
    with pytest.raises(ValueError):
        reduced_density(prepare_initial("00000"), [0, 1, 2, 3, 4])


def test_reduced_density_ordering():
    s = prepare_initial("T000")
    rho = reduced_density(s, [0, 2])
    # sites[0] is the low bit
    np.testing.assert_allclose(rho, np.kron(np.diag([1, 0]),
                                            reduced_density(prepare_initial("T"), [0])),
                               atol=1e-15)


def test_sre_alpha_examples():
    rho_t = reduced_density(prepare_initial("T"), [0])
    assert sre_alpha(rho_t, 2) == pytest.approx(LOG43, abs=1e-12)
    assert sre_alpha(np.eye(2) / 2, 2) == pytest.approx(0, abs=1e-15)
    from magic_spread.sre import sre_alpha_T_closed_form
    for a in (0.5, 3, 4.5):
        assert sre_alpha(rho_t, a) == pytest.approx(sre_alpha_T_closed_form(a), abs=1e-12)
    with pytest.raises(ValueError):
        sre_alpha(rho_t, 1)


def test_sre_additive_on_products():
    a = reduced_density(prepare_initial("T0"), [0, 1])
    b = reduced_density(prepare_initial("TT"), [0, 1])
    for alpha in (2, 3):
        assert sre_alpha(np.kron(a, b), alpha) == pytest.approx(
            sre_alpha(a, alpha) + sre_alpha(b, alpha), abs=1e-10)


def test_stabilizer_states_have_zero_sre(rng):
    table = full_group()
    for _ in range(10):
        s = prepare_initial("0000")
        for _ in range(6):
            k = int(rng.integers(len(table)))
            pair = [(0, 1), (1, 2), (2, 3), (3, 0)][rng.integers(4)]
            s = apply_gate_word(s, table.words[k], pair)
        assert global_sre2(s) == pytest.approx(0, abs=1e-10)
        assert sre_alpha(reduced_density(s, [1, 2]), 2) == pytest.approx(0, abs=1e-10)


def test_two_qubit_fast_path_matches_dense(rng):
    # random Clifford on |0T>: spectrum counts give the same SRE as the density matrix
    table = full_group()
    for _ in range(30):
        k = int(rng.integers(len(table)))
        s = apply_gate_word(prepare_initial("0T"), table.words[k], (0, 1))
        rho = reduced_density(s, [0, 1])
        state = ProductState("0T")
        u = word_unitary(table.words[k])
        vals = []
        for code in range(16):
            p = PauliString.from_codes((code & 3, code >> 2))
            back = u.conj().T @ p.to_matrix() @ u
            # Heisenberg picture: <psi0| U^dag P U |psi0>
            vals.append(np.vdot(prepare_initial("0T").amplitudes,
                                back @ prepare_initial("0T").amplitudes).real)
        counts = spectrum_counts(vals)
        assert sre2_from_counts(counts) == pytest.approx(sre_alpha(rho, 2), abs=1e-10)
        assert (counts.a, counts.b) in {(4, 0), (2, 2), (1, 2), (2, 4), (1, 1), (1, 0), (2, 0)}
        assert state.n_sites == 2


def test_pauli_expectation_matches_product_formula(rng):
    st = ProductState.with_magic(8, [2, 5])
    dense = prepare_initial(st.kinds)
    for _ in range(100):
        p = PauliString.from_codes(rng.integers(4, size=8), int(rng.choice([1, -1])))
        assert pauli_expectation(dense, p) == pytest.approx(expectation(st, p), abs=1e-12)


@pytest.mark.parametrize("magic", [(3,), (1, 4)])
def test_circuit_equivalence_small(magic):
    for kind in ("full_clifford", "restricted"):
        r = check_circuit_equivalence(kind, n_sites=6, depth=5, samples=10, seed=8,
                                      magic_sites=magic)
        assert r.passed, r
