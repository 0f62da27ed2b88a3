"""Dense statevector reference for small systems.

Basis ordering is little-endian: site ``j`` is bit ``j`` of the amplitude
index, so ``|q1 q0>`` has index ``2*q1 + q0``. Two-site gate unitaries act
with their qubit 0 on the first site of the pair, matching the Heisenberg
fast path.

Nothing here shares code with the fast path beyond the gate words and the
seeded gate draws, which is what makes the cross-checks meaningful.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .circuit import layer_is_odd_type, pairs_for_layer
from .clifford import gate_table, primitive_unitary, word_unitary
from .experiment import FORCE_GATES, RunConfig, single_site_expectations
from .magic_state import T, ZERO
from .pauli import PauliString

MAX_SITES = 12
MAX_GLOBAL_SRE_SITES = 10
MAX_REDUCED_SITES = 4

T_GATE = np.diag([1, np.exp(1j * np.pi / 4)])
T_VECTOR = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)


@dataclass
class DenseState:
    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_sites > MAX_SITES:
            raise ValueError(f"dense oracle is capped at {MAX_SITES} sites")
        if self.amplitudes.shape != (2**self.n_sites,):
            raise ValueError("amplitude vector has the wrong length")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> DenseState:
        return DenseState(self.n_sites, self.amplitudes.copy())


def prepare_initial(kinds) -> DenseState:
    """Product of |0> and |T> factors, one per site (string or list of kinds)."""
    kinds = list(kinds)
    if len(kinds) > MAX_SITES:
        raise ValueError(f"dense oracle is capped at {MAX_SITES} sites")
    zero = np.array([1, 0], dtype=complex)
    psi = np.ones(1, dtype=complex)
    for k in kinds:
        if k not in (ZERO, T):
            raise ValueError(f"unknown site kind {k!r}")
        # higher sites are more significant, so they go on the left
        psi = np.kron(T_VECTOR if k == T else zero, psi)
    return DenseState(len(kinds), psi)


def apply_unitary(state: DenseState, u: np.ndarray, sites) -> DenseState:
    """Apply a ``2**k x 2**k`` unitary whose qubit ``q`` acts on ``sites[q]``."""
    sites = list(sites)
    k = len(sites)
    n = state.n_sites
    if len(set(sites)) != k or any(not 0 <= s < n for s in sites):
        raise ValueError(f"invalid sites {sites} for {n} sites")
    # tensor axis a holds site n-1-a; the unitary's first axis is its top qubit
    axes = [n - 1 - s for s in reversed(sites)]
    psi = state.amplitudes.reshape((2,) * n)
    out = np.tensordot(u.reshape((2,) * (2 * k)), psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return DenseState(n, out.reshape(-1))


def apply_gate_word(state: DenseState, word, pair) -> DenseState:
    if not word:
        return state.copy()
    return apply_unitary(state, word_unitary(word), pair)


def apply_single(state: DenseState, label: str, site: int) -> DenseState:
    """Single-site H, S or T."""
    if label == "T":
        u = T_GATE
    else:
        u = primitive_unitary(label + "0")[:2, :2]
    return apply_unitary(state, u, [site])


def reduced_density(state: DenseState, sites) -> np.ndarray:
    """Reduced density matrix with ``sites[0]`` as the least significant bit."""
    sites = list(sites)
    k = len(sites)
    if k > MAX_REDUCED_SITES:
        raise ValueError(f"at most {MAX_REDUCED_SITES} sites")
    n = state.n_sites
    keep = [n - 1 - s for s in reversed(sites)]
    psi = np.moveaxis(state.amplitudes.reshape((2,) * n), keep, list(range(k)))
    m = psi.reshape(2**k, -1)
    return m @ m.conj().T


def pauli_apply(state: DenseState, p: PauliString) -> np.ndarray:
    """``p |psi>`` for ``p = i**k X**x Z**z`` using bit operations."""
    idx = np.arange(2**state.n_sites)
    parity = np.zeros(idx.shape, dtype=np.int64)
    zm = idx & p.z
    while np.any(zm):
        parity ^= zm & 1
        zm >>= 1
    out = np.empty_like(state.amplitudes)
    out[idx ^ p.x] = np.where(parity, -1, 1) * state.amplitudes
    return (1j) ** p.phase_exp * out


def pauli_expectation(state: DenseState, p: PauliString) -> float:
    val = np.vdot(state.amplitudes, pauli_apply(state, p))
    return float(val.real)


def pauli_spectrum(rho: np.ndarray) -> np.ndarray:
    """Signed ``Tr[rho P]`` over all ``4**n`` strings (code order)."""
    n = int(round(math.log2(rho.shape[0])))
    out = np.empty(4**n)
    for code in range(4**n):
        p = PauliString.from_codes([(code >> (2 * j)) & 3 for j in range(n)])
        out[code] = np.trace(rho @ p.to_matrix()).real
    return out


def sre_alpha(rho: np.ndarray, alpha: float) -> float:
    """Order-``alpha`` SRE of a density matrix from its Pauli moments and the
    second Renyi entropy."""
    if alpha == 1:
        raise ValueError("alpha = 1 is not defined by this formula")
    n = int(round(math.log2(rho.shape[0])))
    c = pauli_spectrum(rho)
    a_alpha = np.sum(np.abs(c) ** (2 * alpha)) / 2**n
    s2 = -math.log(float(np.trace(rho @ rho).real))
    return (math.log(a_alpha) + s2) / (1 - alpha)


def _walsh_hadamard(f: np.ndarray, n: int) -> np.ndarray:
    """Unnormalized transform along the last axis of length ``2**n``."""
    shape = f.shape
    g = f.reshape(shape[:-1] + (2,) * n)
    for ax in range(len(shape) - 1, len(shape) - 1 + n):
        a = np.take(g, 0, axis=ax)
        b = np.take(g, 1, axis=ax)
        g = np.stack([a + b, a - b], axis=ax)
    return g.reshape(shape)


def global_pauli_spectrum(state: DenseState) -> np.ndarray:
    """``|<psi| X**x Z**z |psi>|`` for all ``(x, z)``, shape ``(2**n, 2**n)``."""
    n = state.n_sites
    if n > MAX_GLOBAL_SRE_SITES:
        raise ValueError(f"global spectrum is capped at {MAX_GLOBAL_SRE_SITES} sites")
    psi = state.amplitudes
    idx = np.arange(2**n)
    f = np.conj(psi[idx[:, None] ^ idx[None, :]]) * psi[None, :]
    return np.abs(_walsh_hadamard(f, n))


def global_sre2(state: DenseState) -> float:
    """Order-2 SRE of the pure global state."""
    c = global_pauli_spectrum(state)
    n = state.n_sites
    return -math.log(float(np.sum(c**4)) / 2**n)


# -- circuit equivalence ---------------------------------------------------------


def circuit_gates(config: RunConfig, sample: int) -> np.ndarray:
    """Gate indices ``[chain, layer, pair]`` of one sample, as the kernels draw them."""
    L, T_ = config.n_sites, config.depth
    gates = np.zeros((2, T_ + 1, max(L // 2, 1)), dtype=np.int64)
    kernels.draw_circuit(config.seed, sample, L, T_, len(gate_table(config.gate_kind)),
                         FORCE_GATES[config.force_gate], gates)
    return gates


def readout_chain(t: int) -> int:
    return 0 if t % 2 == 1 else 1


def evolve_dense(config: RunConfig, sample: int, t: int,
                 gates: Optional[np.ndarray] = None) -> DenseState:
    """State whose expectations equal the fast path's readout at time ``t``.

    The chain used at time ``t`` has layer ``t`` next to the state, so the
    layers act on the state in the order ``t, t-1, ..., 1``.
    """
    if gates is None:
        gates = circuit_gates(config, sample)
    words = gate_table(config.gate_kind).words
    chain = readout_chain(t)
    state = prepare_initial(config.state.kinds)
    for layer in range(t, 0, -1):
        odd = layer_is_odd_type(layer, chain)
        for k, pair in enumerate(pairs_for_layer(layer, config.n_sites, odd)):
            state = apply_gate_word(state, words[gates[chain, layer, k]], pair)
    return state


@dataclass
class OracleResult:
    gate_kind: str
    samples: int
    checks: int
    max_expectation_error: float
    max_sre_error: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_expectation_error <= self.tol and self.max_sre_error <= self.tol


_SINGLE = {0: (1, 0, 0), 1: (1, 1, 1), 2: (0, 0, 1)}  # m -> (x, phase, z) for X, Y, Z


def check_circuit_equivalence(gate_kind: str = "full_clifford", n_sites: int = 6,
                              depth: int = 6, samples: int = 100, seed: int = 0,
                              magic_sites=None, tol: float = 1e-10) -> OracleResult:
    """Compare every fast-path single-site expectation with dense evolution and
    check that the global SRE stays ``log(4/3)`` per T site."""
    if magic_sites is None:
        magic_sites = (n_sites // 2,)
    cfg = RunConfig(n_sites=n_sites, depth=depth, samples=samples, seed=seed,
                    magic_sites=tuple(magic_sites), gate_kind=gate_kind)
    target = len(cfg.magic_sites) * math.log(4 / 3)
    strings = [[PauliString(n_sites, _SINGLE[m][0] << i, _SINGLE[m][2] << i, _SINGLE[m][1])
                for m in range(3)] for i in range(n_sites)]
    max_e = max_s = 0.0
    checks = 0
    for sample in range(samples):
        fast = single_site_expectations(cfg, sample)
        gates = circuit_gates(cfg, sample)
        for t in range(depth + 1):
            state = evolve_dense(cfg, sample, t, gates)
            max_s = max(max_s, abs(global_sre2(state) - target))
            for i in range(n_sites):
                for m in range(3):
                    ref = pauli_expectation(state, strings[i][m])
                    max_e = max(max_e, abs(ref - fast[t, i, m]))
                    checks += 1
    return OracleResult(gate_kind, samples, checks, max_e, max_s, tol)
