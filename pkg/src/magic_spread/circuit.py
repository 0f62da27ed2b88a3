"""Brickwork schedule, Heisenberg evolution of Pauli strings, light cones.

Layer ``t`` of the circuit is *odd-type* (pairs ``(2k, 2k+1)``) when ``t`` is
odd and *even-type* (pairs ``(2k+1, 2k+2 mod L)``) when ``t`` is even. The ring
is periodic, so the even-type layer contains the wraparound pair ``(L-1, 0)``.

Evolution is incremental: ``Q_tau = A_tau(Q_{tau-1})`` with each new layer
``A_tau`` acting next to the initial state. After ``tau`` steps the state has
seen ``A_tau`` first and ``A_1`` last, so the layer adjacent to the
measurement is always ``A_1``. With ``parity_offset = 0`` the layer type of
``A_tau`` is the parity of ``tau``; with ``parity_offset = 1`` it is flipped.
A readout at time ``t`` has the same layer-type sequence as the forward
brickwork circuit of depth ``t`` exactly when ``(t + parity_offset)`` is odd,
so the Monte Carlo driver reads odd times from offset 0 and even times from
offset 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .clifford import GateTable, gate_table
from .pauli import PauliString
from .rng import KeyedGateStream

GATE_KINDS = ("full_clifford", "restricted")


@dataclass(frozen=True)
class BrickworkSchedule:
    n_sites: int
    depth: int
    gate_kind: str = "full_clifford"

    def __post_init__(self):
        if self.n_sites < 2 or self.n_sites % 2:
            raise ValueError(f"brickwork needs an even number of sites, got {self.n_sites}")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if self.gate_kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.gate_kind!r}")

    @property
    def table(self) -> GateTable:
        return gate_table(self.gate_kind)


def layer_is_odd_type(layer: int, parity_offset: int = 0) -> bool:
    return (layer + parity_offset) % 2 == 1


def pairs_for_layer(layer_index: int, n_sites: int, odd_type: Optional[bool] = None):
    """Disjoint site pairs covered by brickwork layer ``layer_index`` (1-based)."""
    if n_sites % 2:
        raise ValueError(f"brickwork needs an even number of sites, got {n_sites}")
    if layer_index < 1:
        raise ValueError("layers are numbered from 1")
    if odd_type is None:
        odd_type = layer_index % 2 == 1
    if odd_type:
        return [(2 * k, 2 * k + 1) for k in range(n_sites // 2)]
    return [(2 * k + 1, (2 * k + 2) % n_sites) for k in range(n_sites // 2)]


GateChooser = Callable[[int, int], int]


def evolve_trajectory(
    p0: PauliString,
    schedule: BrickworkSchedule,
    stream: KeyedGateStream,
    parity_offset: int = 0,
    chooser: Optional[GateChooser] = None,
) -> list[PauliString]:
    """Heisenberg trajectory ``[Q_0, ..., Q_T]`` of ``p0``.

    ``stream`` supplies the gate index of every slot ``(layer, pair)``; the
    draw is keyed by position so pairs outside the support are skipped
    without changing the circuit. ``chooser(layer, pair) -> index`` replaces
    the stream, e.g. to force identity gates in tests.
    """
    L = schedule.n_sites
    if p0.n_sites != L:
        raise ValueError("string and schedule sizes differ")
    table = schedule.table
    codes = p0.codes()
    sign = p0.sign
    out = [p0]
    for layer in range(1, schedule.depth + 1):
        odd = layer_is_odd_type(layer, parity_offset)
        for k, (a, b) in enumerate(pairs_for_layer(layer, L, odd)):
            c = codes[a] | (codes[b] << 2)
            if c == 0:
                continue
            g = chooser(layer, k) if chooser else stream.gate(parity_offset, layer, k)
            img = int(table.img[g, c])
            if table.sgn[g, c]:
                sign = -sign
            codes[a], codes[b] = img & 3, img >> 2
        out.append(PauliString.from_codes(codes, sign))
    return out


def lightcone_interval(i: int, t: int, last_layer_odd: Optional[bool] = None):
    """Backward light cone ``[s, l]`` of site ``i`` after ``t`` layers.

    ``last_layer_odd`` is the type of the layer adjacent to the measurement;
    it defaults to the forward-circuit convention (odd iff ``t`` is odd).
    Endpoints are returned unwrapped; reduce modulo ``L`` for the ring.
    """
    if t < 1:
        raise ValueError("light cone needs t >= 1")
    if last_layer_odd is None:
        last_layer_odd = t % 2 == 1
    left_member = (i % 2 == 0) == last_layer_odd
    if left_member:
        return i - t + 1, i + t
    return i - t, i + t - 1


def in_interval(site: int, interval, n_sites: int) -> bool:
    """Membership of ``site`` in an unwrapped interval on the ring."""
    s, l = interval
    if l - s + 1 >= n_sites:
        return True
    return (site - s) % n_sites <= l - s


def light_cone_mask(magic_sites, n_sites: int, depth: int):
    """Boolean ``[i, t]``: site ``i`` at time ``t`` can see some magic site."""
    import numpy as np

    mask = np.zeros((n_sites, depth + 1), dtype=bool)
    for i in range(n_sites):
        mask[i, 0] = i in magic_sites
        for t in range(1, depth + 1):
            cone = lightcone_interval(i, t)
            mask[i, t] = any(in_interval(m, cone, n_sites) for m in magic_sites)
    return mask
