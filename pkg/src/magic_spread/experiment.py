"""Monte Carlo driver: single-qubit SRE profiles over random brickwork circuits.

Each sample draws one circuit (per parity chain) from the keyed stream, evolves
X_i and Z_i for every site, and classifies the exact four-entry spectrum of
every ``(t, i)``. Spectra take finitely many values, so the run accumulates
integer class counts; the mean and variance follow from the counts, which
makes results independent of worker count and scheduling.

Samples are split into fixed contiguous batches. Batch means feed the
bootstrap and any statistic that needs cross-site covariance.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import kernels
from .circuit import GATE_KINDS, light_cone_mask
from .clifford import gate_table
from .magic_state import ProductState
from .sre import sre2_from_exponents

log = logging.getLogger(__name__)

FORCE_GATES = {None: kernels.FORCE_NONE, "identity": 0}
DEFAULT_MAX_WORK = 5e9


class ConfigError(ValueError):
    pass


class ResourceError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    n_sites: int = 30
    depth: int = 14
    samples: int = 1000
    seed: int = 0
    magic_sites: tuple[int, ...] = (15,)
    gate_kind: str = "full_clifford"
    gamma_window: Optional[tuple[int, int]] = None
    beta_window: Optional[tuple[int, int]] = None
    residual_margin: int = 2
    norm_threshold: float = 10.0
    n_batches: int = 100
    bootstrap: int = 200
    force_gate: Optional[str] = None
    max_work: float = DEFAULT_MAX_WORK

    def __post_init__(self):
        object.__setattr__(self, "magic_sites", tuple(int(m) for m in self.magic_sites))
        for name in ("gamma_window", "beta_window"):
            w = getattr(self, name)
            if w is not None:
                object.__setattr__(self, name, (int(w[0]), int(w[1])))
        self.validate()

    def validate(self):
        L, T = self.n_sites, self.depth
        if L < 2 or L % 2:
            raise ConfigError(f"n_sites must be even and >= 2, got {L}")
        if T < 0:
            raise ConfigError("depth must be non-negative")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if len(set(self.magic_sites)) != len(self.magic_sites):
            raise ConfigError("magic sites must be distinct")
        if any(not 0 <= m < L for m in self.magic_sites):
            raise ConfigError("magic site out of range")
        if self.gate_kind not in GATE_KINDS:
            raise ConfigError(f"gate_kind must be one of {GATE_KINDS}")
        if self.force_gate not in FORCE_GATES:
            raise ConfigError(f"unknown force_gate {self.force_gate!r}")
        for name in ("gamma_window", "beta_window"):
            w = getattr(self, name)
            if w is not None and not 0 <= w[0] <= w[1] <= T:
                raise ConfigError(f"{name} {w} not within [0, {T}]")
        if self.n_batches < 1 or self.bootstrap < 0:
            raise ConfigError("n_batches must be >= 1 and bootstrap >= 0")

    @property
    def state(self) -> ProductState:
        return ProductState.with_magic(self.n_sites, self.magic_sites)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["magic_sites"] = list(self.magic_sites)
        for name in ("gamma_window", "beta_window"):
            if d[name] is not None:
                d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        for name in ("magic_sites", "gamma_window", "beta_window"):
            if d.get(name) is not None:
                d[name] = tuple(d[name])
        return cls(**d)


@lru_cache(maxsize=8)
def class_values(n_t_sites: int) -> tuple[int, np.ndarray]:
    """(n_codes, SRE value for every packed spectrum code)."""
    n_codes = n_t_sites + 2
    values = np.zeros(n_codes**3)
    for code in range(n_codes**3):
        ks = [(code // n_codes**m) % n_codes - 1 for m in range(3)]
        entries = [0] + [None if k < 0 else k for k in ks]
        values[code] = sre2_from_exponents(entries)
    values.setflags(write=False)
    return n_codes, values


@dataclass
class SpreadProfile:
    """Averaged single-qubit SRE ``mean[i, t]`` (nats) with standard errors."""

    config: RunConfig
    mean: np.ndarray  # (L, T+1)
    sem: np.ndarray  # (L, T+1)
    count: int
    class_counts: np.ndarray  # (T+1, L, n_codes**3) int64
    batch_means: np.ndarray  # (B, L, T+1)
    batch_sizes: np.ndarray  # (B,)
    meta: dict = field(default_factory=dict)

    @property
    def n_sites(self) -> int:
        return self.mean.shape[0]

    @property
    def depth(self) -> int:
        return self.mean.shape[1] - 1

    def resampled_mean(self, batch_weights: np.ndarray) -> np.ndarray:
        w = batch_weights * self.batch_sizes
        return np.tensordot(w, self.batch_means, axes=1) / w.sum()


def _batch_bounds(n: int, n_batches: int):
    b = min(n, n_batches)
    edges = [k * n // b for k in range(b + 1)]
    return list(zip(edges[:-1], edges[1:]))


def _resolve_workers(workers: Optional[int]) -> int:
    if workers is None:
        env = os.environ.get("MAGIC_SPREAD_WORKERS")
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def run_monte_carlo(config: RunConfig, workers: Optional[int] = None) -> SpreadProfile:
    L, T, N = config.n_sites, config.depth, config.samples
    if L * T * N > config.max_work:
        raise ResourceError(f"L*T*N = {L * T * N:.3g} exceeds cap {config.max_work:.3g}")
    table = gate_table(config.gate_kind)
    packed = kernels.pack_table(table.img, table.sgn)
    is_t = config.state.t_mask().astype(np.int64)
    n_codes, values = class_values(len(config.magic_sites))
    force = FORCE_GATES[config.force_gate]
    bounds = _batch_bounds(N, config.n_batches)

    def work(bound):
        counts = np.zeros((T + 1, L, n_codes**3), dtype=np.int64)
        kernels.accumulate(config.seed, bound[0], bound[1], T, is_t, packed,
                           force, n_codes, counts)
        return counts

    n_workers = _resolve_workers(workers)
    log.info("running %d samples in %d batches on %d workers", N, len(bounds), n_workers)
    if n_workers == 1:
        batch_counts = [work(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            batch_counts = list(pool.map(work, bounds))

    total = np.zeros_like(batch_counts[0])
    for c in batch_counts:
        total += c
    sizes = np.array([hi - lo for lo, hi in bounds], dtype=np.int64)
    # C order so reductions match a profile reloaded from disk bit for bit
    batch_means = np.ascontiguousarray(
        np.stack([(c @ values).T / n for c, n in zip(batch_counts, sizes)]))
    mean, sem = _moments(total, values, N)
    return SpreadProfile(config, mean, sem, N, total, batch_means, sizes)


def _moments(counts: np.ndarray, values: np.ndarray, n: int):
    mean = (counts @ values) / n
    dev2 = (values[None, None, :] - mean[..., None]) ** 2
    var = (counts * dev2).sum(axis=-1) / max(n - 1, 1)
    sem = np.sqrt(var / n)
    return mean.T.copy(), sem.T.copy()


def single_site_expectations(config: RunConfig, sample: int) -> np.ndarray:
    """Signed ``<psi0| sigma_i(t) |psi0>`` for one sample, shape (T+1, L, 3)
    with the last axis ordered (X, Y, Z)."""
    L, T = config.n_sites, config.depth
    table = gate_table(config.gate_kind)
    packed = kernels.pack_table(table.img, table.sgn)
    gates = np.zeros((2, T + 1, L // 2), dtype=np.int64)
    kernels.draw_circuit(config.seed, sample, L, T, len(table),
                         FORCE_GATES[config.force_gate], gates)
    out_k = np.zeros((T + 1, L, 3), dtype=np.int64)
    out_s = np.zeros((T + 1, L, 3), dtype=np.int64)
    is_t = config.state.t_mask().astype(np.int64)
    kernels.sample_expectations(gates, T, is_t, packed, out_k, out_s,
                                np.zeros(L, dtype=np.uint8), np.zeros(L, dtype=np.uint8))
    vals = np.where(out_k < 0, 0.0, 2.0 ** (-out_k / 2))
    return np.where(out_s == 1, -vals, vals)


def outside_cone_violations(profile: SpreadProfile) -> int:
    """Number of ``(i, t)`` outside every magic light cone whose samples are
    not all exactly zero."""
    cfg = profile.config
    mask = light_cone_mask(cfg.magic_sites, cfg.n_sites, cfg.depth)
    _, values = class_values(len(cfg.magic_sites))
    nonzero_classes = values != 0
    bad = profile.class_counts[..., nonzero_classes].sum(axis=-1).T > 0
    return int((bad & ~mask).sum())
