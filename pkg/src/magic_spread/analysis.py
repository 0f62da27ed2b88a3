"""Derived observables of a spread profile: total SRE decay, normalized
profiles, the discrete diffusion residual, gate input/output ratios, and the
profile width exponent.

Statistical errors of nonlinear quantities come from a bootstrap over the
profile's fixed sample batches, so they are reproducible for a given seed.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .circuit import pairs_for_layer
from .experiment import SpreadProfile


class FitError(ValueError):
    pass


def default_gamma_window(n_sites: int, depth: int) -> tuple[int, int]:
    hi = min(12, (n_sites - 2) // 2, depth)
    return min(4, hi), hi


def total_sre_curve(profile: SpreadProfile):
    """``(M(t), se)`` with the error taken from the spread of batch totals."""
    curve = profile.mean.sum(axis=0)
    totals = profile.batch_means.sum(axis=1)  # (B, T+1)
    return curve, _batch_sem(totals, profile.batch_sizes)


def _batch_sem(values, sizes):
    """Standard error of a size-weighted mean over batches (axis 0)."""
    b = len(sizes)
    if b < 2:
        return np.zeros(values.shape[1:])
    w = sizes / sizes.sum()
    mu = np.tensordot(w, values, axes=1)
    var = np.tensordot(w, (values - mu) ** 2, axes=1) * b / (b - 1)
    return np.sqrt(var / b)


@dataclass
class LineFit:
    slope: float
    intercept: float
    window: tuple[int, int]
    r2: float
    rmse: float


def _line_fit(x, y, window) -> LineFit:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return LineFit(float(slope), float(intercept), tuple(window), r2,
                   float(np.sqrt((resid**2).mean())))


def fit_decay_rate(curve, window) -> tuple[float, LineFit]:
    """Gamma from a least-squares line through ``log M(t)`` on ``window``."""
    t1, t2 = window
    if t2 - t1 < 1:
        raise FitError(f"window {window} needs at least two points")
    t = np.arange(t1, t2 + 1)
    y = np.asarray(curve, dtype=float)[t1 : t2 + 1]
    if np.any(y <= 0):
        raise FitError(f"non-positive M(t) inside window {window}")
    fit = _line_fit(t.astype(float), np.log(y), window)
    return -fit.slope, fit


@dataclass
class NormalizedProfile:
    a: np.ndarray  # (L, T+1), nan where excluded
    included: np.ndarray  # (T+1,) bool
    reasons: dict  # t -> reason for exclusion


def normalize_profile(profile: SpreadProfile, threshold: Optional[float] = None,
                      mean: Optional[np.ndarray] = None) -> NormalizedProfile:
    """``a_i(t) = M_i(t) / M(t)``, excluding times with ``M(t)`` below
    ``threshold`` standard errors. ``mean`` overrides the profile mean
    (used by the bootstrap); inclusion is always decided on the full data."""
    if threshold is None:
        threshold = profile.config.norm_threshold
    curve, se = total_sre_curve(profile)
    included = curve > threshold * se
    included &= curve > 0
    reasons = {int(t): f"M(t)={curve[t]:.3g} below {threshold:g} x se={se[t]:.3g}"
               for t in np.flatnonzero(~included)}
    m = profile.mean if mean is None else mean
    with np.errstate(invalid="ignore", divide="ignore"):
        a = m / m.sum(axis=0)
    a[:, ~included] = np.nan
    return NormalizedProfile(a, included, reasons)


def minimal_image(sites, origin: int, n_sites: int) -> np.ndarray:
    d = (np.asarray(sites) - origin) % n_sites
    return np.where(d > n_sites // 2, d - n_sites, d)


def interior_sites(magic_sites, n_sites: int, t: int, margin: int) -> np.ndarray:
    """Sites with ``|i - m| < t - margin`` for some magic site ``m``."""
    sites = np.arange(n_sites)
    dist = np.min([np.abs(minimal_image(sites, m, n_sites)) for m in magic_sites], axis=0)
    return sites[dist < t - margin]


RESIDUAL_MODES = ("neighbors", "bond")


def recurrence_prediction(a_prev: np.ndarray, t: int, mode: str = "neighbors") -> np.ndarray:
    """Prediction of ``a(t)`` from ``a(t-1)``.

    ``neighbors``: ``(a_{i-1} + a_{i+1}) / 2``, the random-walk recurrence.
    ``bond``: each site gets the mean of the two inputs of the layer-``t`` gate
    it belongs to.
    """
    n = len(a_prev)
    if mode == "neighbors":
        return 0.5 * (np.roll(a_prev, 1) + np.roll(a_prev, -1))
    if mode == "bond":
        out = np.empty(n)
        for i, j in pairs_for_layer(t, n):
            out[i] = out[j] = 0.5 * (a_prev[i] + a_prev[j])
        return out
    raise ValueError(f"unknown residual mode {mode!r}")


@dataclass
class Residual:
    t: int
    sites: np.ndarray
    r: np.ndarray
    max_abs: float
    l1: float


def diffusion_residual(norm: NormalizedProfile, t: int, magic_sites, margin: int = 2,
                       mode: str = "neighbors") -> Residual:
    if t < 1:
        raise ValueError("residual needs t >= 1")
    if not (norm.included[t] and norm.included[t - 1]):
        raise FitError(f"t={t} or t-1 excluded from the normalized profile")
    n = norm.a.shape[0]
    sites = interior_sites(magic_sites, n, t, margin)
    if sites.size == 0:
        raise FitError(f"no interior sites at t={t} with margin {margin}")
    pred = recurrence_prediction(norm.a[:, t - 1], t, mode)
    r = norm.a[sites, t] - pred[sites]
    return Residual(t, sites, r, float(np.abs(r).max()), float(np.abs(r).sum()))


def bootstrap_weights(n_batches: int, n_resamples: int, seed: int) -> np.ndarray:
    """Multinomial batch counts, one row per resample."""
    rng = np.random.default_rng(seed)
    return rng.multinomial(n_batches, np.full(n_batches, 1.0 / n_batches), size=n_resamples)


def resampled_means(profile: SpreadProfile, n_resamples: int, seed: int):
    """Yield bootstrap replicates of the mean profile."""
    if len(profile.batch_sizes) < 2:
        return
    for w in bootstrap_weights(len(profile.batch_sizes), n_resamples, seed):
        yield profile.resampled_mean(w.astype(float))


def gate_io_ratio(profile: SpreadProfile, threshold: Optional[float] = None,
                  mean: Optional[np.ndarray] = None):
    """``alpha[i, t]`` for gates on bonds ``(i, i+1)`` mapping time ``t`` to
    ``t + 1`` (the bonds of layer ``t + 1``).

    Returns ``(alpha, flagged)``; ``alpha`` is nan off-bond and where the
    input sum is below ``threshold`` standard errors (those entries are
    ``flagged``).
    """
    if threshold is None:
        threshold = profile.config.norm_threshold
    m = profile.mean if mean is None else mean
    L, T = profile.n_sites, profile.depth
    alpha = np.full((L, T), np.nan)
    flagged = np.zeros((L, T), dtype=bool)
    sem2 = profile.sem**2
    for t in range(T):
        for i, j in pairs_for_layer(t + 1, L):
            den = profile.mean[i, t] + profile.mean[j, t]
            den_se = math.sqrt(sem2[i, t] + sem2[j, t])
            if den <= 0 or den < threshold * den_se:
                flagged[i, t] = True
                continue
            alpha[i, t] = (m[i, t + 1] + m[j, t + 1]) / (m[i, t] + m[j, t])
    return alpha, flagged


def interior_bonds(profile: SpreadProfile, window, margin: int):
    """``(i, t)`` of bonds in layer ``t + 1`` whose sites are both interior at
    time ``t``, for ``t`` in ``window`` (``t + 1 <= depth``)."""
    cfg = profile.config
    L = profile.n_sites
    out = []
    for t in range(window[0], min(window[1], profile.depth - 1) + 1):
        inner = set(interior_sites(cfg.magic_sites, L, t, margin).tolist())
        out += [(i, t) for i, j in pairs_for_layer(t + 1, L) if i in inner and j in inner]
    return out


def swap_symmetry_check(profile: SpreadProfile):
    """``Delta[i, t] = M_i(t+1) - M_{i+1}(t+1)`` over bonds of layer ``t + 1``
    with batch-based z-scores (nan where the error is zero)."""
    L, T = profile.n_sites, profile.depth
    delta = np.full((L, T), np.nan)
    z = np.full((L, T), np.nan)
    bm = profile.batch_means
    for t in range(T):
        for i, j in pairs_for_layer(t + 1, L):
            delta[i, t] = profile.mean[i, t + 1] - profile.mean[j, t + 1]
            se = _batch_sem(bm[:, i, t + 1] - bm[:, j, t + 1], profile.batch_sizes)
            if se > 0:
                z[i, t] = delta[i, t] / se
            elif delta[i, t] == 0:
                z[i, t] = 0.0
    return delta, z


def profile_width(a: np.ndarray, origin: int) -> np.ndarray:
    """Standard deviation of each column of ``a`` (nan columns stay nan),
    with displacements measured as minimal images from ``origin``."""
    L = a.shape[0]
    d = minimal_image(np.arange(L), origin, L).astype(float)[:, None]
    mu = (a * d).sum(axis=0)
    var = (a * (d - mu) ** 2).sum(axis=0)
    sigma = np.sqrt(np.maximum(var, 0.0))
    sigma[np.isnan(a).any(axis=0)] = np.nan
    return sigma


def default_beta_window(sigma: np.ndarray, included: np.ndarray, n_sites: int):
    """First time with ``sigma >= 1`` up to the last included pre-wrap time."""
    T = len(sigma) - 1
    last = max((t for t in range(T + 1) if included[t] and 2 * t < n_sites), default=0)
    ok = [t for t in range(1, last + 1) if sigma[t] >= 1]
    if not ok:
        raise FitError("profile never reaches unit width")
    return ok[0], last


def fit_width_exponent(sigma, window) -> tuple[float, LineFit]:
    """``beta`` from a line through ``log sigma`` against ``log t``."""
    t1, t2 = window
    if t1 < 1 or t2 - t1 < 1:
        raise FitError(f"bad width window {window}")
    t = np.arange(t1, t2 + 1)
    s = np.asarray(sigma, dtype=float)[t1 : t2 + 1]
    if np.any(~np.isfinite(s)) or np.any(s <= 0):
        raise FitError(f"width window {window} contains excluded or zero-width times")
    fit = _line_fit(np.log(t), np.log(s), window)
    return fit.slope, fit


def fit_variance_slope(sigma, window) -> tuple[float, LineFit]:
    """Slope of ``sigma(t)**2`` against ``t`` (equals ``2D``)."""
    t = np.arange(window[0], window[1] + 1)
    s = np.asarray(sigma, dtype=float)[window[0] : window[1] + 1]
    if np.any(~np.isfinite(s)):
        raise FitError(f"variance window {window} contains excluded times")
    fit = _line_fit(t.astype(float), s**2, window)
    return fit.slope, fit


# -- full report -------------------------------------------------------------------


@dataclass
class FitReport:
    gamma: Optional[float]
    gamma_se: Optional[float]
    gamma_fit: Optional[dict]
    total_sre: list
    total_sre_se: list
    included: list
    residual_window: list
    residual_mode: str
    residual_l1: dict
    residual_max: dict
    residual_within_3se: Optional[float]
    alpha: list  # alpha[i][t], None where undefined
    alpha_flagged: list
    alpha_interior_mean: Optional[float]
    alpha_interior_se: Optional[float]
    alpha_interior_count: int
    width: list
    beta: Optional[float]
    beta_se: Optional[float]
    beta_fit: Optional[dict]
    variance_slope: Optional[float]
    variance_slope_se: Optional[float]
    swap_max_abs_z: Optional[float]
    swap_fraction_within_3: Optional[float]
    bootstrap: int
    bootstrap_seed: int
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> FitReport:
        return cls(**d)


def _nan_to_none(x):
    if isinstance(x, np.ndarray):
        return [_nan_to_none(v) for v in x.tolist()]
    if isinstance(x, list):
        return [_nan_to_none(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _std(values):
    v = np.asarray([x for x in values if x is not None and np.isfinite(x)])
    return float(v.std(ddof=1)) if v.size > 1 else None


def analyze(profile: SpreadProfile, residual_window=(4, 10), residual_mode: str = "neighbors",
            bootstrap_seed: Optional[int] = None) -> FitReport:
    """Run every fit on a profile; bootstrap errors over sample batches."""
    cfg = profile.config
    L, T = profile.n_sites, profile.depth
    seed = cfg.seed if bootstrap_seed is None else bootstrap_seed
    notes = []
    curve, curve_se = total_sre_curve(profile)
    norm = normalize_profile(profile)
    origin = cfg.magic_sites[0] if cfg.magic_sites else 0
    if len(cfg.magic_sites) > 1:
        notes.append("width measured from the first magic site")

    gwin = cfg.gamma_window or default_gamma_window(L, T)
    gamma = gamma_fit = None
    try:
        gamma, gf = fit_decay_rate(curve, gwin)
        gamma_fit = asdict(gf)
    except FitError as e:
        notes.append(f"gamma fit failed: {e}")

    sigma = profile_width(norm.a, origin)
    beta = beta_fit = var_slope = None
    bwin = None
    try:
        bwin = cfg.beta_window or default_beta_window(sigma, norm.included, L)
        beta, bf = fit_width_exponent(sigma, bwin)
        beta_fit = asdict(bf)
        var_slope, _ = fit_variance_slope(sigma, bwin)
    except FitError as e:
        notes.append(f"width fit failed: {e}")

    rwin = (residual_window[0], min(residual_window[1], T))
    residuals = {}
    for t in range(rwin[0], rwin[1] + 1):
        try:
            residuals[t] = diffusion_residual(norm, t, cfg.magic_sites, cfg.residual_margin,
                                              residual_mode)
        except FitError as e:
            notes.append(f"residual t={t}: {e}")

    alpha, flagged = gate_io_ratio(profile)
    bonds = [(i, t) for i, t in interior_bonds(profile, gwin, cfg.residual_margin)
             if np.isfinite(alpha[i, t])]
    alpha_mean = float(np.mean([alpha[i, t] for i, t in bonds])) if bonds else None

    # bootstrap over batches
    g_bs, b_bs, v_bs, a_bs, r_bs = [], [], [], [], []
    for m in resampled_means(profile, cfg.bootstrap, seed):
        c = m.sum(axis=0)
        if gamma is not None:
            try:
                g_bs.append(fit_decay_rate(c, gwin)[0])
            except FitError:
                pass
        nb = normalize_profile(profile, mean=m)
        if beta is not None:
            s = profile_width(nb.a, origin)
            try:
                b_bs.append(fit_width_exponent(s, bwin)[0])
                v_bs.append(fit_variance_slope(s, bwin)[0])
            except FitError:
                pass
        if bonds:
            ab, _ = gate_io_ratio(profile, mean=m)
            a_bs.append(float(np.mean([ab[i, t] for i, t in bonds])))
        r_bs.append({t: diffusion_residual(nb, t, cfg.magic_sites, cfg.residual_margin,
                                           residual_mode).r for t in residuals})

    within = None
    if residuals and len(r_bs) > 1:
        ok = total = 0
        for t, res in residuals.items():
            se = np.stack([r[t] for r in r_bs]).std(axis=0, ddof=1)
            ok += int((np.abs(res.r) <= 3 * se).sum())
            total += res.r.size
        within = ok / total

    _, z = swap_symmetry_check(profile)
    zb = [z[i, t] for i, t in interior_bonds(profile, (1, T), cfg.residual_margin)
          if np.isfinite(z[i, t])]

    return FitReport(
        gamma=gamma,
        gamma_se=_std(g_bs),
        gamma_fit=gamma_fit,
        total_sre=curve.tolist(),
        total_sre_se=curve_se.tolist(),
        included=norm.included.tolist(),
        residual_window=list(rwin),
        residual_mode=residual_mode,
        residual_l1={str(t): r.l1 for t, r in residuals.items()},
        residual_max={str(t): r.max_abs for t, r in residuals.items()},
        residual_within_3se=within,
        alpha=_nan_to_none(alpha),
        alpha_flagged=flagged.tolist(),
        alpha_interior_mean=alpha_mean,
        alpha_interior_se=_std(a_bs),
        alpha_interior_count=len(bonds),
        width=_nan_to_none(sigma),
        beta=beta,
        beta_se=_std(b_bs),
        beta_fit=beta_fit,
        variance_slope=var_slope,
        variance_slope_se=_std(v_bs),
        swap_max_abs_z=float(np.max(np.abs(zb))) if zb else None,
        swap_fraction_within_3=float(np.mean(np.abs(zb) <= 3)) if zb else None,
        bootstrap=cfg.bootstrap,
        bootstrap_seed=seed,
        notes=notes,
    )
