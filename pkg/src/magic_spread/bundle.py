"""On-disk output bundle.

A bundle directory holds

* ``profile.csv``: ``t, site, mean_sre, sem, n_samples``
* ``normalized.csv``: ``t, site, a, included_flag``
* ``batches.csv``: per-batch means, needed to rerun the bootstrap fits
* ``fits.json``: the fit report
* ``metadata.json``: config echo, config hash, seed, version, wall time

Every data file starts with a ``# seed=... config_hash=...`` line. Floats are
written with 17 significant digits, so values round-trip exactly and data
files are byte-identical for identical inputs. Wall time and worker count
live only in ``metadata.json``.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import FitReport, normalize_profile
from .experiment import RunConfig, SpreadProfile

PROFILE = "profile.csv"
NORMALIZED = "normalized.csv"
BATCHES = "batches.csv"
FITS = "fits.json"
METADATA = "metadata.json"


def config_hash(config: RunConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _f(x: float) -> str:
    if not math.isfinite(x):
        return "nan"
    return format(float(x), ".17g")


def _header(config: RunConfig) -> str:
    return f"# seed={config.seed} config_hash={config_hash(config)}\n"


def _write_csv(path: Path, config: RunConfig, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(_header(config))
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)


def _read_csv(path: Path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, list(reader)


def _json_dump(obj, path: Path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _json_safe(x):
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_bundle(out_dir, profile: SpreadProfile, report: FitReport, wall_time: float,
                 workers: int) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e}") from e
    cfg = profile.config
    L, T = profile.n_sites, profile.depth
    _write_csv(out / PROFILE, cfg, ["t", "site", "mean_sre", "sem", "n_samples"],
               ([t, i, _f(profile.mean[i, t]), _f(profile.sem[i, t]), profile.count]
                for t in range(T + 1) for i in range(L)))
    norm = normalize_profile(profile)
    _write_csv(out / NORMALIZED, cfg, ["t", "site", "a", "included_flag"],
               ([t, i, _f(norm.a[i, t]), int(norm.included[t])]
                for t in range(T + 1) for i in range(L)))
    _write_csv(out / BATCHES, cfg, ["batch", "size", "t", "site", "mean_sre"],
               ([b, int(profile.batch_sizes[b]), t, i, _f(profile.batch_means[b, i, t])]
                for b in range(len(profile.batch_sizes))
                for t in range(T + 1) for i in range(L)))
    write_fits(out / FITS, cfg, report)
    _json_dump({
        "config": cfg.to_dict(),
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "version": __version__,
        "wall_time_s": wall_time,
        "workers": workers,
        "outside_cone_violations": profile.meta.get("outside_cone_violations"),
    }, out / METADATA)
    return out


def write_fits(path, config: RunConfig, report: FitReport):
    _json_dump({"seed": config.seed, "config_hash": config_hash(config),
                "fits": _json_safe(report.to_dict())}, Path(path))


def read_fits(path) -> FitReport:
    with open(path, encoding="utf-8") as fh:
        return FitReport.from_dict(json.load(fh)["fits"])


def read_config(bundle_dir) -> RunConfig:
    with open(Path(bundle_dir) / METADATA, encoding="utf-8") as fh:
        return RunConfig.from_dict(json.load(fh)["config"])


def read_profile(bundle_dir) -> SpreadProfile:
    """Rebuild the parts of a profile the fits depend on (no class counts)."""
    d = Path(bundle_dir)
    cfg = read_config(d)
    L, T = cfg.n_sites, cfg.depth
    mean = np.zeros((L, T + 1))
    sem = np.zeros((L, T + 1))
    _, rows = _read_csv(d / PROFILE)
    count = cfg.samples
    for t, i, m, s, n in rows:
        mean[int(i), int(t)] = float(m)
        sem[int(i), int(t)] = float(s)
        count = int(n)
    _, rows = _read_csv(d / BATCHES)
    n_batches = max(int(r[0]) for r in rows) + 1
    batch_means = np.zeros((n_batches, L, T + 1))
    sizes = np.zeros(n_batches, dtype=np.int64)
    for b, size, t, i, m in rows:
        batch_means[int(b), int(i), int(t)] = float(m)
        sizes[int(b)] = int(size)
    return SpreadProfile(cfg, mean, sem, count, None, batch_means, sizes)
