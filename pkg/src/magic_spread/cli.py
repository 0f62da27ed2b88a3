"""Command-line entry point.

Subcommands: ``run``, ``analyze``, ``enumerate-group``, ``enumerate-spectra``
and ``oracle-check``. Exit codes: 0 success, 1 configuration error, 2 runtime
or resource error, 3 oracle-check failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .analysis import FitError, analyze, RESIDUAL_MODES
from .bundle import FITS, _json_safe, read_profile, write_bundle, write_fits
from .clifford import full_group
from .experiment import (
    ConfigError,
    ResourceError,
    RunConfig,
    _resolve_workers,
    outside_cone_violations,
    run_monte_carlo,
)
from .sre import enumerate_allowed_two_qubit_spectra_detailed

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_CHECK = 0, 1, 2, 3

log = logging.getLogger("magic_spread")

# flag name -> config key
_FLAG_KEYS = {
    "length": "n_sites",
    "depth": "depth",
    "samples": "samples",
    "seed": "seed",
    "magic_sites": "magic_sites",
    "circuit": "gate_kind",
    "gamma_window": "gamma_window",
    "beta_window": "beta_window",
    "residual_margin": "residual_margin",
    "norm_threshold": "norm_threshold",
    "batches": "n_batches",
    "bootstrap": "bootstrap",
    "force_gate": "force_gate",
    "max_work": "max_work",
}
_INT_KEYS = {"n_sites", "depth", "samples", "seed", "residual_margin", "n_batches", "bootstrap"}
_FLOAT_KEYS = {"norm_threshold", "max_work"}
_LIST_KEYS = {"magic_sites", "gamma_window", "beta_window"}


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(" ", "").split(",") if v)


def _coerce(key: str, value: str):
    value = value.strip()
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _LIST_KEYS:
            return _int_list(value)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    if key == "gate_kind":
        return value.replace("-", "_")
    if key == "force_gate":
        return None if value.lower() in ("", "none") else value
    return value


def parse_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Keys are config field
    names or the long flag names of ``run``."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        key = _FLAG_KEYS.get(key, key)
        if key not in RunConfig.__dataclass_fields__:
            raise ConfigError(f"{path}:{n}: unknown config key {key!r}")
        out[key] = _coerce(key, value)
    return out


def build_config(args) -> RunConfig:
    values = parse_config_file(args.config) if args.config else {}
    for flag, key in _FLAG_KEYS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = _coerce(key, str(v))
    return RunConfig.from_dict(values)


def _add_run_flags(p):
    p.add_argument("--config", help="key = value config file (flags override it)")
    p.add_argument("--length", type=int, help="number of sites L (even)")
    p.add_argument("--depth", type=int, help="circuit depth T")
    p.add_argument("--samples", type=int, help="circuit realizations N")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--magic-sites", help="comma-separated T-state sites, e.g. 9,19")
    p.add_argument("--circuit", choices=["full-clifford", "restricted"])
    p.add_argument("--gamma-window", help="t1,t2 for the decay fit")
    p.add_argument("--beta-window", help="t1,t2 for the width fit")
    p.add_argument("--residual-margin", type=int)
    p.add_argument("--norm-threshold", type=float)
    p.add_argument("--batches", type=int, help="number of sample batches")
    p.add_argument("--bootstrap", type=int, help="bootstrap resamples")
    p.add_argument("--force-gate", choices=["identity"], help="test hook: fix every gate")
    p.add_argument("--max-work", type=float, help="cap on L*T*N")
    p.add_argument("--workers", type=int, help="threads (default: MAGIC_SPREAD_WORKERS or all cores)")
    p.add_argument("--residual-mode", choices=RESIDUAL_MODES, default="neighbors")
    p.add_argument("--out", required=True, help="output bundle directory")


def cmd_run(args) -> int:
    cfg = build_config(args)
    workers = _resolve_workers(args.workers)
    t0 = time.perf_counter()
    profile = run_monte_carlo(cfg, workers=workers)
    violations = outside_cone_violations(profile)
    profile.meta["outside_cone_violations"] = violations
    if violations:
        log.error("%d nonzero entries outside the light cone", violations)
    report = analyze(profile, residual_mode=args.residual_mode)
    wall = time.perf_counter() - t0
    out = write_bundle(args.out, profile, report, wall, workers)
    print(_summary(report))
    print(f"bundle written to {out} ({wall:.1f} s)")
    return EXIT_OK if not violations else EXIT_RUNTIME


def _fmt(x, se=None):
    if x is None:
        return "n/a"
    return f"{x:.4f}" + (f" +- {se:.4f}" if se is not None else "")


def _summary(r) -> str:
    lines = [
        f"Gamma        {_fmt(r.gamma, r.gamma_se)}"
        + (f"  window {tuple(r.gamma_fit['window'])}" if r.gamma_fit else ""),
        f"alpha (int.) {_fmt(r.alpha_interior_mean, r.alpha_interior_se)}"
        f"  ({r.alpha_interior_count} gates)",
        f"beta         {_fmt(r.beta, r.beta_se)}"
        + (f"  window {tuple(r.beta_fit['window'])}" if r.beta_fit else ""),
        f"sigma^2 slope {_fmt(r.variance_slope, r.variance_slope_se)}",
        f"residuals within 3 se: {_fmt(r.residual_within_3se)}",
    ]
    lines += [f"note: {n}" for n in r.notes]
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    bundle = Path(args.bundle)
    try:
        profile = read_profile(bundle)
    except (OSError, KeyError, ValueError) as e:
        raise ConfigError(f"cannot read bundle {bundle}: {e}") from None
    report = analyze(profile, residual_mode=args.residual_mode)
    out = Path(args.out) if args.out else bundle / FITS
    write_fits(out, profile.config, report)
    print(_summary(report))
    print(f"fits written to {out}")
    return EXIT_OK


def cmd_enumerate_group(args) -> int:
    table = full_group()
    n = len(table) if args.limit is None else min(args.limit, len(table))
    rows = []
    for k in range(n):
        g = table.gate(k)
        rows.append({"index": k, "word": list(table.words[k]),
                     "images": {name: str(img) for name, img in
                                zip(("X0", "Z0", "X1", "Z1"), g.images)}})
    if args.format == "json":
        json.dump({"order": len(table), "gates": rows}, sys.stdout, indent=1)
        print()
    else:
        print(f"# {len(table)} two-qubit Clifford adjoint actions")
        for r in rows:
            word = " ".join(r["word"]) or "-"
            imgs = " ".join(f"{k}->{v}" for k, v in r["images"].items())
            print(f"{r['index']}\t{word}\t{imgs}")
    return EXIT_OK


def cmd_enumerate_spectra(args) -> int:
    res = enumerate_allowed_two_qubit_spectra_detailed(structural=not args.physical_only)
    classes = sorted(res.classes)
    if args.format == "json":
        json.dump({"classes": [{"a": a, "b": b, "sre": s} for a, b, s in classes],
                   "patterns_checked": res.patterns_checked,
                   "psd_tests": res.psd_tests,
                   "min_eigen_margin": res.min_margin}, sys.stdout, indent=1)
        print()
    else:
        print("a\tb\tM2")
        for a, b, s in classes:
            print(f"{a}\t{b}\t{s:.10f}")
        print(f"# {res.patterns_checked} patterns, {res.psd_tests} sign assignments, "
              f"min |eigenvalue| off zero {res.min_margin:.3g}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    from .oracle import check_circuit_equivalence

    ok = True
    for kind in ("full_clifford", "restricted"):
        r = check_circuit_equivalence(kind, n_sites=args.length, depth=args.depth,
                                      samples=args.samples, seed=args.seed,
                                      magic_sites=_int_list(args.magic_sites)
                                      if args.magic_sites else None, tol=args.tol)
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {kind}: {r.checks} expectations, max dev "
              f"{r.max_expectation_error:.3g}; global SRE max dev {r.max_sre_error:.3g}")
        ok &= r.passed
    return EXIT_OK if ok else EXIT_CHECK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magic-spread", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="Monte Carlo run plus fits, written as a bundle")
    _add_run_flags(r)
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="rerun the fits on a stored bundle")
    a.add_argument("bundle")
    a.add_argument("--out", help="fits file (default: overwrite the bundle's fits.json)")
    a.add_argument("--residual-mode", choices=RESIDUAL_MODES, default="neighbors")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("enumerate-group", help="list the two-qubit Clifford group")
    g.add_argument("--format", choices=["text", "json"], default="text")
    g.add_argument("--limit", type=int)
    g.set_defaults(func=cmd_enumerate_group)

    s = sub.add_parser("enumerate-spectra", help="allowed two-qubit Pauli spectra")
    s.add_argument("--format", choices=["text", "json"], default="text")
    s.add_argument("--physical-only", action="store_true",
                   help="drop the coset-structure constraint")
    s.set_defaults(func=cmd_enumerate_spectra)

    o = sub.add_parser("oracle-check", help="fast path vs dense statevector")
    o.add_argument("--length", type=int, default=6)
    o.add_argument("--depth", type=int, default=6)
    o.add_argument("--samples", type=int, default=100)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--magic-sites")
    o.add_argument("--tol", type=float, default=1e-10)
    o.set_defaults(func=cmd_oracle_check)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ResourceError, FitError, OSError, MemoryError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
