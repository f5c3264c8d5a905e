"""Command-line front end: ``spars {fit,compare,spectra,generate}``.

Exit codes: 0 success, 2 usage, 3 I/O, 4 parse, 5 numerical stage failure.
Settings resolve as CLI flag > ``--config`` file (flat ``key = value``) >
``SPARS_SEED`` (seed only) > built-in default.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import generators
from .errors import CsvParseError, ModelFormatError, SparsError
from .linear_ar import fit_dense_ar
from .mixer_model import (SparsConfig, fit_spars, holdout_predictions, load_model,
                          rmse, rolling_forecast, save_model, warm_states, window_matrix)
from .signal_core import load_csv, save_csv, window
from .spectra_diag import ap_diagnose

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_PARSE, EXIT_NUMERIC = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


DEFAULTS = {
    "column": None,
    "delta": 1e-8,
    "lag": None,
    "split": "0.5,0.25",
    "hidden": 8,
    "blocks": 2,
    "epochs": 500,
    "lr": 0.2,
    "seed": 0,
    "horizon": 24,
    "out": ".",
    "epsilon": None,
}
CASTS = {"delta": float, "lag": int, "hidden": int, "blocks": int, "epochs": int,
         "lr": float, "seed": int, "horizon": int, "epsilon": float}


def read_config(path) -> dict:
    out = {}
    lines = Path(path).read_text().splitlines()
    for k, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{k}: expected 'key = value'")
        key, val = (p.strip() for p in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def resolve(args) -> dict:
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    settings = {}
    for key, default in DEFAULTS.items():
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            val = cli_val
        elif key in cfg:
            val = cfg[key]
        elif key == "seed" and os.environ.get("SPARS_SEED"):
            val = os.environ["SPARS_SEED"]
        else:
            val = default
        if val is not None and key in CASTS:
            try:
                val = CASTS[key](val)
            except ValueError:
                raise UsageError(f"invalid value for {key}: {val!r}") from None
        settings[key] = val
    settings["input"] = getattr(args, "input", None) or cfg.get("input")
    try:
        fit_frac, mix_frac = (float(x) for x in str(settings["split"]).split(","))
    except ValueError:
        raise UsageError(f"--split expects two fractions like 0.5,0.25, got {settings['split']!r}") from None
    settings["fit_fraction"], settings["mix_fraction"] = fit_frac, mix_frac
    return settings


def spars_config(st: dict) -> SparsConfig:
    try:
        return SparsConfig(
            lag=st["lag"], delta=st["delta"], fit_fraction=st["fit_fraction"],
            mix_fraction=st["mix_fraction"], hidden=st["hidden"], blocks=st["blocks"],
            epochs=st["epochs"], learning_rate=st["lr"], seed=st["seed"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _need_input(st):
    if not st["input"]:
        raise UsageError("an input CSV is required (--input)")
    return load_csv(st["input"], st["column"])


def _default_epsilon(values, st):
    if st["epsilon"] is not None:
        return st["epsilon"]
    return 0.01 * float(np.ptp(values))


def write_report(path: Path, items) -> None:
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    lines = [f"{k}={v}" for k, v in items] + [f"timestamp={stamp}"]
    path.write_text("\n".join(lines) + "\n")


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (list, tuple, np.ndarray)):
        return ",".join(_fmt(float(v)) for v in x)
    return str(x)


def _closed_loop_rmse(model, values, horizon):
    n_fit, n_mix, n = model.splits
    start = n_fit + n_mix
    h = min(horizon, n - start)
    if h < 1 or start < model.L:
        return float("nan")
    seed = window(values, model.L, start)
    states = warm_states(model, values[:start])
    res = rolling_forecast(model, seed, h, truth=values[start:start + h], states=states)
    return res.rmse


def cmd_fit(st: dict) -> int:
    series = _need_input(st)
    model = fit_spars(series, spars_config(st))
    out = Path(st["out"])
    out.mkdir(parents=True, exist_ok=True)
    save_model(model, out / "model.json")
    p, t = holdout_predictions(model, series)
    held = rmse(p, t)
    ar_nnz = model.ar.nnz if model.ar else 0
    items = [
        ("command", "fit"),
        ("input", st["input"]),
        ("samples", len(series)),
        ("L", model.L),
        ("lag_fallback", model.lag_fallback),
        ("ar_nnz", ar_nnz),
    ]
    for rec in model.fit_report:
        items.append((f"stage.{rec.order}.{rec.stage}.residual", _fmt(float(rec.residual))))
        items.append((f"stage.{rec.order}.{rec.stage}.nnz", rec.nnz))
    items += [
        ("mix_weights", _fmt(model.mix)),
        ("heldout_count", t.size),
        ("heldout_rmse", _fmt(held)),
        ("rolling_rmse", _fmt(_closed_loop_rmse(model, series.values, st["horizon"]))),
    ]
    write_report(out / "fit_report.txt", items)
    print(f"fit: L={model.L} ar_nnz={ar_nnz} mix={_fmt(model.mix)} heldout_rmse={held:.6g}")
    print(f"wrote {out / 'model.json'} and {out / 'fit_report.txt'}")
    return EXIT_OK


def cmd_compare(st: dict) -> int:
    series = _need_input(st)
    v = series.values
    model = fit_spars(series, spars_config(st))
    n_fit, n_mix, n = model.splits
    start = n_fit + n_mix
    dense = fit_dense_ar(v[:n_fit], model.L)
    X = window_matrix(v, model.L)
    dense_pred = (X[:, ::-1] @ dense.c)[start - model.L:]
    p, t = holdout_predictions(model, series)
    spars_rmse, ar_rmse = rmse(p, t), rmse(dense_pred, t)
    eps = _default_epsilon(v, st)
    diag = {}
    for name, coeffs in (("spars", model.ar), ("ar", dense)):
        try:
            rep = ap_diagnose(coeffs, series, eps)
            diag[name] = (rep.mimicry_norm, rep.spectral_radius)
        except (SparsError, ValueError):
            diag[name] = (float("nan"), float("nan"))
    items = [
        ("command", "compare"),
        ("input", st["input"]),
        ("L", model.L),
        ("spars_rmse", _fmt(spars_rmse)),
        ("ar_rmse", _fmt(ar_rmse)),
        ("spars_nnz", model.ar.nnz),
        ("ar_nnz", dense.nnz),
        ("spars_mimicry_norm", _fmt(diag["spars"][0])),
        ("ar_mimicry_norm", _fmt(diag["ar"][0])),
        ("spars_spectral_radius", _fmt(diag["spars"][1])),
        ("ar_spectral_radius", _fmt(diag["ar"][1])),
    ]
    out = Path(st["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_report(out / "compare_report.txt", items)
    print(f"{'model':<8}{'RMSE':>16}{'nnz':>8}")
    print(f"{'SpARS':<8}{spars_rmse:>16.10f}{model.ar.nnz:>8}")
    print(f"{'AR':<8}{ar_rmse:>16.10f}{dense.nnz:>8}")
    return EXIT_OK


def _write_points(path: Path, z) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im"])
        for c in np.asarray(z, dtype=complex):
            w.writerow([repr(float(c.real)), repr(float(c.imag))])


def cmd_spectra(st: dict, model_path: Optional[str]) -> int:
    if not model_path:
        raise UsageError("a model file is required (--model)")
    model = load_model(model_path)
    series = _need_input(st)
    rep = ap_diagnose(model, series, _default_epsilon(series.values, st))
    out = Path(st["out"])
    out.mkdir(parents=True, exist_ok=True)
    _write_points(out / "spectrum.csv", rep.eigenvalues)
    _write_points(out / "power_spectrum.csv", rep.power_eigenvalues)
    meta = {
        "T": rep.T, "k": rep.k, "S": rep.S, "anchor": rep.s,
        "mimicry_norm": repr(rep.mimicry_norm),
        "spectral_radius": repr(rep.spectral_radius),
        "max_unit_root_defect": repr(rep.max_unit_root_defect),
        "inside_unit_disk": str(rep.inside_unit_disk).lower(),
        "tail_detected": str(rep.tail_detected).lower(),
        "anchor_fallback": str(rep.anchor_fallback).lower(),
        "unit_circle_reference": "true",
    }
    with (out / "spectrum_meta.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(meta))
        w.writerow(list(meta.values()))
    print(f"spectra: T={rep.T} k={rep.k} mimicry_norm={rep.mimicry_norm:.3g} "
          f"spectral_radius={rep.spectral_radius:.6g}")
    return EXIT_OK


def cmd_generate(args) -> int:
    params = {"n": args.n}
    if args.kind in ("sine", "aep", "noisy-periodic") and args.period is not None:
        params["period"] = args.period
    if args.amplitude is not None and args.kind != "recurrence":
        params["amplitude"] = args.amplitude
    if args.kind in ("aep", "noisy-periodic"):
        seed = args.seed if args.seed is not None else int(os.environ.get("SPARS_SEED", 0))
        params["seed"] = seed
    if args.kind == "aep":
        if args.head is not None:
            params["head"] = args.head
        if args.epsilon is not None:
            params["epsilon"] = args.epsilon
    if args.kind == "noisy-periodic" and args.noise is not None:
        params["noise"] = args.noise
    if args.kind == "recurrence":
        if args.coefficients:
            params["coefficients"] = [float(c) for c in args.coefficients.split(",")]
        if args.seed_values:
            params["seed_values"] = [float(c) for c in args.seed_values.split(",")]
    try:
        series = generators.generate(args.kind, **params)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    save_csv(series, args.out)
    print(f"generate: {args.kind} n={len(series)} -> {args.out}")
    return EXIT_OK


def _add_common(p):
    p.add_argument("--config", help="flat key = value settings file")
    p.add_argument("--input", help="CSV with one sample per row")
    p.add_argument("--column", help="value column (header name or 0-based index)")
    p.add_argument("--delta", type=float, help="sparse solver threshold (default 1e-8)")
    p.add_argument("--lag", type=int, help="override the ACF lag estimate")
    p.add_argument("--split", help="fit and mixing fractions, e.g. 0.5,0.25")
    p.add_argument("--hidden", type=int, help="GRU hidden size m")
    p.add_argument("--blocks", type=int, help="number of GRU blocks")
    p.add_argument("--epochs", type=int, help="GRU training epochs")
    p.add_argument("--lr", type=float, help="GRU learning rate")
    p.add_argument("--seed", type=int, help="random seed (falls back to SPARS_SEED)")
    p.add_argument("--horizon", type=int, help="closed-loop forecast horizon")
    p.add_argument("--epsilon", type=float, help="AEP tolerance (default 1%% of the range)")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spars", description="Semilinear sparse signal models")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("fit", help="fit a SpARS model and report held-out error"))
    _add_common(sub.add_parser("compare", help="SpARS vs dense least-squares AR"))
    sp = sub.add_parser("spectra", help="eigenvalue point sets of the AP section")
    _add_common(sp)
    sp.add_argument("--model", help="model file written by 'spars fit'")
    g = sub.add_parser("generate", help="write a synthetic CSV fixture")
    g.add_argument("kind", choices=generators.KINDS)
    g.add_argument("--n", type=int, default=400)
    g.add_argument("--period", type=int)
    g.add_argument("--head", type=int)
    g.add_argument("--epsilon", type=float)
    g.add_argument("--noise", type=float)
    g.add_argument("--amplitude", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--coefficients", help="recurrence coefficients c_1,...,c_L")
    g.add_argument("--seed-values", help="recurrence seed samples, oldest first")
    g.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "generate":
            return cmd_generate(args)
        st = resolve(args)
        if args.command == "fit":
            return cmd_fit(st)
        if args.command == "compare":
            return cmd_compare(st)
        return cmd_spectra(st, args.model)
    except UsageError as exc:
        print(f"spars: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CsvParseError, ModelFormatError) as exc:
        print(f"spars: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"spars: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SparsError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"spars: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
