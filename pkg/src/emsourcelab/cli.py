"""Configuration-driven experiment harness.

Subcommands synthesize boundary records, reconstruct sources from them,
sweep the (band, noise) grid, and verify the growth and continuation
inequalities.  All artifacts are plain CSV (17 significant digits, header
row) and JSON manifests carrying the hash of the effective configuration,
so a rerun with the same configuration and seed is byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .boundary import (NoiseSpec, add_noise, load_record, measurement_epsilon,
                       record_boundary_data, save_record)
from .errors import (AccuracyError, BandwidthError, ConfigError,
                     GeometryError, RegionError)
from .forward import (huygens_horizon, huygens_residual, sample_ball_points,
                      sphere_snapshot)
from .geometry import MediumParams, SphereGrid, TimeGrid
from .oracle import sobolev_h1_norm, spatial_l2_norm
from .probing import (ReconstructionGrid, assemble_spectrum_ip1,
                      reconstruct_source)
from .sources import build_source
from .stability import (choose_s, continuation_check, continuation_exponent,
                        envelope, lowpass_energy, lowpass_energy_bound,
                        sweep_envelope)

THREADS_ENV = "EMSOURCELAB_THREADS"
_EPS_CEILING = math.exp(-1.0)

_SCHEMA = {
    "problem": None,
    "source": "opaque",       # validated by build_source
    "medium": {"n": None, "n_grid": None},
    "sphere": {"radius": None, "n_polar": None, "n_azimuth": None},
    "time": {"horizon": None, "count": None},
    "directions": {"n_polar": None, "n_azimuth": None},
    "radial": {"count": None},
    "reconstruction": {"resolution": None},
    "volume_resolution": None,
    "bands": None,
    "noise": None,
    "seed": None,
    "out_dir": None,
    "tolerances": {"delta_min": None},
    "lemma": {"n_real": None, "n_complex": None, "s_max": None,
              "eps": None, "corrupt": None, "band": None},
}

_DEFAULTS = {
    "problem": "ip1",
    "medium": {"n": 1.0},
    "sphere": {"radius": 1.0, "n_polar": 24, "n_azimuth": 48},
    "time": {"horizon": 5.0, "count": 384},
    "directions": {"n_polar": 16, "n_azimuth": 32},
    "radial": {"count": 24},
    "reconstruction": {"resolution": 20},
    "volume_resolution": 40,
    "noise": [0.0],
    "seed": 7,
    "tolerances": {"delta_min": 1e-8},
    "lemma": {"n_real": 20, "n_complex": 30, "s_max": 6.0, "eps": 0.15,
              "corrupt": False, "band": 2.0},
}


def _check_keys(cfg: dict, schema: dict, path: str = "config") -> None:
    for key, value in cfg.items():
        if key not in schema:
            raise ConfigError(f"unknown key {path}.{key}")
        sub = schema[key]
        if isinstance(sub, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path}.{key} must be a mapping")
            _check_keys(value, sub, f"{path}.{key}")


def _merged(cfg: dict) -> dict:
    out = json.loads(json.dumps(_DEFAULTS))
    for key, value in cfg.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key].update(value)
        else:
            out[key] = value
    return out


def load_config(path, seed_override=None) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(raw, _SCHEMA)
    cfg = _merged(raw)
    if seed_override is not None:
        cfg["seed"] = int(seed_override)
    if "source" not in cfg:
        raise ConfigError("config needs a 'source' section")
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    if cfg["problem"] not in ("ip1", "ip2", "ip3"):
        raise ConfigError(f"unknown problem {cfg['problem']!r}")
    n_values = cfg["medium"].get("n_grid")
    if n_values is None:
        n_values = [cfg["medium"].get("n", 1.0)]
    if any(n <= 0 for n in n_values):
        raise ConfigError("medium n must be positive")
    horizon = cfg["time"]["horizon"]
    radius = cfg["sphere"]["radius"]
    source = build_source(cfg["source"])
    for n in n_values:
        needed = source.duration + 2.0 * math.sqrt(n) * radius
        if not horizon > needed:
            raise ConfigError(
                f"time horizon {horizon} too short for n = {n}: need "
                f"> {needed:.6g} (source duration + two-way travel)")
    for band in cfg.get("bands", []):
        if not band > 1.0:
            raise ConfigError(f"bands must exceed 1, got {band}")
    for eps in cfg.get("noise", []):
        if eps < 0.0:
            raise ConfigError("noise levels must be nonnegative")
        if eps > 0.0 and eps >= _EPS_CEILING:
            raise ConfigError(
                f"noise level {eps} must stay below e^-1 for envelope "
                "evaluation")


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _fmt(value) -> str:
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def write_csv(path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _grids(cfg: dict):
    sphere = SphereGrid.build(cfg["sphere"]["radius"],
                              cfg["sphere"]["n_polar"],
                              cfg["sphere"]["n_azimuth"])
    tgrid = TimeGrid.build(cfg["time"]["horizon"], cfg["time"]["count"])
    return sphere, tgrid


def _media(cfg: dict):
    grid = cfg["medium"].get("n_grid")
    if grid is not None:
        return [MediumParams(n=float(n)) for n in grid]
    return [MediumParams(n=float(cfg["medium"].get("n", 1.0)))]


def cmd_forward(cfg: dict, out_dir: Path) -> int:
    source = build_source(cfg["source"])
    sphere, tgrid = _grids(cfg)
    media = _media(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for idx, medium in enumerate(media):
        record = record_boundary_data(source, medium, sphere, tgrid,
                                      resolution=cfg["volume_resolution"])
        name = f"record_{idx:03d}"
        save_record(record, out_dir / name)
        eps = measurement_epsilon(record)
        horizon = huygens_horizon(source, medium, sphere.radius)
        check_time = min(tgrid.horizon, horizon + 0.5)
        points = sample_ball_points(sphere.radius, 100, seed=cfg["seed"])
        residual, peak = huygens_residual(
            source, medium, points, check_time,
            resolution=min(cfg["volume_resolution"], 40))
        records.append({
            "path": name,
            "medium_n": medium.n,
            "epsilon": eps,
            "huygens": {
                "time": check_time,
                "residual": residual,
                "peak": peak,
                "relative": residual / peak if peak > 0.0 else 0.0,
            },
        })
    snap_t = source.duration
    snap_pts, snap = sphere_snapshot(
        source, media[0], sphere.radius, snap_t,
        n_polar=cfg["sphere"]["n_polar"],
        n_azimuth=cfg["sphere"]["n_azimuth"],
        resolution=min(cfg["volume_resolution"], 40))
    rows = [tuple(snap_pts[i]) + (snap_t,) + tuple(snap[i])
            for i in range(len(snap_pts))]
    write_csv(out_dir / "snapshot.csv",
              ["x", "y", "z", "t", "Ex", "Ey", "Ez"], rows)
    write_json(out_dir / "forward_manifest.json", {
        "config_hash": config_hash(cfg),
        "command": "forward",
        "records": records,
        "source": cfg["source"],
    })
    return 0


def cmd_reconstruct(cfg: dict, out_dir: Path, record_path) -> int:
    if record_path is None:
        raise ConfigError("reconstruct needs --record pointing at a record "
                          "directory")
    record = load_record(record_path)
    source = build_source(cfg["source"])
    if not cfg.get("bands"):
        raise ConfigError("reconstruct needs a nonempty 'bands' list")
    band = float(cfg["bands"][0])
    noise = float(cfg["noise"][0]) if cfg.get("noise") else 0.0
    if noise > 0.0:
        record = add_noise(record, NoiseSpec(target_epsilon=noise,
                                             seed=cfg["seed"]))
    measured = measurement_epsilon(record)
    samples = assemble_spectrum_ip1(
        record, source.profile, band,
        n_polar=cfg["directions"]["n_polar"],
        n_azimuth=cfg["directions"]["n_azimuth"],
        n_radial=cfg["radial"]["count"],
        delta=cfg["tolerances"]["delta_min"])
    grid = ReconstructionGrid.build(source.box_half,
                                    cfg["reconstruction"]["resolution"])
    result = reconstruct_source(samples, grid, reference=source)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [tuple(grid.points[i]) + tuple(result.fields[i])
            for i in range(len(grid.points))]
    write_csv(out_dir / "field.csv", ["x1", "x2", "x3", "f1", "f2", "f3"],
              rows)
    eps_used = noise if noise > 0.0 else measured
    report = {
        "config_hash": config_hash(cfg),
        "command": "reconstruct",
        "band": band,
        "noise_level": noise,
        "measured_epsilon": measured,
        "l2_error": result.l2_error,
        "rel_error": result.rel_error,
        "reference_norm": result.reference_norm,
        "band_energy": result.band_energy,
    }
    if 0.0 < eps_used < _EPS_CEILING:
        m_norm = sobolev_h1_norm(source)
        terms = envelope("ip1", band, eps_used, m_norm)
        split = choose_s("ip1", band, eps_used,
                         radius=record.sphere.radius, n=record.medium.n)
        model = float(terms.sum())
        report["envelope"] = {
            "eps": eps_used,
            "m_norm": m_norm,
            "data_term": float(terms[0]),
            "tail_term": float(terms[1]),
            "fitted_c": float(result.l2_error ** 2 / model),
            "split_s": split.s,
            "case": split.case,
        }
    else:
        report["envelope"] = None
    write_json(out_dir / "reconstruct_report.json", report)
    return 0


def cmd_sweep(cfg: dict, out_dir: Path) -> int:
    bands = cfg.get("bands") or []
    noise = [e for e in (cfg.get("noise") or []) if e > 0.0]
    if len(bands) < 2 or len(noise) < 2:
        raise ConfigError("sweep needs at least two bands and two positive "
                          "noise levels")
    source = build_source(cfg["source"])
    sphere, tgrid = _grids(cfg)
    medium = _media(cfg)[0]
    record = record_boundary_data(source, medium, sphere, tgrid,
                                  resolution=cfg["volume_resolution"])
    report = sweep_envelope(
        record, source.profile, source, bands, noise,
        grid_resolution=cfg["reconstruction"]["resolution"],
        n_polar=cfg["directions"]["n_polar"],
        n_azimuth=cfg["directions"]["n_azimuth"],
        n_radial=cfg["radial"]["count"],
        base_seed=cfg["seed"])
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "sweep.csv",
              ["b", "eps", "err", "data_term", "tail_term", "fitted_C",
               "case_tag"],
              report.rows())
    monotone = {}
    for eps in noise:
        ordered = [e for _, e in sorted(
            (pt.band, pt.rel_error) for pt in report.points
            if pt.eps == eps)]
        monotone[str(eps)] = all(
            later <= earlier * 1.02
            for earlier, later in zip(ordered[:-1], ordered[1:]))
    write_json(out_dir / "sweep_manifest.json", {
        "config_hash": config_hash(cfg),
        "command": "sweep",
        "m_norm": report.m_norm,
        "fitted_c": report.fitted_c,
        "c_even": report.c_even,
        "c_odd": report.c_odd,
        "stability_ratio": report.stability_ratio,
        "fit_stable": report.stability_ratio <= 2.0,
        "band_monotone": monotone,
    })
    return 0


def cmd_lemma_check(cfg: dict, out_dir: Path) -> int:
    source = build_source(cfg["source"])
    medium = _media(cfg)[0]
    radius = cfg["sphere"]["radius"]
    lem = cfg["lemma"]
    quad = {
        "n_radial": min(cfg["radial"]["count"], 16),
        "n_polar": min(cfg["directions"]["n_polar"], 8),
        "n_azimuth": min(cfg["directions"]["n_azimuth"], 16),
        "resolution": min(cfg["volume_resolution"], 32),
    }
    f_norm_sq = spatial_l2_norm(source) ** 2
    rng = np.random.default_rng(cfg["seed"])
    s_real = np.sort(rng.uniform(0.05, lem["s_max"], lem["n_real"]))
    mags = rng.uniform(0.05, lem["s_max"], lem["n_complex"])
    args = rng.uniform(-0.95 * np.pi / 4, 0.95 * np.pi / 4,
                       lem["n_complex"])
    s_complex = mags * np.exp(1j * args)
    corrupt = bool(lem.get("corrupt", False))
    samples = []
    failures = 0
    for s in list(s_real) + list(s_complex):
        value = abs(lowpass_energy(source, medium, s, **quad))
        if corrupt:
            value *= 1e6
        bound = lowpass_energy_bound(s, radius, medium.n, f_norm_sq)
        ok = value <= bound * (1.0 + 1e-10)
        failures += 0 if ok else 1
        samples.append({"s_re": float(np.real(s)),
                        "s_im": float(np.imag(s)),
                        "energy": value, "bound": bound, "pass": ok})
    band = float(lem["band"])
    cont = continuation_check(source, medium, radius, band, lem["eps"],
                              **quad)
    mu_table = [{"z_over_band": ratio,
                 "mu": continuation_exponent(ratio * band, band)}
                for ratio in (1.1, 2.0 ** 0.25, 2.0, 4.0)]
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "growth_bound.csv",
              ["s_re", "s_im", "energy", "bound", "pass"],
              [(d["s_re"], d["s_im"], d["energy"], d["bound"],
                int(d["pass"])) for d in samples])
    write_json(out_dir / "lemma_report.json", {
        "config_hash": config_hash(cfg),
        "command": "lemma-check",
        "growth_bound": {"samples": len(samples), "failures": failures,
                         "corrupt_mode": corrupt},
        "continuation": {
            "band": band,
            "eps": lem["eps"],
            "sector_bound": cont.sector_bound,
            "all_hold": cont.all_hold,
            "hypothesis_ratio": cont.hypothesis_ratio,
            "z": [float(z) for z in cont.z],
            "j_abs": [float(v) for v in cont.j_abs],
            "bound": [float(v) for v in cont.bound],
        },
        "mu_table": mu_table,
    })
    if failures or not cont.all_hold:
        raise AccuracyError(
            f"{failures} growth-bound samples failed"
            + ("" if cont.all_hold else "; continuation bound violated"))
    return 0


def _apply_threads(value: int | None) -> None:
    if value is None:
        env = os.environ.get(THREADS_ENV)
        value = int(env) if env else None
    if value is not None:
        if value < 1:
            raise ConfigError("thread count must be at least 1")
        import numba

        numba.set_num_threads(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emsourcelab",
        description="Inverse source experiments for time-dependent fields")
    parser.add_argument("command",
                        choices=["forward", "reconstruct", "sweep",
                                 "lemma-check"])
    parser.add_argument("--config", required=True, help="JSON configuration")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--record", default=None,
                        help="record directory (reconstruct)")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${THREADS_ENV})")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed override")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _apply_threads(args.threads)
        cfg = load_config(args.config, seed_override=args.seed)
        out = args.out or cfg.get("out_dir")
        if out is None:
            raise ConfigError("no output directory: pass --out or set "
                              "out_dir in the config")
        out_dir = Path(out)
        if args.command == "forward":
            return cmd_forward(cfg, out_dir)
        if args.command == "reconstruct":
            return cmd_reconstruct(cfg, out_dir, args.record)
        if args.command == "sweep":
            return cmd_sweep(cfg, out_dir)
        return cmd_lemma_check(cfg, out_dir)
    except (ConfigError, GeometryError, BandwidthError, RegionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AccuracyError as exc:
        print(f"accuracy: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
