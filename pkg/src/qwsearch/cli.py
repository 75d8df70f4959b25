"""Command-line front end: ``qwsearch {analyze,sweep-r,rook-table} --config FILE``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .experiments import (
    ExperimentError,
    default_r_grid,
    rook_sweep,
    run_instance,
    spectrum_for,
    sweep_r,
)
from .graphs import GraphError, GraphSpec
from .predictor import CostInputs, PredictorConfig, classify_optimality
from .rank_one import RankOneError, amplitude_curve, solve_search_spectrum
from .serialize import write_csv, write_json
from .spectra import SpectrumError, detect_quasi_degenerate, initial_state, s_params

THREADS_ENV = "QWSEARCH_THREADS"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
SWEEP_HEADER = ["r", "in_window", "sup_amp", "peak_time", "bound"]
ROOK_HEADER = ["sigma", "n1", "n2", "n", "D", "T", "nu", "T_pred", "nu_pred", "gap"]


class ConfigError(ValueError):
    pass


def load_schema() -> dict:
    return json.loads(resources.files("qwsearch").joinpath("config.schema.json").read_text())


def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from exc
    return cfg


def graph_spec(cfg: dict, seed: int) -> GraphSpec:
    if "graph" not in cfg:
        raise ConfigError("config needs a 'graph' section")
    g = dict(cfg["graph"])
    g.setdefault("seed", seed)
    return GraphSpec.from_dict(g)


def _instance(cfg: dict, seed: int):
    spec = graph_spec(cfg, seed)
    marked = cfg.get("marked", 0)
    if marked >= spec.num_nodes:
        raise ConfigError(f"marked node {marked} out of range for n={spec.num_nodes}")
    spectrum, mode = spectrum_for(spec, marked, cfg.get("normalization"), cfg.get("closed_form"))
    return spec, marked, spectrum, mode


def cmd_analyze(cfg: dict, out: Path, seed: int) -> Path:
    spec, marked, spectrum, mode = _instance(cfg, seed)
    pcfg = PredictorConfig(**cfg.get("predictor", {}))
    rec = run_instance(
        spec,
        marked,
        r_policy=cfg.get("r", "critical"),
        D_policy=cfg.get("D", "auto"),
        cfg=pcfg,
        mode=mode,
        initial_policy=cfg.get("initial_state", "top_eigenvector"),
        seed=seed,
        horizon_multiple=cfg.get("horizon_multiple", 4.0),
        costs=CostInputs(**cfg.get("costs", {})),
        bound_factors=tuple(cfg.get("bound_factors", ())),
        spectrum=spectrum,
    )
    report = {
        "tool": "qwsearch",
        "version": __version__,
        "command": "analyze",
        "seed": seed,
        "predictor_config": pcfg.to_dict(),
        **rec.to_dict(),
        "regime": rec.prediction.regime,
        "optimality": classify_optimality(rec.prediction, rec.D, pcfg.theta_opt),
    }
    report["normalization_note"] = (
        "default for non-regular graphs" if cfg.get("normalization") is None and mode == "spectral_norm"
        else "as requested" if cfg.get("normalization") else "default for regular graphs"
    )
    outputs = cfg.get("output", {})
    path = out / outputs.get("report", "report.json")
    write_json(report, path)
    if "curve" in outputs:
        st = initial_state(spectrum, rec.D, cfg.get("initial_state", "top_eigenvector"), seed)
        times = np.linspace(0.0, 2.0 * rec.prediction.T_pred, 1025)
        amplitude_curve(solve_search_spectrum(spectrum, rec.r), st, times).to_csv(out / outputs["curve"])
    return path


def cmd_sweep_r(cfg: dict, out: Path, seed: int) -> Path:
    spec, marked, spectrum, mode = _instance(cfg, seed)
    pcfg = PredictorConfig(**cfg.get("predictor", {}))
    D = detect_quasi_degenerate(spectrum, cfg.get("D", "auto"))
    sweep = cfg.get("sweep", {})
    if "r_grid" in sweep:
        grid = np.asarray(sweep["r_grid"], dtype=float)
    else:
        st = initial_state(spectrum, D)
        grid = default_r_grid(s_params(spectrum, D, st.epsilon), sweep.get("points", 41))
    rows = sweep_r(spectrum, grid, cfg.get("horizon_multiple", 4.0), D, pcfg)
    outputs = cfg.get("output", {})
    path = out / outputs.get("csv", "sweep_r.csv")
    write_csv(path, SWEEP_HEADER, [row.as_row() for row in rows])
    best = max(rows, key=lambda row: row.sup_amp)
    write_json(
        {
            "tool": "qwsearch",
            "version": __version__,
            "command": "sweep-r",
            "graph": spec.to_dict(),
            "marked": marked,
            "normalization": mode,
            "D": D,
            "best": {"r": best.r, "sup_amp": best.sup_amp, "in_window": best.in_window},
            "bound_violations": sum(1 for row in rows if np.isfinite(row.bound) and row.sup_amp > row.bound),
        },
        out / outputs.get("report", "sweep_r.json"),
    )
    return path


def cmd_rook_table(cfg: dict, out: Path, seed: int) -> Path:
    table = cfg.get("rook_table")
    if not table:
        raise ConfigError("rook-table needs a 'rook_table' section")
    sweeps = [rook_sweep(s, table["exponents"], cfg.get("horizon_multiple", 4.0)) for s in table["sigmas"]]
    rows = [
        [sw.sigma, p.n1, p.n2, p.n, p.D, p.T, p.nu, p.T_pred, p.nu_pred, p.gap]
        for sw in sweeps
        for p in sw.points
    ]
    outputs = cfg.get("output", {})
    path = out / outputs.get("csv", "rook_table.csv")
    write_csv(path, ROOK_HEADER, rows)
    write_json(
        {
            "tool": "qwsearch",
            "version": __version__,
            "command": "rook-table",
            "fits": [sw.to_dict() for sw in sweeps],
        },
        out / outputs.get("report", "rook_table.json"),
    )
    return path


COMMANDS = {"analyze": cmd_analyze, "sweep-r": cmd_sweep_r, "rook-table": cmd_rook_table}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qwsearch", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default=".", help="output directory (created if missing)")
    parser.add_argument("--seed", type=int, default=None, help="seed for random graphs and start states")
    parser.add_argument("--threads", type=int, default=None, help=f"BLAS threads (else ${THREADS_ENV})")
    return parser


def _threads(arg: int | None) -> int | None:
    if arg is not None:
        return arg
    env = os.environ.get(THREADS_ENV)
    if env is None:
        return None
    try:
        return int(env)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        if seed < 0 or seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        threads = _threads(args.threads)
        if threads is not None and threads < 1:
            raise ConfigError("thread count must be >= 1")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with threadpool_limits(limits=threads):
            path = COMMANDS[args.command](cfg, out, seed)
    except (RankOneError, ExperimentError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"qwsearch: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, GraphError, SpectrumError, ValueError, TypeError) as exc:
        print(f"qwsearch: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
