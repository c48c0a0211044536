"""Command-line entry point: ``nsi {simulate,fit,cv,bench,screen}``.

Configuration files are INI-style: ``[section]`` headers with
``key = value`` lines. Precedence is flag > file > built-in default, and
unknown sections or keys are rejected.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import Dataset, InputError
from .harness import (ExperimentSpec, aggregate, collect_records, holdout_eval, write_records)
from .nsi import NsiConfig
from .precision import estimate_precision, known_precision
from .simulate import SimulationConfig, gen_instance, sparsity_split
from .tuning import cv_lambda, default_grid, make_fitter

log = logging.getLogger("nsireg")

COMMANDS = ("simulate", "fit", "cv", "bench", "screen")


class UsageError(Exception):
    pass


class CsvParseError(ValueError):
    def __init__(self, path, row, col, msg):
        super().__init__(f"{path}: row {row}, column {col}: {msg}")
        self.row, self.col = row, col


def _bool(s):
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _list(s):
    if isinstance(s, (list, tuple)):
        return list(s)
    return [t.strip() for t in str(s).split(",") if t.strip()]


def _opt_int(s):
    return None if s in (None, "", "none") else int(s)


def _opt_float(s):
    return None if s in (None, "", "none") else float(s)


# section -> key -> (parser, default)
SCHEMA = {
    "design": {
        "n": (int, 100), "p": (_opt_int, None), "q": (_opt_int, None),
        "p_plus_q": (int, 100), "ratio": (float, 0.5), "rho": (float, 0.0),
        "beta_value": (float, 4.0), "beta_support": (int, 10), "gamma_value": (float, 6.0),
        "sigma": (float, 1.0),
    },
    "experiment": {
        "sweep": (str, ""), "methods": (_list, ["nsi", "lasso"]), "replications": (int, 100),
        "cv_folds": (int, 10), "grid_size": (int, 50), "grid_min_ratio": (float, 1e-3),
        "precision": (str, "known"),
    },
    "solver": {
        "lambda": (_opt_float, None), "tol": (float, 1e-7), "max_iter": (int, 500),
        "standardize": (_bool, True), "zero_tol": (float, 0.0),
    },
    "precision": {
        "method": (str, "graphical_lasso"), "M": (float, 1.0), "alpha": (float, 1.0),
        "tau": (float, 2.0), "ridge_eps": (float, 1e-3),
    },
    "data": {
        "dir": (str, None), "y": (str, None), "Z": (str, None), "W": (str, None),
        "X": (str, None), "omega": (str, None),
    },
    "screen": {
        "threshold": (float, 0.5), "split_fraction": (float, 0.7), "dense_margin": (float, 0.05),
        "methods": (_list, ["nsi", "lasso", "plugin"]),
    },
    "run": {
        "seed": (int, 0), "threads": (int, os.cpu_count() or 1), "out": (str, None),
        "method": (str, "nsi"), "cv_folds": (int, 10), "format": (str, "markdown"),
    },
    "manifest": {"version": (str, __version__), "command": (str, None)},
}


@dataclass
class RunConfig:
    command: str
    sections: dict = field(default_factory=dict)
    config_path: str | None = None

    def __getitem__(self, section):
        return self.sections[section]

    @property
    def out(self) -> Path:
        return Path(self.sections["run"]["out"])


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nsi", description="Non-sparse iteration estimator and benchmarks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI-style configuration file")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--method")
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--threshold", type=float)
        p.add_argument("--out")
        p.add_argument("--reps", type=int, help="number of replications (bench)")
        p.add_argument("--data", help="directory holding y.csv, Z.csv, W.csv (or X.csv)")
        p.add_argument("--format", choices=("csv", "markdown"))
    return parser


def _read_config(path) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc}") from None
    except configparser.Error as exc:
        raise UsageError(f"--config: malformed file {path}: {exc}") from None
    out = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise UsageError(f"unknown config section [{section}]")
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                raise UsageError(f"unknown config key '{section}.{key}'")
            out.setdefault(section, {})[key] = raw
    return out


def parse_args(argv) -> RunConfig:
    """Resolve flags, config file and defaults into a :class:`RunConfig`."""
    args = _build_parser().parse_args(list(argv))
    if args.command is None:
        raise UsageError(f"missing command; choose from {', '.join(COMMANDS)}")
    raw = _read_config(args.config) if args.config else {}
    if args.command == "bench" and not args.config:
        raise UsageError("bench requires --config")

    flags = {
        ("run", "seed"): args.seed, ("run", "threads"): args.threads, ("run", "out"): args.out,
        ("solver", "lambda"): args.lam, ("screen", "threshold"): args.threshold,
        ("experiment", "replications"): args.reps, ("data", "dir"): args.data,
        ("run", "format"): args.format,
    }
    if args.method is not None:
        key = ("experiment", "methods") if args.command == "bench" else ("run", "method")
        flags[key] = args.method
    for (section, key), value in flags.items():
        if value is not None:
            raw.setdefault(section, {})[key] = value

    sections = {}
    for section, keys in SCHEMA.items():
        resolved = {}
        for key, (conv, default) in keys.items():
            if key in raw.get(section, {}):
                try:
                    resolved[key] = conv(raw[section][key])
                except (TypeError, ValueError) as exc:
                    raise UsageError(f"invalid value for '{section}.{key}': {exc}") from None
            else:
                resolved[key] = default
        sections[section] = resolved
    sections["manifest"]["command"] = args.command
    cfg = RunConfig(args.command, sections, args.config)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    run = cfg["run"]
    if run["out"] is None:
        raise UsageError(f"{cfg.command} requires --out")
    if run["threads"] < 1:
        raise UsageError("invalid value for 'run.threads': must be >= 1")
    if cfg.command in ("fit", "cv"):
        d = cfg["data"]
        if d["dir"] is None and d["y"] is None:
            raise UsageError(f"{cfg.command} requires --data or a [data] section with y, Z, W")
    if cfg.command == "screen":
        d = cfg["data"]
        if d["dir"] is None and (d["X"] is None or d["y"] is None):
            raise UsageError("screen requires --data or a [data] section with X and y")
    try:
        if cfg.command in ("simulate", "bench"):
            _design(cfg)
        if cfg.command == "bench":
            _experiment(cfg)
    except InputError as exc:
        raise UsageError(str(exc)) from None


def _design(cfg: RunConfig) -> SimulationConfig:
    d = cfg["design"]
    if d["p"] is not None or d["q"] is not None:
        if d["p"] is None or d["q"] is None:
            raise InputError("design.p and design.q must be given together")
        p, q = d["p"], d["q"]
    else:
        p, q = sparsity_split(d["p_plus_q"], d["ratio"])
    return SimulationConfig(n=d["n"], p=p, q=q, rho=d["rho"], beta_value=d["beta_value"],
                            beta_support=d["beta_support"], gamma_value=d["gamma_value"],
                            sigma=d["sigma"], seed=cfg["run"]["seed"])


def _solver(cfg: RunConfig) -> NsiConfig:
    s = cfg["solver"]
    return NsiConfig(lam=s["lambda"] or 0.0, max_outer_iter=s["max_iter"], tol=s["tol"],
                     standardize=s["standardize"], zero_tol=s["zero_tol"])


def _parse_sweep(text: str):
    """``ratio: 0.5, 0.8; rho: 0.3`` -> ``(("ratio", (0.5, 0.8)), ("rho", (0.3,)))``."""
    out = []
    for part in filter(None, (t.strip() for t in text.split(";"))):
        if ":" not in part:
            raise InputError(f"malformed sweep entry {part!r}; expected 'name: v1, v2'")
        name, values = part.split(":", 1)
        out.append((name.strip(), tuple(float(v) for v in _list(values))))
    return tuple(out)


def _experiment(cfg: RunConfig) -> ExperimentSpec:
    e = cfg["experiment"]
    return ExperimentSpec(design=_design(cfg), sweep=_parse_sweep(e["sweep"]),
                          methods=tuple(e["methods"]), replications=e["replications"],
                          base_seed=cfg["run"]["seed"], cv_folds=e["cv_folds"],
                          grid_size=e["grid_size"], grid_min_ratio=e["grid_min_ratio"],
                          precision=e["precision"], solver=_solver(cfg))


def load_matrix_csv(path) -> np.ndarray:
    """Numeric CSV to a 2-D array; a non-numeric first row is taken as a header."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise CsvParseError(path, 1, 1, "file is empty")

    def numeric(cell):
        try:
            float(cell)
        except ValueError:
            return False
        return True

    start = 0 if all(numeric(c) for c in rows[0]) else 1
    width = len(rows[0])
    values = []
    for i, row in enumerate(rows[start:], start=start + 1):
        if len(row) != width:
            raise CsvParseError(path, i, len(row), f"expected {width} fields, found {len(row)}")
        parsed = []
        for j, cell in enumerate(row, start=1):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise CsvParseError(path, i, j, f"non-numeric value {cell!r}") from None
        values.append(parsed)
    if not values:
        return np.zeros((0, width))
    return np.array(values, dtype=float)


def save_matrix_csv(path, M, header=None):
    M = np.atleast_1d(np.asarray(M, dtype=float))
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(header)
        for row in M:
            w.writerow([repr(float(v)) for v in row])


def _vector(path) -> np.ndarray:
    M = load_matrix_csv(path)
    if M.ndim == 2 and M.shape[1] != 1:
        raise InputError(f"{path}: expected a single column, found {M.shape[1]}")
    return M.ravel()


def emit_table(rows, path, format: str = "csv") -> None:
    """Write aggregate rows; CSV keeps mean and sd apart, markdown joins them as ``mean(sd)``."""
    from .harness import METRICS
    if not rows:
        raise InputError("no rows to emit")
    with open(path, "w", newline="") as fh:
        if format == "csv":
            w = csv.writer(fh)
            w.writerow(["setting", "method", "replications"]
                       + [f"{m}_{s}" for m in METRICS for s in ("mean", "sd")])
            for r in rows:
                cells = []
                for m in METRICS:
                    cells += ["NA" if r.mean[m] is None else f"{r.mean[m]:.6g}",
                              "NA" if r.sd[m] is None else f"{r.sd[m]:.6g}"]
                w.writerow([r.setting, r.method, r.replications] + cells)
        elif format == "markdown":
            heads = ["l2-norm", "l1-norm", "FPR", "TPR", "NZ"]
            fh.write("| Setting | Method | " + " | ".join(heads) + " |\n")
            fh.write("|" + "---|" * (2 + len(heads)) + "\n")
            for r in rows:
                fh.write(f"| {r.setting} | {r.method} | "
                         + " | ".join(r.cell(m) for m in METRICS) + " |\n")
        else:
            raise InputError(f"unknown table format {format!r}")


def read_table_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_manifest(cfg: RunConfig, path) -> None:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    for section, values in cfg.sections.items():
        cp[section] = {}
        for key, value in values.items():
            if value is None:
                continue
            if isinstance(value, list):
                value = ",".join(value)
            cp[section][key] = str(value) if not isinstance(value, float) else repr(value)
    with open(path, "w") as fh:
        cp.write(fh)


def _load_dataset(cfg: RunConfig) -> Dataset:
    d = cfg["data"]
    base = Path(d["dir"]) if d["dir"] else None

    def path(key, fname):
        if d[key]:
            return Path(d[key])
        return base / fname if base is not None else None

    y = _vector(path("y", "y.csv"))
    n = y.shape[0]
    zp, wp = path("Z", "Z.csv"), path("W", "W.csv")
    Z = load_matrix_csv(zp) if zp is not None and zp.exists() else np.zeros((n, 0))
    W = load_matrix_csv(wp) if wp is not None and wp.exists() else np.zeros((n, 0))
    return Dataset(y, Z, W)


def _precision(cfg: RunConfig, data: Dataset):
    if data.q == 0:
        return None
    pr = cfg["precision"]
    if pr["method"] == "known":
        omega_path = cfg["data"]["omega"] or (Path(cfg["data"]["dir"]) / "omega_w.csv"
                                              if cfg["data"]["dir"] else None)
        if omega_path is None:
            raise InputError("precision.method = known needs data.omega")
        return known_precision(load_matrix_csv(omega_path))
    return estimate_precision(data.W, pr["method"], M=pr["M"], alpha=pr["alpha"], tau=pr["tau"],
                              ridge_eps=pr["ridge_eps"])


def cmd_simulate(cfg: RunConfig) -> None:
    inst = gen_instance(_design(cfg))
    out = cfg.out
    save_matrix_csv(out / "y.csv", inst.data.y)
    save_matrix_csv(out / "Z.csv", inst.data.Z)
    save_matrix_csv(out / "W.csv", inst.data.W)
    save_matrix_csv(out / "beta.csv", inst.truth.beta)
    save_matrix_csv(out / "gamma.csv", inst.truth.gamma)
    if inst.truth.Omega is not None:
        save_matrix_csv(out / "omega_w.csv", inst.truth.Omega)


def _chosen_lambda(cfg, data, omega, fitter):
    lam = cfg["solver"]["lambda"]
    if lam is not None:
        return lam, None
    k = min(cfg["run"]["cv_folds"], data.n)
    cv = cv_lambda(data, omega, default_grid(data), k, cfg["run"]["seed"], fitter)
    return cv.best_lambda, cv


def cmd_fit(cfg: RunConfig) -> None:
    data = _load_dataset(cfg)
    omega = _precision(cfg, data)
    fitter = make_fitter(cfg["run"]["method"], _solver(cfg))
    lam, _ = _chosen_lambda(cfg, data, omega, fitter)
    est = fitter(data, omega, lam)
    out = cfg.out
    save_matrix_csv(out / "beta_hat.csv", est.beta_hat)
    save_matrix_csv(out / "gamma_hat.csv", est.gamma_hat)
    summary = {"method": cfg["run"]["method"], "lambda": lam, "n_iterations": est.n_iterations,
               "converged": bool(est.converged), "final_objective": est.final_objective,
               "precision": None if omega is None else omega.method}
    (out / "fit.json").write_text(json.dumps(summary, indent=2) + "\n")


def cmd_cv(cfg: RunConfig) -> None:
    data = _load_dataset(cfg)
    omega = _precision(cfg, data)
    fitter = make_fitter(cfg["run"]["method"], _solver(cfg))
    k = min(cfg["run"]["cv_folds"], data.n)
    cv = cv_lambda(data, omega, default_grid(data), k, cfg["run"]["seed"], fitter)
    save_matrix_csv(cfg.out / "cv.csv", np.column_stack([cv.lambda_grid, cv.cv_error]),
                    header=["lambda", "cv_error"])
    (cfg.out / "cv.json").write_text(json.dumps(
        {"method": cfg["run"]["method"], "best_lambda": cv.best_lambda, "folds": k}, indent=2) + "\n")


def cmd_bench(cfg: RunConfig) -> None:
    spec = _experiment(cfg)
    records = collect_records(spec, cfg["run"]["threads"])
    write_records(records, cfg.out / "records.jsonl")
    rows = aggregate(records)
    emit_table(rows, cfg.out / "table.csv", "csv")
    emit_table(rows, cfg.out / "table.md", "markdown")
    print((cfg.out / ("table.md" if cfg["run"]["format"] == "markdown" else "table.csv")).read_text())


def cmd_screen(cfg: RunConfig) -> None:
    d = cfg["data"]
    base = Path(d["dir"]) if d["dir"] else None
    X = load_matrix_csv(d["X"] or base / "X.csv")
    y = _vector(d["y"] or base / "y.csv")
    sc = cfg["screen"]
    res = holdout_eval(X, y, split_fraction=sc["split_fraction"], threshold=sc["threshold"],
                       methods=tuple(sc["methods"]), seed=cfg["run"]["seed"],
                       dense_margin=sc["dense_margin"], cv_folds=cfg["run"]["cv_folds"],
                       precision=cfg["precision"]["method"], config=_solver(cfg))
    (cfg.out / "screen.json").write_text(json.dumps(res.as_dict(), indent=2) + "\n")
    with open(cfg.out / "mse.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "mse", "lambda"])
        for m, v in res.mse.items():
            w.writerow([m, repr(v), repr(res.lambdas[m])])
    for m, v in res.mse.items():
        print(f"{m}\t{v:.6g}")


HANDLERS = {"simulate": cmd_simulate, "fit": cmd_fit, "cv": cmd_cv, "bench": cmd_bench,
            "screen": cmd_screen}


def main(argv=None) -> int:
    level = os.environ.get("NSI_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"nsi: usage error: {exc}", file=sys.stderr)
        return 2
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
        write_manifest(cfg, cfg.out / "manifest.cfg")
        HANDLERS[cfg.command](cfg)
    except (InputError, CsvParseError, OSError, RuntimeError, ValueError) as exc:
        print(f"nsi: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
