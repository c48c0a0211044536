"""Replicated simulation experiments and the screening / holdout pipeline."""
from __future__ import annotations

import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from typing import Optional

import numpy as np

from .core import Dataset, InputError, evaluate
from .linalg import derive_seed, make_rng
from .nsi import NsiConfig
from .precision import estimate_precision, known_precision
from .simulate import SimulationConfig, gen_instance, sparsity_split
from .tuning import cv_lambda, default_grid, make_fitter

log = logging.getLogger(__name__)

METRICS = ("l2", "l1", "fpr", "tpr", "nz")
MAX_FAILURE_RATE = 0.05


class ExperimentError(RuntimeError):
    pass


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    design: SimulationConfig = field(default_factory=SimulationConfig)
    sweep: tuple = ()
    methods: tuple = ("nsi", "lasso")
    replications: int = 100
    base_seed: int = 0
    cv_folds: int = 10
    grid_size: int = 50
    grid_min_ratio: float = 1e-3
    precision: str = "known"
    solver: NsiConfig = field(default_factory=NsiConfig)

    def __post_init__(self):
        if self.replications < 1:
            raise InputError("replications must be >= 1")
        for m in self.methods:
            make_fitter(m)
        object.__setattr__(self, "sweep", tuple((k, tuple(v)) for k, v in self.sweep))
        object.__setattr__(self, "methods", tuple(self.methods))
        self.settings()  # validates every sweep value

    def settings(self) -> list[tuple[str, SimulationConfig]]:
        """Cartesian product of the sweep, applied to the design template."""
        if not self.sweep:
            return [("base", self.design)]
        names = [k for k, _ in self.sweep]
        out = []
        for values in itertools.product(*(v for _, v in self.sweep)):
            cfg = self.design
            for name, value in zip(names, values):
                cfg = _apply(cfg, name, value)
            label = ",".join(f"{k}={v:g}" for k, v in zip(names, values))
            out.append((label, cfg))
        return out


def _apply(cfg: SimulationConfig, name: str, value) -> SimulationConfig:
    if name == "ratio":
        return cfg.with_ratio(float(value))
    if name == "p_plus_q":
        p, q = sparsity_split(int(value), cfg.q / (cfg.p + cfg.q))
        return replace(cfg, p=p, q=q)
    if name in ("n", "p", "q", "beta_support"):
        return replace(cfg, **{name: int(value)})
    if name in ("rho", "beta_value", "gamma_value", "sigma"):
        return replace(cfg, **{name: float(value)})
    raise InputError(f"cannot sweep over {name!r}")


@dataclass(frozen=True)
class AggregateRow:
    setting: str
    method: str
    replications: int
    mean: dict
    sd: dict

    def cell(self, metric: str) -> str:
        """``mean(sd)`` with six significant digits, as in the published tables."""
        m, s = self.mean[metric], self.sd[metric]
        if m is None:
            return "NA"
        return f"{m:.6g}({s:.6g})"


def run_one(spec: ExperimentSpec, label: str, cfg: SimulationConfig, rep: int) -> list[dict]:
    """Every method on replication ``rep`` of one setting."""
    seed = derive_seed(spec.base_seed, rep)
    base = {"setting": label, "replication": rep, "seed": seed}
    try:
        inst = gen_instance(replace(cfg, seed=seed))
        data = inst.data
        omega = _precision_for(inst, spec.precision)
        grid = default_grid(data, spec.grid_size, spec.grid_min_ratio, spec.solver.standardize)
    except Exception as exc:
        log.warning("setting %s replication %d (seed %d) failed: %s", label, rep, seed, exc)
        return [dict(base, method=m, ok=False, error=repr(exc)) for m in spec.methods]
    records = []
    for method in spec.methods:
        rec = dict(base, method=method)
        try:
            fitter = make_fitter(method, spec.solver)
            cv = cv_lambda(data, omega, grid, spec.cv_folds, seed, fitter)
            est = fitter(data, omega, cv.best_lambda)
            m = evaluate(est, inst.truth, spec.solver.zero_tol)
            rec.update(ok=True, **{k: getattr(m, k) for k in METRICS}, **{
                "lambda": cv.best_lambda, "n_iterations": est.n_iterations,
                "converged": bool(est.converged)})
        except Exception as exc:
            log.warning("setting %s method %s replication %d (seed %d) failed: %s",
                        label, method, rep, seed, exc)
            rec.update(ok=False, error=repr(exc))
        records.append(rec)
    return records


def _precision_for(inst, method):
    if inst.data.q == 0:
        return None
    if method == "known":
        return known_precision(inst.truth.Omega)
    return estimate_precision(inst.data.W, method)


def _task(args):
    return run_one(*args)


def collect_records(spec: ExperimentSpec, threads: int = 1) -> list[dict]:
    """Per-replication records in (setting, replication, method) order.

    Each task owns its seed, so the output does not depend on ``threads``.
    """
    tasks = [(spec, label, cfg, rep) for label, cfg in spec.settings()
             for rep in range(spec.replications)]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * threads))))
    else:
        chunks = [_task(t) for t in tasks]
    return [r for chunk in chunks for r in chunk]


def aggregate(records: list[dict]) -> list[AggregateRow]:
    """Mean and sample sd per (setting, method) over successful records.

    Raises
    ------
    ExperimentError
        If more than 5% of the records are failures.
    """
    if not records:
        raise ExperimentError("no records to aggregate")
    failed = [r for r in records if not r["ok"]]
    if len(failed) > MAX_FAILURE_RATE * len(records):
        raise ExperimentError(f"{len(failed)} of {len(records)} fits failed")
    for r in failed:
        log.warning("excluded failed record: setting=%s method=%s seed=%s (%s)",
                    r["setting"], r["method"], r["seed"], r.get("error"))
    groups: dict = {}
    for r in records:
        if r["ok"]:
            groups.setdefault((r["setting"], r["method"]), []).append(r)
    rows = []
    for (setting, method), recs in groups.items():
        mean, sd = {}, {}
        for k in METRICS:
            vals = np.array([r[k] for r in recs if r[k] is not None], dtype=float)
            if vals.size == 0:
                mean[k] = sd[k] = None
                continue
            mean[k] = float(np.mean(vals))
            sd[k] = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
        rows.append(AggregateRow(setting, method, len(recs), mean, sd))
    return rows


def write_records(records: list[dict], path) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")


def read_records(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def run_replications(spec: ExperimentSpec, threads: int = 1, records_path=None) -> list[AggregateRow]:
    records = collect_records(spec, threads)
    if records_path is not None:
        write_records(records, records_path)
    return aggregate(records)


def correlation_screen(X, y, threshold: float) -> np.ndarray:
    """Indices of columns whose |Pearson correlation| with ``y`` is at least ``threshold``.

    Constant columns are never selected.
    """
    if not 0 <= threshold <= 1:
        raise InputError("threshold must lie in [0, 1]")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    sx = np.sqrt(np.sum(Xc ** 2, axis=0))
    sy = np.sqrt(yc @ yc)
    keep = sx > 1e-12 * np.maximum(1.0, np.abs(X).max(axis=0, initial=0))
    if sy == 0 or not keep.any():
        return np.zeros(0, dtype=np.int64)
    corr = np.zeros(X.shape[1])
    corr[keep] = (Xc[:, keep].T @ yc) / (sx[keep] * sy)
    # guard against rounding pushing |corr| a hair below 1 for exact copies
    corr = np.clip(corr, -1.0, 1.0)
    sel = keep & (np.abs(corr) >= threshold - 1e-12)
    return np.flatnonzero(sel)


def pearson(X, y) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    with np.errstate(invalid="ignore", divide="ignore"):
        return (Xc.T @ yc) / (np.sqrt(np.sum(Xc ** 2, axis=0)) * np.sqrt(yc @ yc))


@dataclass(frozen=True)
class HoldoutResult:
    mse: dict
    lambdas: dict
    n_train: int
    n_test: int
    selected: np.ndarray
    z_columns: np.ndarray
    w_columns: np.ndarray
    precision_method: Optional[str] = None

    def as_dict(self) -> dict:
        d = asdict(self)
        for k in ("selected", "z_columns", "w_columns"):
            d[k] = [int(i) for i in d[k]]
        return d


def split_rows(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Random row split; the first part holds ``round(fraction * n)`` rows."""
    if not 0 < fraction < 1:
        raise InputError("split fraction must lie in (0, 1)")
    n_first = int(Decimal(repr(fraction * n)).quantize(Decimal(1), rounding=ROUND_HALF_UP))
    perm = make_rng(seed).permutation(n)
    return np.sort(perm[:n_first]), np.sort(perm[n_first:])


def holdout_eval(X, y, split_fraction: float = 0.7, threshold: float = 0.5,
                 methods=("nsi", "lasso", "plugin"), seed: int = 0, *, dense_margin: float = 0.05,
                 cv_folds: int = 10, precision: str = "graphical_lasso",
                 config: NsiConfig | None = None) -> HoldoutResult:
    """Screen, split into blocks, fit on the training rows, score on the rest.

    ``split_fraction`` is the share of rows used for fitting. Columns are
    screened on the training rows only; screened columns with
    ``|corr| >= threshold + dense_margin`` form the dense block ``W`` and
    the remainder the sparse block ``Z``. Columns and response are centered
    with training means before fitting.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise InputError("X must be an n x d matrix matching y")
    config = config or NsiConfig()
    train, test = split_rows(y.shape[0], split_fraction, seed)
    if train.size < 2 or test.size < 1:
        raise PipelineError("split leaves too few rows")
    Xtr, ytr = X[train], y[train]
    selected = correlation_screen(Xtr, ytr, threshold)
    if selected.size < 2:
        raise PipelineError(f"only {selected.size} columns pass threshold {threshold}")
    corr = np.abs(pearson(Xtr[:, selected], ytr))
    dense = corr >= threshold + dense_margin
    w_cols, z_cols = selected[dense], selected[~dense]

    xm, ym = Xtr.mean(axis=0), ytr.mean()
    def block(rows, cols):
        return X[np.ix_(rows, cols)] - xm[cols]
    data_tr = Dataset(ytr - ym, block(train, z_cols), block(train, w_cols))
    Zte, Wte = block(test, z_cols), block(test, w_cols)
    omega = estimate_precision(data_tr.W, precision) if w_cols.size else None

    grid = default_grid(data_tr, standardize=config.standardize)
    k = min(cv_folds, data_tr.n)
    mses, lambdas = {}, {}
    for method in methods:
        fitter = make_fitter(method, config)
        cv = cv_lambda(data_tr, omega, grid, k, seed, fitter)
        est = fitter(data_tr, omega, cv.best_lambda)
        pred = Zte @ est.beta_hat + Wte @ est.gamma_hat + ym
        mses[method] = float(np.mean((y[test] - pred) ** 2))
        lambdas[method] = cv.best_lambda
    return HoldoutResult(mses, lambdas, int(train.size), int(test.size), selected, z_cols, w_cols,
                         None if omega is None else omega.method)
