"""Trial sweeps over the model roster with CSV output."""

import csv
import io
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..solver import solve
from .config import TrialConfig
from .models import build_problem, model_info
from .signals import gen_block_sparse, gen_measurements, gen_piecewise_linear, nmse

__all__ = [
    "TrialRecord",
    "DETAIL_FIELDS",
    "AGGREGATE_FIELDS",
    "make_trial_data",
    "run_trial",
    "run_sweep",
    "tune_cell",
    "aggregate",
    "cell_summary",
    "write_detail_csv",
    "write_aggregate_csv",
]

DETAIL_FIELDS = ("scenario", "model", "n", "d", "snr_db", "trial", "nmse", "iterations",
                 "converged", "wall_time_s")
AGGREGATE_FIELDS = ("scenario", "model", "n", "d", "snr_db", "trials", "mean_nmse",
                    "mean_iterations")

BLOCKS = 4
NONZERO_FRACTION = 80 / 256


@dataclass
class TrialRecord:
    scenario: str
    model: str
    n: int
    d: int
    snr_db: float
    trial: int
    nmse: float
    iterations: int
    converged: bool
    wall_time_s: float
    lam: float = math.nan
    alpha: float = math.nan
    theta: float = math.nan
    final_residual: float = math.nan
    threshold: float = math.nan
    error: str = ""


def make_trial_data(scenario, n, d, snr_db, rng_seed, trial):
    """Ground truth and measurements of one trial.

    The signal depends on ``(rng_seed, trial)`` only and the sensing matrix
    and noise direction on ``(rng_seed, trial, d)``, so models and SNR levels
    in the same trial see the same data.
    """
    if scenario == "block-sparse":
        nonzeros = max(BLOCKS, int(round(NONZERO_FRACTION * n)))
        x_org = gen_block_sparse(n, BLOCKS, nonzeros, np.random.default_rng([rng_seed, trial, 0]))
    elif scenario == "piecewise-linear":
        x_org = gen_piecewise_linear(n, "default")
    else:
        raise ValueError(f"scenario {scenario!r} has no trial data")
    A, y = gen_measurements(x_org, d, snr_db, np.random.default_rng([rng_seed, trial, 1, d]))
    return x_org, A, y


def run_trial(config: TrialConfig, model, d, snr_db, trial, lam=None, alpha=None, theta=None):
    """Solve one trial and return its :class:`TrialRecord`.

    Failures while building or solving are recorded (``converged=False``,
    NMSE of the zero estimate) instead of raised.
    """
    p_lam, p_alpha, p_theta = config.params_for(model)
    lam = p_lam if lam is None else lam
    alpha = p_alpha if alpha is None else alpha
    theta = p_theta if theta is None else theta
    x_org, A, y = make_trial_data(config.scenario, config.n, d, snr_db, config.rng_seed, trial)
    t0 = time.perf_counter()
    rec = TrialRecord(config.scenario, model, config.n, d, snr_db, trial, 1.0, 0, False, 0.0,
                      lam, alpha, theta, math.nan, config.threshold)
    try:
        spec = build_problem(model, A, y, lam, alpha, theta, config.constraint)
        sol = solve(spec, threshold=config.threshold, max_iters=config.max_iters)
    except (ValueError, ArithmeticError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
        rec.wall_time_s = time.perf_counter() - t0
        return rec
    rec.nmse = nmse(x_org, sol.x_star)
    rec.iterations = sol.iterations
    rec.converged = sol.converged
    rec.final_residual = sol.final_residual
    rec.wall_time_s = time.perf_counter() - t0
    return rec


def _run_task(args):
    return run_trial(*args)


def _map(tasks, workers):
    if workers <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks, chunksize=1))


def tune_cell(config: TrialConfig, model, d, snr_db, tuning_trials=3, workers=1):
    """Coarse grid search of ``(lambda, alpha)`` for one cell by oracle NMSE.

    Tuning trials use indices past the evaluation trials, so the chosen
    parameters are scored on held-out draws. ``lambda`` is scanned over
    ``2^k`` multiples (``k = -2..2``) of the configured value and ``alpha``
    over a family-specific triple around it; ``theta`` stays fixed.
    """
    lam0, alpha0, theta = config.params_for(model)
    fam = model_info(model).family
    lams = [lam0 * 2.0 ** k for k in range(-2, 3)]
    if fam == "tgv":
        alphas = [alpha0 / 2, alpha0, (1 + alpha0) / 2]
    elif fam == "l21":
        alphas = sorted({max(1, int(round(alpha0 * f))) for f in (0.5, 1.0, 2.0)})
    elif fam == "lop":
        alphas = [alpha0 / 2, alpha0, alpha0 * 2]
    else:
        alphas = [alpha0]
    held_out = range(config.trials, config.trials + tuning_trials)
    best = None
    for lam, alpha in itertools.product(lams, alphas):
        tasks = [(config, model, d, snr_db, t, lam, alpha, theta) for t in held_out]
        score = float(np.mean([r.nmse for r in _map(tasks, workers)]))
        if best is None or score < best[0]:
            best = (score, lam, alpha)
    return best[1], best[2], theta


def run_sweep(config: TrialConfig, workers=1, grid=False, tuning_trials=3):
    """Run every ``(model, d, snr_db)`` cell for ``config.trials`` trials.

    Parameters
    ----------
    config : TrialConfig
    workers : int
        Process count; results are ordered by cell and trial regardless.
    grid : bool
        Tune ``(lambda, alpha)`` per cell with :func:`tune_cell` first
        (``--grid`` mode); otherwise use the configured values (``--fixed``).

    Returns
    -------
    list of TrialRecord
    """
    tasks = []
    for model, d, snr in config.cells():
        if grid:
            lam, alpha, theta = tune_cell(config, model, d, snr, tuning_trials, workers)
        else:
            lam, alpha, theta = config.params_for(model)
        tasks.extend((config, model, d, snr, t, lam, alpha, theta) for t in range(config.trials))
    return _map(tasks, workers)


def _key(r):
    return (r.scenario, r.model, r.n, r.d, r.snr_db)


def aggregate(records):
    """Per-cell rows ``(scenario, model, n, d, snr_db, trials, mean_nmse, mean_iterations)``."""
    groups = {}
    for r in records:
        groups.setdefault(_key(r), []).append(r)
    rows = []
    for key, recs in groups.items():
        rows.append(key + (len(recs),
                           math.fsum(r.nmse for r in recs) / len(recs),
                           math.fsum(r.iterations for r in recs) / len(recs)))
    return rows


def cell_summary(records, model, d=None, snr_db=None):
    """``(mean, standard error, count)`` of the NMSE over matching records."""
    vals = np.array([r.nmse for r in records if r.model == model
                     and (d is None or r.d == d) and (snr_db is None or r.snr_db == snr_db)])
    if vals.size == 0:
        raise ValueError("no matching records")
    sem = float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else math.inf
    return float(vals.mean()), sem, int(vals.size)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write(rows, header, out):
    close = False
    if out is None:
        out = io.StringIO()
    elif isinstance(out, str):
        out = open(out, "w", newline="", encoding="utf-8")
        close = True
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    if close:
        out.close()
        return None
    return out.getvalue() if isinstance(out, io.StringIO) else None


def write_detail_csv(records, out=None, timings=True):
    """Write the detail CSV to a path or file object (returns text if ``out`` is None).

    ``timings=False`` writes ``wall_time_s`` as 0.0 so that reruns with the
    same seed are byte-identical.
    """
    rows = [(r.scenario, r.model, r.n, r.d, float(r.snr_db), r.trial, r.nmse, r.iterations,
             r.converged, r.wall_time_s if timings else 0.0) for r in records]
    return _write(rows, DETAIL_FIELDS, out)


def write_aggregate_csv(records, out=None):
    rows = [(s, m, n, d, float(snr), k, mn, mi) for s, m, n, d, snr, k, mn, mi in aggregate(records)]
    return _write(rows, AGGREGATE_FIELDS, out)
