"""Error metrics and the per-TM experiment harness.

Metrics follow the usual tomography conventions: errors are computed over
the entries with nonzero true demand unless told otherwise, NMAE is the L1
ratio ||x - xhat||_1 / ||x||_1, and RMSE is in Mbps.

`run_experiment` simulates loads for each true TM, runs an estimator per TM
with a deterministic per-TM seed, aggregates pooled and per-TM scores, and
optionally writes plot data: normalized-cdf curves (each pool scaled by that
batch's maximum), estimated-vs-true demand pairs, and fitted-vs-given link
loads for the first ten TMs.
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dist import ks_distance
from .errors import DimensionMismatch, EmptyMask, ZeroTruth
from .gan import GanEstimateConfig, GeneratorNet, gan_estimate
from .projection import ProjDConfig, proj_d_estimate
from .topology import RoutingMatrix, Topology
from .traffic import _as_matrix, _as_vector


def _masked(truth, est, nonzero_only: bool):
    t = _as_vector(truth)
    e = _as_vector(est)
    if len(t) != len(e):
        raise DimensionMismatch(f"truth has {len(t)} entries, estimate has {len(e)}")
    mask = t > 0 if nonzero_only else np.ones(len(t), dtype=bool)
    return t[mask], e[mask]


def nmae(truth, est, nonzero_only: bool = True) -> float:
    """Normalized mean absolute error over the masked entries."""
    t, e = _masked(truth, est, nonzero_only)
    denom = float(np.sum(np.abs(t)))
    if denom == 0.0:
        raise ZeroTruth("masked true demands sum to zero")
    return float(np.sum(np.abs(t - e))) / denom


def rmse(truth, est, nonzero_only: bool = True) -> float:
    """Root mean square error (Mbps) over the masked entries."""
    t, e = _masked(truth, est, nonzero_only)
    if t.size == 0:
        raise EmptyMask("mask selects no entries")
    return float(np.sqrt(np.mean((t - e) ** 2)))


@dataclass
class EvalReport:
    rmse_mbps: float
    nmae: float
    ks_to_target: float | None
    relative_link_residual: float
    rmse_mbps_mean_per_tm: float
    per_tm: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# Estimators are picklable callables (A, b, seed, tm_index) -> (x, extra).


class ProjDEstimator:
    def __init__(self, target, config: ProjDConfig | None = None):
        self.target = target
        self.config = config or ProjDConfig()

    def __call__(self, A, b, seed: int, tm_index: int):
        cfg = dataclasses.replace(self.config, seed=seed)
        est, diag = proj_d_estimate(A, b, self.target, cfg)
        return est.values, {"ks": diag.final_ks}


class GanEstimator:
    def __init__(self, net: GeneratorNet, config: GanEstimateConfig | None = None):
        self.net = net
        self.config = config or GanEstimateConfig()

    def __call__(self, A, b, seed: int, tm_index: int):
        cfg = dataclasses.replace(self.config, seed=seed)
        est, diag = gan_estimate(self.net, A, b, cfg)
        return est.values, {"loss": diag.best_loss}


class OracleEstimator:
    """Returns the true TM; a harness sanity check."""

    def __init__(self, tms):
        self.tms = [np.array(_as_vector(t)) for t in tms]

    def __call__(self, A, b, seed: int, tm_index: int):
        return self.tms[tm_index], None


def _run_one(estimator, A, truth, seed, index):
    mat = _as_matrix(A)
    t = _as_vector(truth)
    b = mat @ t
    est, extra = estimator(A, b, seed, index)
    est = _as_vector(est)
    r = float(np.linalg.norm(mat @ est - b))
    bn = float(np.linalg.norm(b))
    entry = {
        "tm_index": index,
        "nmae": nmae(t, est) if np.any(t > 0) else None,
        "rmse_mbps": rmse(t, est) if np.any(t > 0) else None,
        "relative_link_residual": r / bn if bn > 0 else r,
    }
    if extra:
        entry.update({k: v for k, v in extra.items() if k not in entry})
    return est, b, r, bn, entry


def run_experiment(
    A,
    tms,
    estimator,
    target=None,
    *,
    base_seed: int = 0,
    jobs: int = 1,
    out_dir=None,
    topo: Topology | None = None,
) -> EvalReport:
    """Estimate every TM from its simulated loads and aggregate the scores."""
    truths = [np.array(_as_vector(t)) for t in tms]
    tasks = [(estimator, A, truths[i], base_seed + i, i) for i in range(len(truths))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one_star, tasks))
    else:
        results = [_run_one(*t) for t in tasks]

    estimates = [r[0] for r in results]
    loads = [r[1] for r in results]
    abs_err_sum = 0.0
    truth_sum = 0.0
    sq_err_sum = 0.0
    n_masked = 0
    res_sq = 0.0
    load_sq = 0.0
    per_tm = []
    for truth, (est, b, r, bn, entry) in zip(truths, results):
        mask = truth > 0
        abs_err_sum += float(np.sum(np.abs(truth[mask] - est[mask])))
        truth_sum += float(np.sum(truth[mask]))
        sq_err_sum += float(np.sum((truth[mask] - est[mask]) ** 2))
        n_masked += int(mask.sum())
        res_sq += r * r
        load_sq += bn * bn
        per_tm.append(entry)

    if truth_sum == 0.0:
        raise ZeroTruth("masked true demands sum to zero")
    est_pool = np.concatenate(estimates)
    ks = None
    if target is not None:
        pos = est_pool[est_pool > 0]
        ks = ks_distance(pos / pos.max(), target) if pos.size else 1.0
    per_tm_rmse = [e["rmse_mbps"] for e in per_tm if e["rmse_mbps"] is not None]
    report = EvalReport(
        rmse_mbps=float(np.sqrt(sq_err_sum / n_masked)) if n_masked else 0.0,
        nmae=abs_err_sum / truth_sum,
        ks_to_target=ks,
        relative_link_residual=float(np.sqrt(res_sq / load_sq)) if load_sq > 0 else float(np.sqrt(res_sq)),
        rmse_mbps_mean_per_tm=float(np.mean(per_tm_rmse)) if per_tm_rmse else 0.0,
        per_tm=per_tm,
    )
    if out_dir is not None:
        write_plot_data(out_dir, A, truths, estimates, loads, target, topo=topo)
        with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


def _run_one_star(args):
    return _run_one(*args)


# ---------------------------------------------------------------------------
# Plot data


def _pool_cdf(values: np.ndarray, grid: np.ndarray):
    pos = values[values > 0]
    if pos.size == 0:
        return np.zeros_like(grid)
    pos = np.sort(pos / pos.max())
    return np.searchsorted(pos, grid, side="right") / pos.size


def _pair_label(topo: Topology | None, support, j: int) -> str:
    s, d = support.pairs[j]
    if topo is not None:
        return f"{topo.nodes[s]}>{topo.nodes[d]}"
    return f"{s}>{d}"


def _link_label(topo: Topology | None, row_links, e: int) -> str:
    u, v = row_links[e]
    if topo is not None:
        return f"{topo.nodes[u]}>{topo.nodes[v]}"
    return f"{u}>{v}"


def write_plot_data(
    out_dir,
    A,
    truths,
    estimates,
    loads,
    target=None,
    *,
    topo: Topology | None = None,
    grid_points: int = 1001,
    max_tms: int = 10,
) -> None:
    """Write cdf.csv, demands.csv and links.csv under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    mat = _as_matrix(A)
    grid = np.linspace(0.0, 1.0, grid_points)
    truth_pool = np.concatenate(truths) if truths else np.zeros(0)
    est_pool = np.concatenate(estimates) if estimates else np.zeros(0)
    cdf_truth = _pool_cdf(truth_pool, grid)
    cdf_est = _pool_cdf(est_pool, grid)
    cdf_target = target.evaluate(grid) if target is not None else None
    with open(os.path.join(out_dir, "cdf.csv"), "w", encoding="utf-8") as fh:
        fh.write("value,cdf_truth,cdf_est,cdf_target\n")
        for i, g in enumerate(grid):
            tgt = repr(float(cdf_target[i])) if cdf_target is not None else ""
            fh.write(f"{repr(float(g))},{repr(float(cdf_truth[i]))},{repr(float(cdf_est[i]))},{tgt}\n")

    support = A.support if isinstance(A, RoutingMatrix) else None
    row_links = A.row_links if isinstance(A, RoutingMatrix) else None
    with open(os.path.join(out_dir, "demands.csv"), "w", encoding="utf-8") as fh:
        fh.write("pair,truth,est\n")
        for i in range(min(max_tms, len(truths))):
            for j in range(len(truths[i])):
                label = _pair_label(topo, support, j) if support is not None else str(j)
                fh.write(f"{label},{repr(float(truths[i][j]))},{repr(float(estimates[i][j]))}\n")

    with open(os.path.join(out_dir, "links.csv"), "w", encoding="utf-8") as fh:
        fh.write("link,given,fitted\n")
        for i in range(min(max_tms, len(truths))):
            fitted = mat @ estimates[i]
            for e in range(mat.shape[0]):
                label = _link_label(topo, row_links, e) if row_links is not None else str(e)
                fh.write(f"{label},{repr(float(loads[i][e]))},{repr(float(fitted[e]))}\n")
