"""Command-line entry point.

One binary with git-style subcommands: routes, loads, synth, fit-dist,
estimate, eval, export-plot. Any flag can also be supplied from a
``key=value`` config file via --config; explicit flags win. The seed falls
back to the TMEST_SEED environment variable, then 0. Outputs contain no
timestamps, so identical inputs and seed give byte-identical files.

Exit codes: 0 success, 2 usage error, 1 data or computation error (message
on stderr with an ``error:`` prefix).
"""

from __future__ import annotations

import argparse
import glob
import json
import math
import os
import sys

import numpy as np

from . import dist, evaluate, gan, projection, topology, traffic
from .errors import TmestError


def _expand_paths(patterns) -> list[str]:
    out: list[str] = []
    for pat in patterns:
        hits = sorted(glob.glob(pat))
        out.extend(hits if hits else [pat])
    return out


def _load_config(path) -> dict[str, str]:
    cfg: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise TmestError(f"{path}:{ln}: expected key=value")
            key, _, value = line.partition("=")
            cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


class _Resolver:
    """Flag > config file > default, with casting."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.cfg = _load_config(args.config) if getattr(args, "config", None) else {}

    def get(self, key: str, default=None, cast=str):
        val = getattr(self.args, key, None)
        if val is None and key in self.cfg:
            val = self.cfg[key]
        if val is None:
            return default
        return cast(val) if isinstance(val, str) and cast is not str else val

    def get_list(self, key: str) -> list[str]:
        val = getattr(self.args, key, None)
        if val:
            return list(val)
        if key in self.cfg:
            return self.cfg[key].split()
        return []

    def seed(self) -> int:
        val = self.get("seed", None, int)
        if val is not None:
            return int(val)
        env = os.environ.get("TMEST_SEED")
        return int(env) if env else 0


def _topology_and_support(res: _Resolver):
    topo_path = res.get("topology")
    if not topo_path:
        raise TmestError("--topology is required")
    topo = topology.read_topology(topo_path)
    sup_path = res.get("support")
    support = topology.read_support(sup_path, topo) if sup_path else topology.all_pairs(topo)
    return topo, support


def _routing(res: _Resolver):
    topo, support = _topology_and_support(res)
    mode = res.get("mode", "sp")
    A = topology.build_routing_matrix(topo, support, mode)
    return topo, support, A


def _target(res: _Resolver):
    alpha = res.get("alpha", None, float)
    target_tm = res.get("target_tm")
    if alpha is not None and target_tm:
        raise TmestError("give either --alpha or --target-tm, not both")
    if alpha is not None:
        return dist.PowerLawCdf(float(alpha))
    if target_tm:
        return dist.tabulated_from_sample(_read_demand_values(target_tm))
    return None


def _read_demand_values(path) -> np.ndarray:
    import csv as _csv

    with open(path, newline="", encoding="utf-8") as fh:
        reader = _csv.DictReader(fh)
        if not reader.fieldnames or "demand_mbps" not in reader.fieldnames:
            raise TmestError(f"{path}: expected header src,dst,demand_mbps")
        return np.array([float(row["demand_mbps"]) for row in reader])


def synth_tm(p: int, alpha: float, total_mbps: float, seed) -> np.ndarray:
    """Demands with normalized cdf y**alpha, scaled so the maximum is total_mbps."""
    if p < 1:
        raise TmestError("p must be at least 1")
    if not total_mbps > 0:
        raise TmestError("total demand must be positive")
    return total_mbps * dist.sample_normalized_power_law(p, alpha, seed)


def _synthetic_pairs(p: int) -> list[tuple[str, str]]:
    n = 2
    while n * (n - 1) < p:
        n += 1
    pairs = [(f"n{s}", f"n{d}") for s in range(n) for d in range(n) if s != d]
    return pairs[:p]


def _estimator(res: _Resolver, support_size: int):
    method = res.get("method")
    if method == "projd":
        target = _target(res)
        if target is None:
            raise TmestError("projd needs --alpha or --target-tm")
        row_order = {"cyclic": "cyclic", "random": "randomized"}.get(
            res.get("row_order", "cyclic"), None
        )
        if row_order is None:
            raise TmestError("--row-order must be cyclic or random")
        cfg = projection.ProjDConfig(
            cycles=res.get("cycles", 20, int),
            inner_cycles=res.get("inner", 50, int),
            retries=res.get("retries", 8, int),
            row_order=row_order,
            tolerance=res.get("tolerance", 1e-9, float),
            final_polish_cycles=res.get("polish", None, int),
            seed=res.seed(),
        )
        return evaluate.ProjDEstimator(target, cfg), target
    if method == "gan":
        weights = res.get("weights")
        if not weights:
            raise TmestError("gan needs --weights")
        net = gan.load_generator(weights)
        if net.output_dim != support_size:
            raise TmestError(
                f"generator emits {net.output_dim} demands, support has {support_size} pairs"
            )
        cfg = gan.GanEstimateConfig(
            inits=res.get("inits", 100, int),
            steps=res.get("steps", 10_000, int),
            learning_rate=res.get("learning_rate", 1e-3, float),
            seed=res.seed(),
        )
        return evaluate.GanEstimator(net, cfg), _target(res)
    raise TmestError(f"unknown method {method!r}; use projd or gan")


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_routes(res: _Resolver) -> int:
    topo, support, A = _routing(res)
    out = res.get("out")
    if not out:
        raise TmestError("--out is required")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("link_src,link_dst,pair_src,pair_dst,fraction\n")
        for e, (u, v) in enumerate(A.row_links):
            for j in np.nonzero(A.entries[e])[0]:
                s, d = support.pairs[j]
                fh.write(
                    f"{topo.nodes[u]},{topo.nodes[v]},{topo.nodes[s]},{topo.nodes[d]},"
                    f"{repr(float(A.entries[e, j]))}\n"
                )
    return 0


def _cmd_loads(res: _Resolver) -> int:
    topo, support, A = _routing(res)
    tm_path = res.get("tm")
    if not tm_path:
        raise TmestError("--tm is required")
    x = traffic.read_tm(tm_path, topo, support)
    b = traffic.simulate_loads(A, x)
    out = res.get("out")
    if not out:
        raise TmestError("--out is required")
    traffic.write_loads(out, b, topo)
    return 0


def _cmd_synth(res: _Resolver) -> int:
    alpha = res.get("alpha", None, float)
    if alpha is None:
        raise TmestError("--alpha is required")
    total = res.get("total_mbps", 1000.0, float)
    out = res.get("out")
    if not out:
        raise TmestError("--out is required")
    sup_path = res.get("support")
    topo_path = res.get("topology")
    if sup_path and topo_path:
        topo = topology.read_topology(topo_path)
        support = topology.read_support(sup_path, topo)
        pairs = [(topo.nodes[s], topo.nodes[d]) for s, d in support.pairs]
    else:
        p = res.get("p", None, int)
        if p is None:
            raise TmestError("give --p, or --topology with --support")
        pairs = _synthetic_pairs(int(p))
    demands = synth_tm(len(pairs), float(alpha), float(total), res.seed())
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("src,dst,demand_mbps\n")
        for (s, d), val in zip(pairs, demands):
            fh.write(f"{s},{d},{repr(float(val))}\n")
    return 0


def _cmd_fit_dist(res: _Resolver) -> int:
    paths = _expand_paths(res.get_list("tm"))
    if not paths:
        raise TmestError("--tm is required")
    normalize = res.get("normalize", "per-tm")
    if normalize not in ("per-tm", "global"):
        raise TmestError("--normalize must be per-tm or global")
    pools = []
    for path in paths:
        vals = _read_demand_values(path)
        pos = vals[vals > 0]
        if pos.size == 0:
            continue
        pools.append(pos / pos.max() if normalize == "per-tm" else pos)
    if not pools:
        raise TmestError("no positive demands in the input TMs")
    pooled = np.concatenate(pools)
    if normalize == "global":
        pooled = pooled / pooled.max()
    alpha = dist.fit_alpha_mle(pooled)
    ks = dist.ks_distance(pooled, dist.PowerLawCdf(alpha))
    doc = {"alpha": alpha, "n_positive": int(pooled.size), "ks_to_fit": ks}
    out = res.get("out")
    text = json.dumps(doc, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_estimate(res: _Resolver) -> int:
    topo, support, A = _routing(res)
    loads_path = res.get("loads")
    if not loads_path:
        raise TmestError("--loads is required")
    b = traffic.read_loads(loads_path, topo)
    estimator, _ = _estimator(res, support.size)
    x, extra = estimator(A, b.values, res.seed(), 0)
    out = res.get("out")
    if not out:
        raise TmestError("--out is required")
    traffic.write_tm(out, x, topo, support)
    diag_path = res.get("diagnostics") or os.path.splitext(out)[0] + ".diag.json"
    _, rel = traffic.residual(A, x, b.values)
    doc = {"method": res.get("method"), "relative_link_residual": rel}
    if extra:
        doc.update(extra)
    with open(diag_path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def _cmd_eval(res: _Resolver) -> int:
    topo, support, A = _routing(res)
    paths = _expand_paths(res.get_list("tm"))
    if not paths:
        raise TmestError("--tm is required")
    tms = [traffic.read_tm(p, topo, support).values for p in paths]
    estimator, target = _estimator(res, support.size)
    out_dir = res.get("out_dir")
    if not out_dir:
        raise TmestError("--out-dir is required")
    os.makedirs(out_dir, exist_ok=True)
    report = evaluate.run_experiment(
        A,
        tms,
        estimator,
        target,
        base_seed=res.seed(),
        jobs=res.get("jobs", 1, int),
        out_dir=out_dir,
        topo=topo,
    )
    sys.stdout.write(
        f"nmae={report.nmae:.6g} rmse_mbps={report.rmse_mbps:.6g} "
        f"relative_link_residual={report.relative_link_residual:.6g}\n"
    )
    return 0


def _cmd_export_plot(res: _Resolver) -> int:
    topo, support, A = _routing(res)
    truth_paths = _expand_paths(res.get_list("tm"))
    est_paths = _expand_paths(res.get_list("est"))
    if not truth_paths or not est_paths:
        raise TmestError("--tm and --est are required")
    if len(truth_paths) != len(est_paths):
        raise TmestError("--tm and --est must list the same number of files")
    truths = [traffic.read_tm(p, topo, support).values for p in truth_paths]
    ests = [traffic.read_tm(p, topo, support).values for p in est_paths]
    loads = [A.entries @ t for t in truths]
    out_dir = res.get("out_dir")
    if not out_dir:
        raise TmestError("--out-dir is required")
    evaluate.write_plot_data(out_dir, A, truths, ests, loads, _target(res), topo=topo)
    return 0


def _jsonable(doc):
    out = {}
    for k, v in doc.items():
        if isinstance(v, float) and math.isnan(v):
            out[k] = None
        else:
            out[k] = v
    return out


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, topo=False, seed=True):
        sp.add_argument("--config", help="key=value file supplying any flag")
        sp.add_argument("--format-version", dest="format_version", type=int,
                        help="file format version (only 1 exists)")
        if topo:
            sp.add_argument("--topology", help="topology CSV (src,dst,weight[,capacity])")
            sp.add_argument("--support", help="support CSV (src,dst); default all pairs")
            sp.add_argument("--mode", choices=["sp", "ecmp"], help="routing mode (default sp)")
        if seed:
            sp.add_argument("--seed", type=int, help="RNG seed (default $TMEST_SEED or 0)")

    sp = sub.add_parser("routes", help="write the routing matrix as sparse CSV")
    common(sp, topo=True, seed=False)
    sp.add_argument("--out", help="output CSV path")

    sp = sub.add_parser("loads", help="simulate per-link loads for a TM")
    common(sp, topo=True, seed=False)
    sp.add_argument("--tm", help="traffic matrix CSV")
    sp.add_argument("--out", help="output loads CSV path")

    sp = sub.add_parser("synth", help="draw a synthetic power-law TM")
    common(sp, topo=True)
    sp.add_argument("--p", type=int, help="number of OD pairs (when no support file)")
    sp.add_argument("--alpha", type=float, help="power-law exponent")
    sp.add_argument("--total-mbps", dest="total_mbps", type=float, help="largest demand (default 1000)")
    sp.add_argument("--out", help="output TM CSV path")

    sp = sub.add_parser("fit-dist", help="fit the power-law exponent to TMs")
    common(sp, seed=False)
    sp.add_argument("--tm", nargs="+", help="TM CSV files (globs allowed)")
    sp.add_argument("--normalize", choices=["per-tm", "global"], help="normalization (default per-tm)")
    sp.add_argument("--out", help="output JSON path (default stdout)")

    def estimator_flags(sp):
        sp.add_argument("--method", choices=["projd", "gan"], help="estimation method")
        sp.add_argument("--alpha", type=float, help="power-law target exponent")
        sp.add_argument("--target-tm", dest="target_tm", help="TM CSV defining a tabulated target")
        sp.add_argument("--cycles", type=int, help="projd outer rounds (default 20)")
        sp.add_argument("--inner", type=int, help="projd sweeps between snaps (default 50)")
        sp.add_argument("--retries", type=int, help="projd candidate draws per snap (default 8)")
        sp.add_argument("--row-order", dest="row_order", choices=["cyclic", "random"], help="projd row order")
        sp.add_argument("--polish", type=int, help="projd final projection-only sweeps")
        sp.add_argument("--tolerance", type=float, help="projd stop threshold (default 1e-9)")
        sp.add_argument("--weights", help="gan generator weight file (JSON)")
        sp.add_argument("--inits", type=int, help="gan random starts (default 100)")
        sp.add_argument("--steps", type=int, help="gan optimizer steps (default 10000)")
        sp.add_argument("--learning-rate", dest="learning_rate", type=float, help="gan step size (default 1e-3)")

    sp = sub.add_parser("estimate", help="estimate a TM from measured link loads")
    common(sp, topo=True)
    sp.add_argument("--loads", help="link-load CSV")
    estimator_flags(sp)
    sp.add_argument("--jobs", type=int, help="accepted for config compatibility; one estimate is sequential")
    sp.add_argument("--out", help="output TM CSV path")
    sp.add_argument("--diagnostics", help="JSON sidecar path (default <out>.diag.json)")

    sp = sub.add_parser("eval", help="run an estimation experiment over true TMs")
    common(sp, topo=True)
    sp.add_argument("--tm", nargs="+", help="true TM CSV files (globs allowed)")
    estimator_flags(sp)
    sp.add_argument("--jobs", type=int, help="parallel per-TM workers (default 1)")
    sp.add_argument("--out-dir", dest="out_dir", help="directory for report.json and plot CSVs")

    sp = sub.add_parser("export-plot", help="write cdf/demands/links plot CSVs")
    common(sp, topo=True, seed=False)
    sp.add_argument("--tm", nargs="+", help="true TM CSV files")
    sp.add_argument("--est", nargs="+", help="estimated TM CSV files (same order)")
    sp.add_argument("--alpha", type=float, help="target exponent for the cdf panel")
    sp.add_argument("--target-tm", dest="target_tm", help="TM CSV defining a tabulated target")
    sp.add_argument("--out-dir", dest="out_dir", help="output directory")

    return parser


_COMMANDS = {
    "routes": _cmd_routes,
    "loads": _cmd_loads,
    "synth": _cmd_synth,
    "fit-dist": _cmd_fit_dist,
    "estimate": _cmd_estimate,
    "eval": _cmd_eval,
    "export-plot": _cmd_export_plot,
}


def cli_main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        res = _Resolver(args)
        version = res.get("format_version", 1, int)
        if version != 1:
            raise TmestError(f"unsupported format version {version}")
        return _COMMANDS[args.command](res)
    except (TmestError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
