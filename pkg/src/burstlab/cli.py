"""Command-line experiment driver.

    burstlab <scan|single|net|td|hierarchy|toy-sweep> --config <path>
             [--out <dir>] [--seed <u64>] [--dt <ms>] [--no-plots]

Each command reads one YAML config (see burstlab.config), writes delimited
outputs plus rendered figures into the output directory, and echoes the
fully resolved config into every file so a rerun byte-reproduces the
results. The BURSTLAB_OUT environment variable overrides the output
directory (the --out flag wins over both).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, grid_values, load_config
from .errors import BurstlabError, InsufficientDataError
from .hierarchy import (build_propagation_graph, detect_primary, grade_layers,
                        predict_order, verify_hierarchy)
from .integrator import IntegratorConfig, simulate_single
from .io import raster_rows, spikes_rows, write_csv, write_json
from .metrics import (classify_firing, cv, delta_n, locked_phase,
                      network_burst_size, reference_td, segment_bursts,
                      stabilized_delta, td_all)
from .model import NeuronParams
from .network import paired_run, simulate_network
from .topology import Topology, serialize


def _meta(cfg: ExperimentConfig, **extra) -> dict:
    meta = cfg.provenance()
    meta["version"] = __version__
    meta.update(extra)
    return meta


def cmd_scan(cfg: ExperimentConfig) -> None:
    v_r_values = grid_values(cfg.scan["v_r"])
    i_values = grid_values(cfg.scan["i"])
    rows = []
    cv_grid = np.full((v_r_values.size, i_values.size), np.nan)
    for a, v_r in enumerate(v_r_values):
        for b, i_ext in enumerate(i_values):
            params = cfg.params.with_overrides(V_r=float(v_r), I=float(i_ext))
            train, _ = simulate_single(params, V0=params.E_L, cfg=cfg.integrator)
            try:
                c = cv(train)
                label = classify_firing(c)
                cv_grid[a, b] = c
            except InsufficientDataError:
                c, label = float("nan"), "quiescent"
            rows.append((float(v_r), float(i_ext), c, label))
    meta = _meta(cfg)
    write_csv(cfg.out_dir / "scan.csv", "V_r_mV,I_pA,CV,class", rows, meta)
    write_json(cfg.out_dir / "run_meta.json", {}, meta)
    if cfg.plots:
        from .plots import plot_scan_region

        plot_scan_region(cfg.out_dir / "region_map.png", v_r_values, i_values, cv_grid)


def cmd_single(cfg: ExperimentConfig) -> None:
    v0 = float(cfg.single.get("v0", cfg.params.E_L))
    w0 = float(cfg.single.get("w0", 0.0))
    run_cfg = cfg.integrator
    if cfg.plots and not run_cfg.record_trajectory:
        run_cfg = replace(run_cfg, record_trajectory=True)
    train, traj = simulate_single(cfg.params, V0=v0, w0=w0, cfg=run_cfg)
    meta = _meta(cfg, v0=v0, w0=w0)
    write_csv(cfg.out_dir / "spikes.csv", "neuron_id,spike_index,time_ms",
              [(0, k, float(t)) for k, t in enumerate(train.times)], meta)
    stats: dict = {"n_spikes": len(train)}
    try:
        c = cv(train)
        stats.update(cv=c, firing_class=classify_firing(c),
                     spikes_per_burst=segment_bursts(train).k)
    except (InsufficientDataError, BurstlabError) as e:
        stats["note"] = str(e)
    write_json(cfg.out_dir / "stats.json", stats, meta)
    if run_cfg.record_trajectory and traj is not None:
        write_csv(cfg.out_dir / "trajectory.csv", "t_ms,V_mV,w_pA",
                  [(float(t), float(v), float(w)) for t, v, w in
                   zip(traj.times, traj.V[:, 0], traj.w[:, 0])], meta)
    write_json(cfg.out_dir / "run_meta.json", {}, meta)
    if cfg.plots and traj is not None:
        from .plots import plot_single_trace

        plot_single_trace(cfg.out_dir / "single_trace.png", traj, cfg.params,
                          train.times)


def _network_meta(cfg: ExperimentConfig, topo: Topology) -> dict:
    extra = {"topology_hash": topo.content_hash()}
    if topo.seed_used is not None:
        extra["topology_seed_used"] = topo.seed_used
    return _meta(cfg, **extra)


def cmd_net(cfg: ExperimentConfig) -> None:
    topo = cfg.build_topology()
    v0 = cfg.resolve_initial_v(topo.n)
    run = simulate_network(topo, cfg.params, v0, cfg.integrator)
    meta = _network_meta(cfg, topo)
    write_csv(cfg.out_dir / "spikes.csv", "neuron_id,spike_index,time_ms",
              spikes_rows(run), meta)
    from .io import atomic_write_text, canonical_json

    atomic_write_text(cfg.out_dir / "topology.edges",
                      f"# config: {canonical_json(meta)}\n" + serialize(topo))
    k = network_burst_size(run)
    sync = stabilized_delta(run, k)
    write_csv(cfg.out_dir / "delta_n.csv", "n,delta_s",
              [(n + 1, float(d)) for n, d in enumerate(sync.delta_series)], meta)
    lp = locked_phase(run, k)
    write_json(cfg.out_dir / "locked_phase.json", {
        "burst": lp.n,
        "spikes_per_burst": k,
        "groups": [list(g) for g in lp.groups],
        "order": list(lp.order),
        "relative_times_ms": lp.rel_times,
        "stabilized_delta_s": sync.stabilized,
        "stabilized_at": sync.stabilized_at,
        "diagnostic": sync.diagnostic,
    }, meta)
    n_max = len(sync.delta_series)
    late = sync.stabilized_at if sync.stabilized_at is not None else min(100, n_max)
    write_csv(cfg.out_dir / "raster_first.csv", "neuron_id,time_ms",
              raster_rows(run, k, 1), meta)
    write_csv(cfg.out_dir / "raster_late.csv", "neuron_id,time_ms",
              raster_rows(run, k, late), meta)
    write_json(cfg.out_dir / "run_meta.json",
               {"spikes_per_burst": k, "raster_bursts": [1, late]}, meta)
    if cfg.plots:
        from .plots import plot_delta_series, plot_raster

        plot_delta_series(cfg.out_dir / "delta_n.png", sync)
        plot_raster(cfg.out_dir / "raster.png",
                    [("burst 1", raster_rows(run, k, 1)),
                     (f"burst {late}", raster_rows(run, k, late))])


def cmd_td(cfg: ExperimentConfig) -> None:
    topo = cfg.build_topology()
    v0 = cfg.resolve_initial_v(topo.n)
    coupled, uncoupled = paired_run(topo, cfg.params, v0, cfg.integrator)
    meta = _network_meta(cfg, topo)
    traces = td_all(coupled, uncoupled)
    for tr in traces:
        write_csv(cfg.out_dir / f"td_{tr.neuron_id}.csv", "k,td_ms",
                  [(kk, float(v)) for kk, v in enumerate(tr.td_series)], meta)
    k = network_burst_size(coupled)
    ref = reference_td(coupled, uncoupled, k)
    rows = []
    for tr in traces:
        stab = "" if tr.stabilized_td is None else f"{tr.stabilized_td:.6g}"
        rows.append((tr.neuron_id, stab, float(ref[tr.neuron_id])))
    write_csv(cfg.out_dir / "stabilized_td.csv",
              "neuron_id,stabilized_td_ms,reference_td_ms", rows, meta)
    write_json(cfg.out_dir / "run_meta.json", {"spikes_per_burst": k}, meta)
    if cfg.plots:
        from .plots import plot_td_series

        plot_td_series(cfg.out_dir / "td.png", traces)


def cmd_hierarchy(cfg: ExperimentConfig) -> None:
    topo = cfg.build_topology()
    v0 = cfg.resolve_initial_v(topo.n)
    coupled, uncoupled = paired_run(topo, cfg.params, v0, cfg.integrator)
    meta = _network_meta(cfg, topo)
    k = network_burst_size(coupled)
    ref_td = reference_td(coupled, uncoupled, k)
    primary = detect_primary(v0, ref_td)
    layers = grade_layers(topo, primary)
    graph = build_propagation_graph(topo, layers)
    lp = locked_phase(coupled, k)
    first_spike = lp.rel_times[:, 0]
    order = predict_order(graph, v0, first_spike)
    report = verify_hierarchy(graph, coupled, lp)
    from .io import atomic_write_text

    atomic_write_text(cfg.out_dir / "propagation.dot", graph.to_dot())
    rows = []
    for m, layer in enumerate(graph.layers):
        for v in layer:
            rows.append((v, m, graph.dr.get(v, ""), graph.d[v]))
    rows.sort()
    write_csv(cfg.out_dir / "layers.csv", "neuron_id,layer,dr,d", rows, meta)
    write_json(cfg.out_dir / "predicted_order.json", {
        "primary": list(primary),
        "reference_td_ms": ref_td,
        "predicted": [[list(g) for g in layer] for layer in order],
        "measured_first_spike_ms": first_spike,
        "measured_groups": [list(g) for g in lp.groups],
        "burst": lp.n,
    }, meta)
    write_json(cfg.out_dir / "verification.json", report.to_dict(), meta)
    write_json(cfg.out_dir / "run_meta.json", {"spikes_per_burst": k}, meta)
    if cfg.plots:
        from .plots import plot_propagation

        plot_propagation(cfg.out_dir / "hierarchy.png", graph)


def cmd_toy_sweep(cfg: ExperimentConfig) -> None:
    topo = Topology(2, ((0, 1),))
    rows = []
    diagnostics = []
    for v0 in cfg.toy["v0"]:
        for diff in grid_values(cfg.toy["diff"]):
            v_init = np.array([v0, v0 - float(diff)])
            run = simulate_network(topo, cfg.params, v_init, cfg.integrator)
            k = network_burst_size(run)
            d1 = delta_n(run, k, 1)
            sync = stabilized_delta(run, k)
            stab = float("nan") if sync.stabilized is None else sync.stabilized
            if sync.stabilized is None:
                diagnostics.append({"v0": v0, "diff": float(diff),
                                    "diagnostic": sync.diagnostic})
            rows.append((float(v0), float(diff), float(d1), float(stab)))
    meta = _meta(cfg)
    write_csv(cfg.out_dir / "toy_sweep.csv", "V0_mV,diff_mV,delta1_s,delta_s",
              rows, meta)
    write_json(cfg.out_dir / "run_meta.json", {"uncertified": diagnostics}, meta)
    if cfg.plots:
        from .plots import plot_toy_sweep

        plot_toy_sweep(cfg.out_dir / "toy_sweep.png", rows)


COMMANDS = {
    "scan": cmd_scan,
    "single": cmd_single,
    "net": cmd_net,
    "td": cmd_td,
    "hierarchy": cmd_hierarchy,
    "toy-sweep": cmd_toy_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="burstlab",
        description="aEIF burst-synchronization experiments from YAML configs")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run a {name} experiment")
        p.add_argument("--config", required=True, type=Path,
                       help="YAML experiment config")
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (overrides config and BURSTLAB_OUT)")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--dt", type=float, default=None, help="step size override (ms)")
        p.add_argument("--no-plots", action="store_true",
                       help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out or os.environ.get("BURSTLAB_OUT")
    try:
        cfg = load_config(args.config, kind=args.command,
                          overrides={"out": out, "seed": args.seed, "dt": args.dt})
        if args.no_plots:
            cfg = replace(cfg, plots=False)
        COMMANDS[args.command](cfg)
    except BurstlabError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
