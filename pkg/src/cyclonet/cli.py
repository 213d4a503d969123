"""Command-line front end: analyze, simulate, sweep, and table reproduction.

Configuration is a JSON document (schema below, versioned with
schema_version).  Exit codes: 0 success, 2 configuration or validation
error, 3 numerical failure during integration.
"""

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (
    CouplingLaplacian,
    DimensionalParams,
    NetworkModel,
    OscillatorParams,
    generate_topology,
    nondimensionalize,
)
from .report import analyze, report_to_json
from .sim import IntegrationError, SimConfig, export_trajectory_csv, run_simulation
from . import tables

__all__ = ["main", "ConfigError", "RunConfig", "load_config"]

SCHEMA_VERSION = 1

CONFIG_TEMPLATE = {
    "schema_version": 1,
    "model": {"dimensionless": {"b": [0.5] * 9, "p": 3.0}},
    "network": {
        "N": 9,
        "k_index": 2,
        "topology": {"kind": "random", "weight_range": [0.0, 20.0], "seed": 42},
    },
    "sim": {
        "t_end": 2000.0,
        "dt": 0.01,
        "seed": 12345,
        "init_range": [0.0, 1000.0],
        "transient_fraction": 0.5,
        "record_stride": 5,
        "crosscheck": False,
    },
    "output": {"path": "report.json", "csv_path": "trajectory.csv", "precision": 6},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    net: NetworkModel
    sim: SimConfig
    sim_crosscheck: bool
    out_path: str
    csv_path: str
    precision: int
    sweep: Optional[list]
    raw: dict


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing field {where}.{key}")
    return section[key]


def _build_osc(model_section: dict) -> OscillatorParams:
    has_dimless = "dimensionless" in model_section
    has_dim = "dimensional" in model_section
    if has_dimless == has_dim:
        raise ConfigError("model must contain exactly one of 'dimensionless' or 'dimensional'")
    try:
        if has_dimless:
            sec = model_section["dimensionless"]
            return OscillatorParams(
                b=tuple(_require(sec, "b", "model.dimensionless")),
                p=float(_require(sec, "p", "model.dimensionless")),
            )
        sec = model_section["dimensional"]
        d = DimensionalParams(
            synthesis_rates=tuple(_require(sec, "synthesis_rates", "model.dimensional")),
            degradation_rates=tuple(_require(sec, "degradation_rates", "model.dimensional")),
            binding_inverse=float(_require(sec, "binding_inverse", "model.dimensional")),
            hill_p=float(_require(sec, "hill_p", "model.dimensional")),
        )
        return nondimensionalize(d)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"model: {exc}") from exc


def _build_coupling(network_section: dict) -> CouplingLaplacian:
    try:
        if "weights" in network_section:
            return CouplingLaplacian(np.asarray(network_section["weights"], dtype=float))
        topo = _require(network_section, "topology", "network")
        n = int(_require(network_section, "N", "network"))
        kind = _require(topo, "kind", "network.topology")
        kwargs = {}
        if "weight" in topo:
            kwargs["weight"] = float(topo["weight"])
        if "weight_range" in topo:
            kwargs["weight_range"] = tuple(topo["weight_range"])
        if "seed" in topo:
            kwargs["seed"] = topo["seed"]
        if "dims" in topo:
            kwargs["dims"] = tuple(topo["dims"])
        return CouplingLaplacian(generate_topology(kind, n, **kwargs))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"network: {exc}") from exc


def _build_sim(sim_section: dict) -> SimConfig:
    known = {
        "t_end",
        "dt",
        "seed",
        "init_range",
        "transient_fraction",
        "record_stride",
        "record_full",
        "oscillation_rel_threshold",
    }
    unknown = set(sim_section) - known - {"crosscheck", "initial_state"}
    if unknown:
        raise ConfigError(f"sim: unknown field(s) {sorted(unknown)}")
    kwargs = {k: sim_section[k] for k in known if k in sim_section}
    if "init_range" in kwargs:
        kwargs["init_range"] = tuple(kwargs["init_range"])
    if "initial_state" in sim_section:
        kwargs["initial_state"] = np.asarray(sim_section["initial_state"], dtype=float)
    try:
        return SimConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"sim: {exc}") from exc


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")
    osc = _build_osc(_require(doc, "model", "config"))
    network = _require(doc, "network", "config")
    coupling = _build_coupling(network)
    k_index = int(_require(network, "k_index", "network"))
    try:
        net = NetworkModel(osc=osc, coupling=coupling, k=k_index)
    except ValueError as exc:
        raise ConfigError(f"network.k_index: {exc}") from exc
    sim_section = doc.get("sim", {})
    sim = _build_sim(sim_section)
    output = doc.get("output", {})
    sweep = doc.get("sweep", {}).get("parameters") if "sweep" in doc else None
    return RunConfig(
        net=net,
        sim=sim,
        sim_crosscheck=bool(sim_section.get("crosscheck", False)),
        out_path=output.get("path", "report.json"),
        csv_path=output.get("csv_path", "trajectory.csv"),
        precision=int(output.get("precision", 6)),
        sweep=sweep,
        raw=doc,
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    return parse_config(doc)


def _fmt(value, precision: int) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"%.{precision}g" % value
    return str(value)


def write_csv(path: str, header, rows, precision: int = 6):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v, precision) for v in row) + "\n")


def _cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    report = analyze(cfg.net, with_sim=cfg.sim if cfg.sim_crosscheck else None)
    with open(cfg.out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report_to_json(report) + "\n")
    if report.oscillation.R is not None:
        verdict = "OSCILLATORY" if report.oscillation.oscillatory else "NOT OSCILLATORY"
        print(f"R={report.oscillation.R:.4f} {verdict}")
    else:
        print(f"NOT OSCILLATORY ({report.oscillation.reason})")
    print(f"report written to {cfg.out_path}")
    return 0


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    traj, result = run_simulation(cfg.net, cfg.sim)
    export_trajectory_csv(traj, cfg.csv_path, precision=cfg.precision)
    doc = {
        "oscillatory": result.oscillatory,
        "measured_period": result.measured_period,
        "period_stderr": result.period_stderr,
        "sync_error": result.sync_error,
        "synchronized": result.synchronized,
        "amplitude_mean": list(result.amplitude_mean),
        "amplitude_ptp": list(result.amplitude_ptp),
    }
    with open(cfg.out_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    period = "none" if result.measured_period is None else f"{result.measured_period:.4f}"
    print(f"oscillatory={result.oscillatory} period={period} sync_error={result.sync_error:.3e}")
    print(f"trajectory written to {cfg.csv_path}, result to {cfg.out_path}")
    return 0


_SWEEP_COLUMNS = [
    "index",
    "b_all",
    "p",
    "coupling_scale",
    "R",
    "oscillatory",
    "mu",
    "period_estimate",
    "x0",
    "sigma",
    "kappa0",
    "sync_threshold",
    "kappa2",
    "sync_satisfied",
    "required_v2",
]


def _sweep_point(base: RunConfig, assignment: dict, index: int) -> list:
    osc = base.net.osc
    if "b_all" in assignment:
        osc = OscillatorParams(b=(assignment["b_all"],) * osc.M, p=osc.p, time_scale=osc.time_scale)
    if "p" in assignment:
        osc = OscillatorParams(b=osc.b, p=assignment["p"], time_scale=osc.time_scale)
    coupling = base.net.coupling
    if "coupling_scale" in assignment:
        coupling = CouplingLaplacian(coupling.weights * assignment["coupling_scale"])
    net = NetworkModel(osc=osc, coupling=coupling, k=base.net.k)
    report = analyze(net)
    sync = report.sync
    row = [
        index,
        assignment.get("b_all", ""),
        assignment.get("p", osc.p),
        assignment.get("coupling_scale", 1.0),
        report.oscillation.R,
        report.oscillation.oscillatory,
        report.oscillation.mu,
        report.period.period_dimensionless if report.period else "",
        report.equilibrium.x0,
        report.equilibrium.sigma,
        report.oscillation.kappa0,
        sync.threshold if sync else "",
        sync.kappa2 if sync else "",
        sync.satisfied if sync else "",
        (sync.required_v2 if sync.required_v2 is not None else 0.0) if sync else "",
    ]
    return row


def _grid_values(param: dict) -> list:
    name = param.get("name")
    if name not in ("b_all", "p", "coupling_scale"):
        raise ConfigError(
            f"sweep parameter name must be one of b_all|p|coupling_scale, got {name!r}"
        )
    if "values" in param:
        values = [float(v) for v in param["values"]]
    else:
        start = float(_require(param, "start", "sweep.parameters[]"))
        stop = float(_require(param, "stop", "sweep.parameters[]"))
        step = float(_require(param, "step", "sweep.parameters[]"))
        if step <= 0:
            raise ConfigError("sweep.parameters[].step must be positive")
        values = list(np.arange(start, stop + 0.5 * step, step))
    if not values:
        raise ConfigError(f"sweep parameter {name} produced an empty grid")
    return [(name, v) for v in values]


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if not cfg.sweep:
        raise ConfigError("sweep command needs a sweep.parameters block in the config")
    grids = [_grid_values(p) for p in cfg.sweep]
    points = [dict(combo) for combo in itertools.product(*grids)]
    if not points:
        raise ConfigError("sweep grid is empty")
    max_workers = int(os.environ.get("CYCLONET_THREADS", "0")) or min(8, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        rows = list(pool.map(lambda ia: _sweep_point(cfg, ia[1], ia[0]), enumerate(points)))
    out = args.out or cfg.out_path
    write_csv(out, _SWEEP_COLUMNS, rows, cfg.precision)
    print(f"{len(rows)} sweep rows written to {out}")
    return 0


def _cmd_reproduce(args) -> int:
    builders = {
        "table1": lambda: tables.table1(seed=args.seed),
        "table2": lambda: tables.table2(),
        "table3": lambda: tables.table3(seed=args.seed),
    }
    header, rows = builders[args.table]()
    out = args.out or f"{args.table}.csv"
    write_csv(out, header, rows, precision=6)
    print(f"{args.table} written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyclonet",
        description="Analyze and simulate networks of coupled cyclic feedback oscillators.",
    )
    parser.add_argument(
        "--dump-config",
        action="store_true",
        help="print a config template to stdout and exit",
    )
    sub = parser.add_subparsers(dest="command")

    p_analyze = sub.add_parser("analyze", help="run the analysis pipeline on a config")
    p_analyze.add_argument("config")

    p_sim = sub.add_parser("simulate", help="integrate the network and export a trajectory")
    p_sim.add_argument("config")

    p_sweep = sub.add_parser("sweep", help="evaluate a parameter grid into a long-form CSV")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--out", default=None)

    p_rep = sub.add_parser("reproduce", help="regenerate a benchmark table as CSV")
    p_rep.add_argument("table", choices=["table1", "table2", "table3"])
    p_rep.add_argument("--seed", type=int, default=tables.DEFAULT_COUPLING_SEED)
    p_rep.add_argument("--out", default=None)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dump_config:
        print(json.dumps(CONFIG_TEMPLATE, indent=2))
        return 0
    if args.command is None:
        parser.print_help()
        return 2
    handlers = {
        "analyze": _cmd_analyze,
        "simulate": _cmd_simulate,
        "sweep": _cmd_sweep,
        "reproduce": _cmd_reproduce,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
