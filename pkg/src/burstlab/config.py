"""Experiment configs: one YAML document drives one CLI command.

Schema (all sections optional unless a command needs them):

    kind: net                  # scan|single|net|td|hierarchy|toy-sweep
    seed: 1
    out: results/case1
    params:                    # NeuronParams overrides, native units
      I: 660.0                 # pA (strings like "0.66 nA" are converted)
      V_r: -44.0
    integrator: {dt: 0.01, t_end: 6000.0, method: rk4}
    topology: {kind: ring, n: 7, k: 4}          # ring
    # topology: {kind: small-world, n: 7, k: 4, p: 0.5}
    # topology: {kind: edge-list, path: nets/case7.edges}
    initial_v: [-63.3, -69.7, ...]              # inline list
    # initial_v: uniform:-65.0                  # every neuron at -65 mV
    # initial_v: resting-except:6=-52.0         # E_L everywhere, neuron 6 raised
    # initial_v: potentials.txt                 # one value per line
    scan: {v_r: {min: -70, max: -42, step: 1}, i: {min: 400, max: 1000, step: 20}}
    single: {v0: -70.6, w0: 0.0}
    toy: {v0: [-60.0], diff: {min: 0, max: 12, step: 1}}
    plots: true

Native units are mV/ms/pA/nS/pF; values quoted in nA ("0.66 nA") are
converted to pA while parsing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .integrator import IntegratorConfig
from .model import NeuronParams
from .topology import Topology, load_edge_list, regular_ring, watts_strogatz

KINDS = ("scan", "single", "net", "td", "hierarchy", "toy-sweep")

_NA_FIELDS = {"I", "b"}  # fields the literature quotes in nA


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment: validated params, grids, and paths."""

    kind: str
    seed: int
    out_dir: Path
    params: NeuronParams
    integrator: IntegratorConfig
    topology_spec: dict | None
    initial_v_spec: object
    scan: dict | None
    single: dict
    toy: dict | None
    plots: bool
    path: Path | None
    raw: dict = field(repr=False, default_factory=dict)

    def build_topology(self) -> Topology:
        spec = self.topology_spec
        if spec is None:
            raise ConfigError("this command needs a 'topology' section",
                              self.path, "topology")
        kind = spec.get("kind")
        try:
            if kind == "ring":
                return regular_ring(int(spec["n"]), int(spec["k"]))
            if kind == "small-world":
                return watts_strogatz(int(spec["n"]), int(spec["k"]),
                                      float(spec["p"]), int(spec.get("seed", self.seed)))
            if kind == "edge-list":
                p = Path(spec["path"])
                if not p.is_absolute() and self.path is not None:
                    p = self.path.parent / p
                return load_edge_list(p.read_text())
        except KeyError as e:
            raise ConfigError(f"topology.{e.args[0]} is required for kind={kind!r}",
                              self.path, "topology") from None
        except (ValueError, OSError) as e:
            raise ConfigError(str(e), self.path, "topology") from e
        raise ConfigError(f"unknown topology kind {kind!r} "
                          "(expected ring | small-world | edge-list)",
                          self.path, "topology.kind")

    def resolve_initial_v(self, n: int) -> np.ndarray:
        spec = self.initial_v_spec
        if spec is None:
            raise ConfigError("this command needs 'initial_v'", self.path, "initial_v")
        if isinstance(spec, (list, tuple)):
            v = np.asarray(spec, dtype=float)
        elif isinstance(spec, str) and spec.startswith("uniform:"):
            v = np.full(n, float(spec.split(":", 1)[1]))
        elif isinstance(spec, str) and spec.startswith("resting-except:"):
            v = np.full(n, self.params.E_L)
            for part in spec.split(":", 1)[1].split(","):
                idx, val = part.split("=")
                v[int(idx)] = float(val)
        elif isinstance(spec, str):
            p = Path(spec)
            if not p.is_absolute() and self.path is not None:
                p = self.path.parent / p
            if not p.exists():
                raise ConfigError(f"initial_v file not found: {p}", self.path, "initial_v")
            v = np.array([float(line.split("#")[0])
                          for line in p.read_text().splitlines()
                          if line.split("#")[0].strip()])
        else:
            raise ConfigError(f"unsupported initial_v form: {spec!r}",
                              self.path, "initial_v")
        if v.shape != (n,):
            raise ConfigError(f"initial_v has {v.size} entries, topology has {n} neurons",
                              self.path, "initial_v")
        return v

    def provenance(self) -> dict:
        """Resolved settings echoed into every output file."""
        return {
            "kind": self.kind,
            "seed": self.seed,
            "params": {k: getattr(self.params, k)
                       for k in self.params.__dataclass_fields__},
            "integrator": {"dt": self.integrator.dt, "t_end": self.integrator.t_end,
                           "method": self.integrator.method},
            "topology": self.topology_spec,
            "initial_v": self.initial_v_spec,
            "scan": self.scan,
            "single": self.single,
            "toy": self.toy,
        }


def _parse_quantity(value, fld: str, path) -> float:
    """Accept plain numbers (native units) or '<x> nA' strings."""
    if isinstance(value, str):
        parts = value.split()
        if len(parts) == 2 and parts[1] == "nA" and fld in _NA_FIELDS:
            return float(parts[0]) * 1e3
        raise ConfigError(f"cannot parse quantity {value!r} for {fld} "
                          "(use a number in native units, or '<x> nA')",
                          path, f"params.{fld}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{fld} must be numeric, got {value!r}", path, f"params.{fld}")
    return float(value)


def _check_grid(grid: dict, name: str, path) -> dict:
    try:
        lo, hi, step = float(grid["min"]), float(grid["max"]), float(grid["step"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError(f"{name} needs numeric min/max/step", path, name) from None
    if step <= 0 or hi < lo:
        raise ConfigError(f"degenerate grid (min={lo}, max={hi}, step={step})",
                          path, name)
    return {"min": lo, "max": hi, "step": step}


def grid_values(grid: dict) -> np.ndarray:
    n = int(round((grid["max"] - grid["min"]) / grid["step"])) + 1
    return grid["min"] + grid["step"] * np.arange(n)


def load_config(path, kind: str | None = None, overrides: dict | None = None
                ) -> ExperimentConfig:
    """Parse and validate a YAML experiment config.

    ``kind`` (from the CLI subcommand) must match the config's kind when
    both are present. ``overrides`` may replace out/seed/dt from the
    command line.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError("config file not found", path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML: {e}", path) from e
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping", path)
    overrides = overrides or {}

    cfg_kind = raw.get("kind", kind)
    if cfg_kind is None:
        raise ConfigError("missing 'kind' (and no subcommand context)", path, "kind")
    if cfg_kind not in KINDS:
        raise ConfigError(f"unknown kind {cfg_kind!r} (expected one of {KINDS})",
                          path, "kind")
    if kind is not None and cfg_kind != kind:
        raise ConfigError(f"config kind {cfg_kind!r} does not match "
                          f"subcommand {kind!r}", path, "kind")

    unknown = set(raw) - {"kind", "seed", "out", "params", "integrator", "topology",
                          "initial_v", "scan", "single", "toy", "plots"}
    if unknown:
        raise ConfigError(f"unknown top-level fields: {sorted(unknown)}", path)

    pkw = {}
    for fld, value in (raw.get("params") or {}).items():
        if fld not in NeuronParams.__dataclass_fields__:
            raise ConfigError(f"unknown neuron parameter {fld!r}", path, f"params.{fld}")
        pkw[fld] = _parse_quantity(value, fld, path)
    try:
        params = NeuronParams(**pkw)
    except ValueError as e:
        raise ConfigError(str(e), path, "params") from e

    ikw = dict(raw.get("integrator") or {})
    unknown = set(ikw) - {"dt", "t_end", "method", "record_trajectory",
                          "trajectory_stride"}
    if unknown:
        raise ConfigError(f"unknown integrator fields: {sorted(unknown)}",
                          path, "integrator")
    if "dt" in overrides and overrides["dt"] is not None:
        ikw["dt"] = overrides["dt"]
    try:
        integrator = IntegratorConfig(**ikw)
    except ValueError as e:
        raise ConfigError(str(e), path, "integrator") from e

    scan = raw.get("scan")
    if cfg_kind == "scan":
        if scan is None:
            scan = {"v_r": {"min": -70.0, "max": -42.0, "step": 1.0},
                    "i": {"min": 400.0, "max": 1000.0, "step": 20.0}}
        scan = {"v_r": _check_grid(scan.get("v_r", {}), "scan.v_r", path),
                "i": _check_grid(scan.get("i", {}), "scan.i", path)}

    toy = raw.get("toy")
    if cfg_kind == "toy-sweep":
        if toy is None or "v0" not in toy or "diff" not in toy:
            raise ConfigError("toy-sweep needs toy.v0 (list) and toy.diff (grid)",
                              path, "toy")
        toy = {"v0": [float(v) for v in toy["v0"]],
               "diff": _check_grid(toy["diff"], "toy.diff", path)}

    single = dict(raw.get("single") or {})

    out = Path(overrides.get("out") or raw.get("out") or f"out/{path.stem}")
    seed = int(overrides.get("seed") if overrides.get("seed") is not None
               else raw.get("seed", 0))

    return ExperimentConfig(
        kind=cfg_kind, seed=seed, out_dir=out, params=params,
        integrator=integrator, topology_spec=raw.get("topology"),
        initial_v_spec=raw.get("initial_v"), scan=scan, single=single,
        toy=toy, plots=bool(raw.get("plots", True)), path=path, raw=raw)
