"""Command-line entry point.

Wires a single JSON configuration file (sections ``model``, ``grid``,
``sim``, ``doeblin``, ``stationary``) to the library operations and emits
deterministic CSV/JSON artifacts.  Flag precedence: command-line flags
override config keys, which override built-in defaults.  Every run first
writes an atomic ``manifest.json``; outputs are staged with a ``.partial``
suffix and renamed on completion.

Exit codes: 0 success, 1 malformed configuration JSON, 2 invalid model,
3 eigen solver failure, 4 simulation failure, 5 stationary-profile failure,
6 minorant failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import (BracketFailure, InvalidModel, MalthusError, NoConvergence)
from .model import PhasePoint, load_config, model_from_config, validate
from .renewal import KernelAssembler, SizeGrid
from .eigen import solve_malthus
from .simulate import SimConfig, empirical_functional, run_replicates
from . import stationary as st

EXIT_OK = 0
EXIT_BAD_CONFIG = 1
EXIT_INVALID_MODEL = 2
EXIT_EIGEN = 3
EXIT_SIM = 4
EXIT_STATIONARY = 5
EXIT_DOEBLIN = 6


# ---------------------------------------------------------------------------
# Manifest and atomic output helpers
# ---------------------------------------------------------------------------


@dataclass
class RunManifest:
    config: str
    seed: int | None
    command: str
    out_dir: str
    version: str
    wall_clock: str

    def write(self, out_dir):
        _write_json(os.path.join(out_dir, "manifest.json"), dataclasses.asdict(self))


def _atomic_write(path, writer):
    tmp = path + ".partial"
    try:
        with open(tmp, "w", newline="") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _write_json(path, obj):
    _atomic_write(path, lambda fh: json.dump(obj, fh, indent=2, sort_keys=True))


def _write_csv(path, header, rows):
    def writer(fh):
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")

    _atomic_write(path, writer)


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_validate(cfg, args, out_dir):
    model = model_from_config(cfg.get("model", {}))
    report = validate(model)
    _write_json(os.path.join(out_dir, "validate_report.json"), report.to_dict())
    if not report.all_passed:
        print("validation failed", file=sys.stderr)
        return EXIT_INVALID_MODEL
    return EXIT_OK


def cmd_eigen(cfg, args, out_dir):
    model = model_from_config(cfg.get("model", {}))
    gcfg = cfg.get("grid", {})
    radii = args.R if args.R else gcfg.get("R", [16.0])
    if np.isscalar(radii):
        radii = [radii]
    grid_n = args.grid_n or gcfg.get("n")
    summary = []
    try:
        for R in radii:
            n = int(grid_n) if grid_n else int(round(32 * float(R)))
            grid = SizeGrid.uniform(float(R), n)
            result = solve_malthus(KernelAssembler(model, grid))
            tmp = os.path.join(out_dir, f"eigen_R{R:g}.json")
            _write_json(tmp, result.to_dict())
            summary.append((float(R), result.lambda_R, result.residual))
    except (NoConvergence, BracketFailure) as exc:
        print(f"eigen solve failed: {exc}", file=sys.stderr)
        return EXIT_EIGEN
    _write_csv(os.path.join(out_dir, "eigen_summary.csv"),
               ["R", "lambda_R", "mu_residual"], summary)
    return EXIT_OK


def _sim_config(cfg, args):
    scfg = dict(cfg.get("sim", {}))
    seed = args.seed if args.seed is not None else scfg.get("seed", 0)
    return SimConfig(
        seed=int(seed),
        t_end=float(scfg.get("t_end", 4.0)),
        record_times=scfg.get("record_times", [0.0, 1.0, 2.0, 3.0, 4.0]),
        cap=int(scfg.get("cap", 1_000_000)),
        replicates=int(scfg.get("replicates", 1)),
    ), scfg


def cmd_simulate(cfg, args, out_dir):
    model = model_from_config(cfg.get("model", {}))
    sim_cfg, scfg = _sim_config(cfg, args)
    x0 = PhasePoint(*scfg.get("x0", [0.0, 1.0]))
    try:
        trajectories = run_replicates(model, x0, sim_cfg)
    except MalthusError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIM
    rows = []
    for r, tr in enumerate(trajectories):
        for state in tr.states:
            n = state.count
            sum_h = empirical_functional(state, lambda a, y: y)
            mean_a = empirical_functional(state, lambda a, y: a) / n if n else math.nan
            mean_y = sum_h / n if n else math.nan
            rows.append((r, state.t, n, sum_h, mean_a, mean_y))
    _write_csv(os.path.join(out_dir, "trajectory.csv"),
               ["replicate", "t", "count", "sum_h", "mean_a", "mean_y"], rows)
    if scfg.get("snapshots"):
        snap = [(r, s.t, p.a, p.y)
                for r, tr in enumerate(trajectories)
                for s in tr.states for p in s.individuals]
        _write_csv(os.path.join(out_dir, "snapshots.csv"),
                   ["replicate", "t", "a", "y"], snap)
    return EXIT_OK


def cmd_stationary(cfg, args, out_dir):
    model = model_from_config(cfg.get("model", {}))
    stcfg = cfg.get("stationary", {})
    try:
        profile = st.solve_eta_star(
            model,
            y_max=float(stcfg.get("y_max", 8.0)),
            n=int(stcfg.get("n", 1024)),
        )
    except MalthusError as exc:
        print(f"stationary profile failed: {exc}", file=sys.stderr)
        return EXIT_STATIONARY
    _write_csv(os.path.join(out_dir, "eta_star.csv"), ["s", "eta_star"],
               zip(profile.s_nodes, profile.values))
    box = stcfg.get("box", [4.0, 6.0])
    bins = stcfg.get("bins", [20, 20])
    a_c = np.linspace(0, box[0], bins[0] + 1)
    y_c = np.linspace(0, box[1], bins[1] + 1)
    a_c = 0.5 * (a_c[:-1] + a_c[1:])
    y_c = 0.5 * (y_c[:-1] + y_c[1:])
    ref = st.pi_star_density(profile, model, a_c, y_c)
    A, Y = np.meshgrid(a_c, y_c, indexing="ij")
    _write_csv(os.path.join(out_dir, "pi_star.csv"), ["a", "y", "pi_star"],
               zip(A.ravel(), Y.ravel(), ref.values.ravel()))
    if stcfg.get("report", False):
        sim_cfg, scfg = _sim_config(cfg, args)
        x0 = PhasePoint(*scfg.get("x0", [0.0, 1.0]))
        try:
            trajectories = run_replicates(model, x0, sim_cfg)
            rep = st.ergodicity_report(trajectories, profile, model,
                                       box=tuple(box), bins=tuple(bins))
        except MalthusError as exc:
            print(f"ergodicity report failed: {exc}", file=sys.stderr)
            return EXIT_STATIONARY
        _write_csv(os.path.join(out_dir, "decay.csv"), ["t", "distance"], rep.to_rows())
    return EXIT_OK


def cmd_doeblin(cfg, args, out_dir):
    model = model_from_config(cfg.get("model", {}))
    dcfg = cfg.get("doeblin", {})
    compact = dcfg.get("compact", [0.0, 1.0, 1.0, 2.0])
    try:
        nu, constants = st.doeblin_minorant(
            model, compact,
            delta=dcfg.get("delta"),
            Delta=dcfg.get("Delta"),
            j_star=dcfg.get("j_star"),
            grid_n=int(dcfg.get("grid_n", 64)),
            domain=dcfg.get("domain"),
        )
    except MalthusError as exc:
        print(f"minorant construction failed: {exc}", file=sys.stderr)
        return EXIT_DOEBLIN
    A, Y = np.meshgrid(nu.a_nodes, nu.y_nodes, indexing="ij")
    _write_csv(os.path.join(out_dir, "minorant.csv"), ["a", "y", "nu"],
               zip(A.ravel(), Y.ravel(), nu.values.ravel()))
    out = constants.to_dict()
    out["mass"] = nu.mass
    _write_json(os.path.join(out_dir, "minorant_constants.json"), out)
    return EXIT_OK


def cmd_drift(cfg, args, out_dir):
    model = model_from_config(cfg.get("model", {}))
    dcfg = cfg.get("drift", {})
    report = st.check_drift(
        model,
        box=tuple(dcfg.get("box", [10.0, 10.0])),
        grid_n=int(dcfg.get("grid_n", 64)),
        c=dcfg.get("c"),
        d=dcfg.get("d"),
    )
    _write_json(os.path.join(out_dir, "drift_report.json"), report.to_dict())
    return EXIT_OK if report.passed else EXIT_STATIONARY


COMMANDS = {
    "validate": cmd_validate,
    "eigen": cmd_eigen,
    "simulate": cmd_simulate,
    "stationary": cmd_stationary,
    "doeblin": cmd_doeblin,
    "drift": cmd_drift,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="malthus",
                                description="age-and-size structured branching toolkit")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", default=None, help="JSON configuration file")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (fallback: MALTHUS_THREADS)")
    p.add_argument("--R", type=float, action="append", default=None,
                   help="truncation radius for eigen (repeatable)")
    p.add_argument("--grid-n", type=int, default=None, help="size-grid nodes for eigen")
    return p


def resolve_threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("MALTHUS_THREADS")
    return max(1, int(env)) if env else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    threads = resolve_threads(args)
    os.environ["MALTHUS_THREADS"] = str(threads)

    cfg = {}
    if args.config is not None:
        try:
            cfg = load_config(args.config)
        except (json.JSONDecodeError, OSError, UnicodeDecodeError) as exc:
            print(f"cannot read configuration: {exc}", file=sys.stderr)
            return EXIT_BAD_CONFIG
        if not isinstance(cfg, dict):
            print("configuration must be a JSON object", file=sys.stderr)
            return EXIT_BAD_CONFIG

    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest(
        config=args.config or "<defaults>",
        seed=args.seed if args.seed is not None else cfg.get("sim", {}).get("seed"),
        command=args.command,
        out_dir=os.path.abspath(out_dir),
        version=__version__,
        wall_clock=time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
    )
    manifest.write(out_dir)
    try:
        return COMMANDS[args.command](cfg, args, out_dir)
    except InvalidModel as exc:
        print(f"invalid model: {exc}", file=sys.stderr)
        return EXIT_INVALID_MODEL


if __name__ == "__main__":
    sys.exit(main())
