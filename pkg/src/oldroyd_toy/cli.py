"""Command-line entry point: ``oldroyd-toy <command> --config FILE --out DIR``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import __version__
from . import diagnostics as diag
from .config import ConfigError, ExperimentConfig, HeatGapSpec, load_config
from .experiments import SweepSpec, damping_sweep, temporal_convergence, vortex_dynamics
from .output import (
    RunManifest,
    read_checkpoint,
    write_checkpoint,
    write_rate_csv,
    write_records_csv,
    write_sweep_csv,
    write_table_csv,
)
from .steppers import BlowUpError, initial_state, run

log = logging.getLogger("oldroyd_toy")


def cmd_run(
    cfg: ExperimentConfig, out: Path, tag: str, args
) -> tuple[list[Path], dict]:
    result = run(cfg.solver, extended=args.extended)
    csv_path = write_records_csv(result.records, out / f"run_{tag}.csv")
    ckpt = write_checkpoint(
        result.state,
        out / f"run_{tag}.ckpt",
        step=result.steps,
        a=cfg.solver.a,
        dt=cfg.solver.dt,
    )
    final = result.records[-1]
    summary = {"steps": result.steps, "final_energy": final.energy}
    if args.extended:
        summary["gamma_convention"] = diag.RIESZ_CONVENTION
    return [csv_path, ckpt], summary


def cmd_sweep(
    cfg: ExperimentConfig, out: Path, tag: str, args
) -> tuple[list[Path], dict]:
    spec = cfg.sweep or SweepSpec(cfg.solver, compare_time=cfg.solver.t_end)
    result = damping_sweep(spec, workers=args.workers)
    path = write_sweep_csv(result, out / f"sweep_{tag}.csv")
    summary = {"slope": result.slope, "complete": result.complete}
    if not result.complete:
        summary["error"] = result.error
    return [path], summary


def cmd_convergence(
    cfg: ExperimentConfig, out: Path, tag: str, args
) -> tuple[list[Path], dict]:
    if cfg.dt_ladder is None:
        raise ConfigError(
            "convergence needs a [convergence] section with dt_ladder", key="dt_ladder"
        )
    res = temporal_convergence(cfg.solver, cfg.dt_ladder)
    rows = [
        [dt, err, inc, None]
        for dt, err, inc in zip(res.dts, res.errors, res.increments)
    ]
    rows.append([None, None, None, res.order])
    path = write_table_csv(
        ["dt", "error_vs_finest", "increment", "fitted_order"],
        rows,
        out / f"convergence_{tag}.csv",
    )
    return [path], {"order": res.order}


def cmd_vortices(
    cfg: ExperimentConfig, out: Path, tag: str, args
) -> tuple[list[Path], dict]:
    times = (
        cfg.vortex_times if cfg.vortex_times is not None else [0.0, cfg.solver.t_end]
    )
    snaps = vortex_dynamics(cfg.solver, times, out / f"vortices_{tag}")
    return [p for s in snaps for p in s.files], {"times": [s.t for s in snaps]}


def cmd_heat_gap(
    cfg: ExperimentConfig, out: Path, tag: str, args
) -> tuple[list[Path], dict]:
    spec = cfg.heat_gap or HeatGapSpec()
    if spec.mode == "torus":
        pairs = [(a, diag.heat_gap_discrete([(1.0, 1.0)], a)) for a in spec.a_values]
    else:
        pairs = [
            (a, diag.heat_gap_continuum(a, spec.quadrature_n)) for a in spec.a_values
        ]
    slope = diag.rate_fit(pairs) if len(pairs) >= 3 else None
    path = write_rate_csv(pairs, slope, out / f"heat_gap_{tag}.csv")
    return [path], {"fitted_slope": slope}


def cmd_besov(
    cfg: ExperimentConfig, out: Path, tag: str, args
) -> tuple[list[Path], dict]:
    state = (
        read_checkpoint(args.checkpoint)
        if args.checkpoint
        else initial_state(cfg.solver)
    )
    parts = {"u": state.u, "tau": state.tau, "gamma": diag.gamma(state)}
    blocks = {
        (name, p): diag.lp_blocks(f, p).as_dict()
        for name, f in parts.items()
        for p in (2, float("inf"))
    }
    indices = sorted(blocks[("u", 2)])
    header = ["j"] + [f"{name}_{'l2' if p == 2 else 'linf'}" for name, p in blocks]
    rows = [[j] + [blocks[key].get(j) for key in blocks] for j in indices]
    path = write_table_csv(header, rows, out / f"besov_{tag}.csv")
    summary = {f"B0_inf1_{name}": diag.besov_norm(f) for name, f in parts.items()}
    summary["gamma_convention"] = diag.RIESZ_CONVENTION
    return [path], summary


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "convergence": cmd_convergence,
    "vortices": cmd_vortices,
    "heat-gap": cmd_heat_gap,
    "besov": cmd_besov,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oldroyd-toy", description=__doc__)
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument(
            "--out",
            type=Path,
            default=None,
            help="output directory (default: out_dir from config, else .)",
        )
        p.add_argument("-v", "--verbose", action="store_true")
        p.add_argument(
            "--seedless",
            action="store_true",
            default=True,
            help="accepted for compatibility; no run uses randomness",
        )
        if name == "run":
            p.add_argument(
                "--extended",
                action="store_true",
                help="also record Besov and Gamma norms",
            )
        if name == "sweep":
            p.add_argument("--workers", type=int, default=1)
        if name == "besov":
            p.add_argument("--checkpoint", type=Path, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s"
    )
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        where = f" (line {exc.lineno})" if exc.lineno else ""
        print(f"config error{where}: {exc}", file=sys.stderr)
        return 2
    out = args.out or Path(cfg.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    tag = cfg.digest()
    manifest = RunManifest(
        command=args.command, config=cfg.to_text(), version=__version__
    )
    start = time.perf_counter()
    code = 0
    try:
        paths, summary = COMMANDS[args.command](cfg, out, tag, args)
        manifest.outputs = [str(p) for p in paths]
        manifest.summary = summary
    except (BlowUpError, ConfigError) as exc:
        manifest.status = f"error: {exc}"
        print(exc, file=sys.stderr)
        code = 1
    manifest.wall_seconds = time.perf_counter() - start
    manifest.write(out / f"manifest_{args.command}_{tag}.json")
    return code


if __name__ == "__main__":
    sys.exit(main())
