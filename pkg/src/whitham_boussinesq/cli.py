"""Command-line entry point: ``whitham-bsq {simulate,soliton,sweep,compare,validate}``.

Exit codes: 0 ok, 1 failed validation check, 2 configuration error,
3 blow-up, 4 non-convergence, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import persistence
from .config import ConfigError, RunConfig, load_config
from .errors import (
    BlowUpError,
    ConvergenceError,
    DegenerateIterateError,
    GridError,
    PeakTrackingError,
    ReferenceDataError,
    StabilityError,
)
from .evolution import WaveState, dt_max, evolve, write_trace_csv
from .experiments import (
    build_initial,
    load_reference,
    reference_from_soliton,
    resample_to_grid,
    soliton_evolution_experiment,
    write_reference,
)
from .solitary import amplitude_speed_sweep, petviashvili_solve
from .spectral import Grid
from .validation import gaussian_pulse, run_checks

log = logging.getLogger("whitham_boussinesq")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_NONCONVERGENCE = 4
EXIT_IO = 5

SIMULATE_DEFAULTS = {"n": 1024, "L": 128.0, "t_end": 50.0}
SOLITON_DEFAULTS = {"n": 2048, "L": 256.0}
COMPARE_DEFAULTS = {"n": 2048, "L": 256.0, "t_end": 100.0}


def _grid(cfg: RunConfig) -> Grid:
    try:
        return Grid(cfg.n, cfg.L)
    except GridError as err:
        raise ConfigError(str(err)) from None


def _time_step(cfg: RunConfig, grid: Grid) -> float:
    limit = dt_max(grid, cfg.cfl)
    dt = cfg.dt if cfg.dt is not None else limit / 4
    if dt > limit:
        raise ConfigError(f"dt={dt:.6g} exceeds the stability bound {limit:.6g} for n={grid.n}, L={grid.length:g}, cfl={cfg.cfl:g}")
    return dt


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def initial_state(cfg: RunConfig, grid: Grid) -> WaveState:
    if cfg.initial == "pulse":
        return gaussian_pulse(grid, cfg.amplitude, cfg.width)
    if cfg.initial == "constant":
        return WaveState(grid, np.full(grid.n, cfg.amplitude), np.full(grid.n, cfg.velocity))
    if cfg.initial == "profile":
        x, eta, vel, _ = persistence.read_profile_bundle(cfg.initial_file)
        return WaveState(grid, resample_to_grid(x, eta, grid), resample_to_grid(x, vel, grid))
    return build_initial(load_reference(cfg.initial_file), grid)


def cmd_simulate(cfg: RunConfig) -> int:
    cfg = cfg.with_defaults(**SIMULATE_DEFAULTS).validate()
    grid = _grid(cfg)
    dt = _time_step(cfg, grid)
    s0 = initial_state(cfg, grid)
    final, trace = evolve(s0, cfg.t_end, dt, sample_every=cfg.sample_every, cfl=cfg.cfl)
    out = _out_dir(cfg)
    cfg.save(out / "simulate.cfg")
    write_trace_csv(trace, out / "diagnostics.csv")
    persistence.write_profile_bundle(out / "final", grid, final.eta, final.vel, {"t": final.time, "dt": dt})
    h0, h1 = trace[0].hamiltonian, trace[-1].hamiltonian
    drift = abs(h1 - h0) / abs(h0) if h0 else abs(h1 - h0)
    print(f"t={final.time:.6g}  steps of dt={dt:.6g}  Hamiltonian drift={drift:.3e}")
    return EXIT_OK


def cmd_soliton(cfg: RunConfig) -> int:
    cfg = cfg.with_defaults(**SOLITON_DEFAULTS).validate()
    grid = _grid(cfg)
    if not cfg.c > 1:
        raise ConfigError(f"c must exceed 1, got {cfg.c}")
    res = petviashvili_solve(cfg.c, grid, tol=cfg.tol, max_iter=cfg.max_iter)
    out = _out_dir(cfg)
    cfg.save(out / "soliton.cfg")
    persistence.write_profile_bundle(out / "soliton", grid, res.eta, res.vel, persistence.soliton_meta(res))
    write_reference(reference_from_soliton(res), out / "soliton_reference.csv")
    print(
        f"c={res.c:.6g}  amplitude={res.amplitude:.12g}  residual={res.residual:.3e}  "
        f"iterations={res.iterations}  converged={res.converged}"
    )
    return EXIT_OK if res.converged else EXIT_NONCONVERGENCE


def cmd_sweep(cfg: RunConfig) -> int:
    cfg = cfg.with_defaults(**SOLITON_DEFAULTS).validate()
    grid = _grid(cfg)
    if not 1 < cfg.c_min < cfg.c_max:
        raise ConfigError(f"need 1 < c_min < c_max, got c_min={cfg.c_min}, c_max={cfg.c_max}")
    if cfg.steps < 2:
        raise ConfigError(f"steps must be at least 2, got {cfg.steps}")
    results = amplitude_speed_sweep(
        cfg.c_min, cfg.c_max, cfg.steps, grid, cfg.tol, cfg.max_iter, cfg.parallel, cfg.workers
    )
    out = _out_dir(cfg)
    cfg.save(out / "sweep.cfg")
    persistence.write_sweep_csv(results, out / "sweep.csv")
    failed = [r for r in results if not r.converged]
    for r in failed:
        log.warning("c=%.6g did not converge: %s", r.c, r.message)
    print(f"{len(results) - len(failed)}/{len(results)} speeds converged")
    return EXIT_NONCONVERGENCE if failed else EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    cfg = cfg.with_defaults(**COMPARE_DEFAULTS).validate()
    path = cfg.reference or cfg.initial_file
    if not path:
        raise ConfigError("compare needs a reference file (--reference)")
    grid = _grid(cfg)
    dt = _time_step(cfg, grid)
    ref = load_reference(path)
    report, trace = soliton_evolution_experiment(
        ref, grid, cfg.t_end, dt, tol=cfg.tol, max_iter=cfg.max_iter, cfl=cfg.cfl
    )
    out = _out_dir(cfg)
    cfg.save(out / "compare.cfg")
    persistence.write_report_json(report, out / "compare.json")
    write_trace_csv(trace, out / "compare_diagnostics.csv")
    print(
        f"t={report.t:.6g}  d={report.d:.3e}  c_fitted={report.c_fitted:.8g}  "
        f"tail_mass={report.tail_mass:.3e}"
    )
    return EXIT_OK


def cmd_validate(cfg: RunConfig | None = None) -> int:
    results = run_checks()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


COMMANDS = {
    "simulate": cmd_simulate,
    "soliton": cmd_soliton,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--n", type=int, help="number of grid points (even)")
    common.add_argument("--L", type=float, help="domain length")
    common.add_argument("--dt", type=float, help="time step (default dt_max/4)")
    common.add_argument("--cfl", type=float, help="stability constant in dt_max = cfl/sqrt(k_max)")
    common.add_argument("--t-end", dest="t_end", type=float, help="final time")
    common.add_argument("--out", help="output directory")
    common.add_argument("--tol", type=float, help="solver residual tolerance")
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--sample-every", dest="sample_every", type=int)
    common.add_argument("--parallel", action="store_const", const=True, default=None)
    common.add_argument("--workers", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="whitham-bsq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="evolve initial data and record diagnostics")
    p.add_argument("--initial", help="pulse | constant | profile | reference")
    p.add_argument("--initial-file", dest="initial_file", help="profile prefix or reference CSV")
    p.add_argument("--amplitude", type=float)
    p.add_argument("--width", type=float)
    p.add_argument("--velocity", type=float)

    p = sub.add_parser("soliton", parents=[common], help="compute one solitary wave")
    p.add_argument("--c", type=float, help="speed (Froude number) > 1")

    p = sub.add_parser("sweep", parents=[common], help="amplitude-speed curve by continuation")
    p.add_argument("--c-min", dest="c_min", type=float)
    p.add_argument("--c-max", dest="c_max", type=float)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("compare", parents=[common], help="evolve reference data and compare with a soliton")
    p.add_argument("--reference", help="x,eta0,u1,u2 CSV")

    sub.add_parser("validate", parents=[common], help="run the built-in invariant checks")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "command", "verbose")}
    return cfg.overridden(**overrides)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s"
    )
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, StabilityError, GridError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as err:
        print(f"blow-up at t={err.time}: {err}", file=sys.stderr)
        return EXIT_BLOWUP
    except (ConvergenceError, DegenerateIterateError, PeakTrackingError) as err:
        print(f"non-convergence: {err}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ReferenceDataError as err:
        print(f"invalid reference data ({err.kind}): {err}", file=sys.stderr)
        return EXIT_CONFIG if err.kind == "support" else EXIT_IO
    except (OSError, ValueError, json.JSONDecodeError) as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
