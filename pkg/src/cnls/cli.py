"""Command-line entry points: simulate, groundstate, threshold-sweep, blowup-demo, validate."""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
import warnings
from importlib import metadata
from pathlib import Path

import numpy as np

from .blowup import explicit_blowup_pair, explicit_blowup_residual, explicit_gradient_sq, virial_certificate
from .dynamics import BlowupPolicy, StepSchedule, Trajectory, Verdict, evolve
from .functionals import FieldPair, PhysParams
from .grid import ConfigurationError, make_grid
from .groundstate import MinimizationStalled, StartFamily, minimize_action
from .io import (
    ConfigError,
    RunConfig,
    RunManifest,
    SnapshotError,
    atomic_write_text,
    diagnostics_csv,
    load_config,
    read_snapshot,
    write_json,
    write_snapshot,
)
from .threshold import DEFAULT_GRIDS, rows_to_csv, threshold_sweep

log = logging.getLogger("cnls")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BLOWUP = 2
EXIT_RESOLUTION = 3
EXIT_STALLED = 4
EXIT_SWEEP = 5
EXIT_VALIDATE = 6

_VERDICT_CODE = {
    Verdict.COMPLETED: EXIT_OK,
    Verdict.BLOWUP_DETECTED: EXIT_BLOWUP,
    Verdict.RESOLUTION_LOST: EXIT_RESOLUTION,
}


def code_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def resolve_workers(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("CNLS_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"CNLS_WORKERS must be an integer, got {env!r}", None, "env") from None
    return 1


def _output_dir(args, default: str) -> Path:
    out = Path(args.output if args.output is not None else default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _trajectory_summary(traj: Trajectory) -> dict:
    r0, r1 = traj.records[0], traj.records[-1]
    return {
        "initial_masses": [r0.mass_phi, r0.mass_psi],
        "final_masses": [r1.mass_phi, r1.mass_psi],
        "initial_energy": r0.energy,
        "final_energy": r1.energy,
        "t_final": r1.t,
        "t_star": traj.t_star,
        "steps": traj.steps,
        "reason": traj.reason,
    }


# -- simulate ----------------------------------------------------------------


def _initial_state(cfg: RunConfig) -> FieldPair:
    d = cfg.initial_data
    if d.kind == "gaussian":
        return d.gaussian_pair(cfg.grid)
    if d.kind in ("ground_state", "snapshot"):
        try:
            s = read_snapshot(d.file)
        except (OSError, SnapshotError) as exc:
            raise ConfigError(f"initial_data file {d.file!r}: {exc}") from None
        if s.grid != cfg.grid:
            raise ConfigError(f"initial_data file grid {s.grid} does not match config grid {cfg.grid}")
        return s
    gs = minimize_action(cfg.params, cfg.grid, StartFamily(seed=cfg.seed))
    return explicit_blowup_pair(d.t0, gs)


def cmd_simulate(args) -> int:
    if args.config is None:
        raise ConfigError("simulate needs --config")
    cfg = load_config(args.config)
    out = _output_dir(args, cfg.output_dir)
    s0 = _initial_state(cfg)
    P = cfg.params
    thresholds = {"grad_growth_factor": cfg.policy.grad_growth_factor, "tail_max": cfg.policy.tail_max}
    cert = virial_certificate(s0, P)
    try:
        traj = evolve(s0, P, cfg.schedule, cfg.policy)
    except ValueError as exc:
        raise ConfigError(f"initial_data: {exc}") from None
    atomic_write_text(out / "diagnostics.csv", diagnostics_csv(traj.records))
    write_snapshot(traj.final_state, out / "final.snap")
    summary = _trajectory_summary(traj)
    summary["thresholds"] = thresholds
    summary["virial_certificate"] = cert.to_dict()
    man = RunManifest(
        command="simulate",
        config=cfg.echo(),
        code_version=code_version(),
        verdict=traj.verdict.value,
        summary=summary,
        files=["diagnostics.csv", "final.snap"],
        seed=cfg.seed if args.seed is None else args.seed,
    )
    man.write(out)
    print(f"{traj.verdict.value} t={summary['t_final']:.6g} steps={traj.steps}")
    return _VERDICT_CODE[traj.verdict]


# -- groundstate -------------------------------------------------------------


def cmd_groundstate(args) -> int:
    P = PhysParams(args.n, args.p if args.p is not None else 2.0 / args.n, args.beta, args.omega1, args.omega2)
    N, L = DEFAULT_GRIDS[args.n]
    grid = make_grid(args.n, args.points or N, args.box_length or L)
    seed = args.seed if args.seed is not None else 0
    out = _output_dir(args, "groundstate_out")
    try:
        gs = minimize_action(P, grid, StartFamily(n_random=args.n_random, seed=seed), max_iter=args.max_iter, workers=resolve_workers(args.workers))
    except MinimizationStalled as exc:
        best = exc.best
        info = {"error": str(exc)}
        if best is not None:
            info.update(best_start=best.label, best_residual=best.residual, best_action=best.action)
        write_json(out / "groundstate_failure.json", info)
        print(str(exc), file=sys.stderr)
        return EXIT_STALLED
    write_snapshot(gs.pair, out / "groundstate.snap")
    write_json(out / "groundstate.json", gs.summary())
    man = RunManifest(
        command="groundstate",
        config={"params": gs.summary()["params"], "grid": gs.summary()["grid"], "max_iter": args.max_iter},
        code_version=code_version(),
        verdict="certified" if gs.certified else "uncertified",
        summary={"kind": gs.kind.value, "action_m": gs.action_m, "gn_constant": gs.gn_constant},
        files=["groundstate.snap", "groundstate.json"],
        seed=seed,
    )
    man.write(out)
    print(f"kind={gs.kind.value} action={gs.action_m!r} C={gs.gn_constant!r}")
    return EXIT_OK


# -- threshold sweep ---------------------------------------------------------


def _parse_betas(text: str) -> list[float]:
    items = [t for t in text.replace(" ", "").split(",") if t]
    try:
        return [float(t) for t in items]
    except ValueError:
        raise ConfigError(f"--betas must be a comma-separated list of numbers, got {text!r}") from None


def cmd_threshold_sweep(args) -> int:
    betas = _parse_betas(args.betas)
    if not betas:
        raise ConfigError("--betas is empty")
    N, L = DEFAULT_GRIDS[args.n]
    grid = make_grid(args.n, args.points or N, args.box_length or L)
    seed = args.seed if args.seed is not None else 0
    out = _output_dir(args, "sweep_out")
    rows = threshold_sweep(args.n, betas, grid, workers=resolve_workers(args.workers), seed=seed)
    atomic_write_text(out / "sweep.csv", rows_to_csv(rows))
    failed = [r["beta"] for r in rows if r["regime"] == "failed"]
    man = RunManifest(
        command="threshold-sweep",
        config={"n": args.n, "betas": betas, "grid": {"points": grid.points, "box_length": grid.box_length}},
        code_version=code_version(),
        verdict="failures" if failed else "completed",
        summary={"failed_betas": failed, "violated": [r["beta"] for r in rows if r["bound_check"] == "violated"]},
        files=["sweep.csv"],
        seed=seed,
    )
    man.write(out)
    print(rows_to_csv(rows), end="")
    return EXIT_SWEEP if failed else EXIT_OK


# -- blow-up demo ------------------------------------------------------------


def cmd_blowup_demo(args) -> int:
    n = args.n
    P = PhysParams(n, 2.0 / n, args.beta)
    grid = make_grid(n, args.points, args.box_length)
    out = _output_dir(args, "blowup_out")
    gs = minimize_action(P, grid, StartFamily(seed=args.seed or 0))
    s0 = explicit_blowup_pair(0.0, gs)
    sched = StepSchedule(args.dt, args.t_end, output_every=args.output_every)
    traj = evolve(s0, P, sched, BlowupPolicy())
    g0 = traj.records[0].grad_sq
    lines = ["t,grad_ratio_scaled,grad_ratio_analytic,residual_max"]
    for r in traj.records:
        ratio = math.sqrt(r.grad_sq / g0) * (1.0 - r.t)
        exact = math.sqrt(explicit_gradient_sq(r.t, gs) / explicit_gradient_sq(0.0, gs)) * (1.0 - r.t)
        lines.append(f"{r.t!r},{ratio!r},{exact!r},{explicit_blowup_residual(r.t, gs)!r}")
    atomic_write_text(out / "blowup_family.csv", "\n".join(lines) + "\n")
    atomic_write_text(out / "diagnostics.csv", diagnostics_csv(traj.records))
    man = RunManifest(
        command="blowup-demo",
        config={"n": n, "beta": args.beta, "points": args.points, "box_length": args.box_length, "dt": args.dt, "t_end": args.t_end},
        code_version=code_version(),
        verdict=traj.verdict.value,
        summary=_trajectory_summary(traj),
        files=["blowup_family.csv", "diagnostics.csv"],
        seed=args.seed or 0,
    )
    man.write(out)
    print("\n".join(lines))
    return _VERDICT_CODE[traj.verdict]


# -- validate ----------------------------------------------------------------


def _validation_checks(seed: int):
    from .blowup import mass_trap_check
    from .functionals import variance_accel
    from .groundstate import shoot_scalar_radial
    from .io import parse_snapshot, snapshot_bytes

    rng = np.random.default_rng(seed)

    g = make_grid(1, 256, 16.0)
    f = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    yield "parseval", abs(g.spectral_mass(f) - g.lp_power(f, 2)) <= 1e-12 * g.lp_power(f, 2)

    ok = True
    for n, N in ((1, 256), (2, 64), (3, 16)):
        gg = make_grid(n, N, 10.0)
        s = FieldPair(gg, rng.normal(size=gg.shape) + 1j * rng.normal(size=gg.shape), rng.normal(size=gg.shape) + 0j)
        back = parse_snapshot(snapshot_bytes(s))
        ok &= back.phi.tobytes() == s.phi.tobytes() and back.psi.tobytes() == s.psi.tobytes()
    yield "snapshot round-trip", bool(ok)

    P = PhysParams(1, 1.0, 1.0)
    g = make_grid(1, 256, 40.0)
    s0 = FieldPair(g, np.exp(-g.r2 / 2), 0.5 * np.exp(-g.r2 / 2))
    traj = evolve(s0, P, StepSchedule(1e-3, 0.5, output_every=500))
    m0, m1 = traj.records[0].mass, traj.records[-1].mass
    yield "mass conservation", abs(m1 - m0) <= 1e-12 * m0

    try:
        variance_accel(s0, P)
        yield "variance acceleration forms agree", True
    except ArithmeticError:
        yield "variance acceleration forms agree", False

    g2 = make_grid(2, 64, 16.0)
    fails = 0
    for _ in range(10):
        c = rng.uniform(-1, 1, size=2)
        h = np.exp(-((g2.coords[0] - c[0]) ** 2 + (g2.coords[1] - c[1]) ** 2) / rng.uniform(0.5, 2.0)) * (1 + 0.3 * g2.coords[0])
        lhs, rhs = mass_trap_check(h + 0j, g2)
        fails += lhs > rhs * (1 + 1e-12)
    yield "mass trap inequality", fails == 0

    prof = shoot_scalar_radial(1, 2.0, 1.0)
    yield "quintic soliton mass", abs(prof.mass() - math.sqrt(3) * math.pi / 2) < 1e-6


def cmd_validate(args) -> int:
    seed = args.seed if args.seed is not None else 0
    ok_all = True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for name, ok in _validation_checks(seed):
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
            ok_all &= bool(ok)
    return EXIT_OK if ok_all else EXIT_VALIDATE


# -- parser ------------------------------------------------------------------


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", type=Path, default=d, help="JSON run configuration")
    p.add_argument("--output", type=str, default=d, help="output directory")
    p.add_argument("--seed", type=int, default=d, help="randomisation seed")
    p.add_argument("--workers", type=int, default=d, help="worker count (falls back to CNLS_WORKERS)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cnls", description="Coupled focusing NLS laboratory")
    _global_flags(ap, suppress=False)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", parents=[common], help="evolve initial data from a config")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("groundstate", parents=[common], help="compute a ground state")
    sp.add_argument("--n", type=int, default=2, choices=(1, 2, 3))
    sp.add_argument("--p", type=float, default=None, help="power (default 2/n)")
    sp.add_argument("--beta", type=float, default=0.5)
    sp.add_argument("--omega1", type=float, default=1.0)
    sp.add_argument("--omega2", type=float, default=1.0)
    sp.add_argument("--points", type=int, default=None)
    sp.add_argument("--box-length", type=float, default=None)
    sp.add_argument("--max-iter", type=int, default=3000)
    sp.add_argument("--n-random", type=int, default=3, help="randomised starts besides the analytic ones")
    sp.set_defaults(func=cmd_groundstate)

    sp = sub.add_parser("threshold-sweep", parents=[common], help="threshold quantities over a list of couplings")
    sp.add_argument("--n", type=int, default=2, choices=(1, 2, 3))
    sp.add_argument("--betas", type=str, default="0.25,0.5,1,2,4")
    sp.add_argument("--points", type=int, default=None)
    sp.add_argument("--box-length", type=float, default=None)
    sp.set_defaults(func=cmd_threshold_sweep)

    sp = sub.add_parser("blowup-demo", parents=[common], help="evolve the explicit pseudo-conformal family")
    sp.add_argument("--n", type=int, default=2, choices=(1, 2, 3))
    sp.add_argument("--beta", type=float, default=0.5)
    sp.add_argument("--points", type=int, default=256)
    sp.add_argument("--box-length", type=float, default=32.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--t-end", type=float, default=0.5)
    sp.add_argument("--output-every", type=int, default=50)
    sp.set_defaults(func=cmd_blowup_demo)

    sp = sub.add_parser("validate", parents=[common], help="run the quick invariant suite")
    sp.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which would collide with the blow-up code.
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        code = args.func(args)
    except (ConfigError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("%s finished in %.2fs with exit code %d", args.command, time.perf_counter() - t0, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
