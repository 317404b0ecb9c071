"""Command-line front end: trajectory dumps, sampling runs, order studies.

Configuration is a flat ``section.key = value`` text file; command-line
flags override file values. All CSV output starts with a header row and
formats numbers with 17 significant digits, so equal configurations
produce byte-identical files.

Exit codes: 0 ok, 1 runtime failure (solver or reference), 2 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .models import SyntheticEpsModel, SyntheticModel
from .oracle import (ReferenceConfig, ReferenceNotConverged, empirical_order,
                     reference_solve, relative_error)
from .rde import Phi1Mode
from .schedule import COSINE_T_MAX, LINEAR_T_MAX, NoiseSchedule
from .solver import SolverConfig, SolverError, sample
from .trajectory import (KINDS, TrajectoryError, TrajectorySpec,
                         build_trajectory, transform_values)

__all__ = ["main"]


class UsageError(Exception):
    """Bad flag or config value; maps to exit code 2."""


# errors at or below this are solver round-off, not discretization error;
# fitting a slope through them would be noise
EXACT_FLOOR = 1e-12


DEFAULTS = {
    "schedule.kind": "linear",
    "schedule.beta0": "0.1",
    "schedule.beta1": "20",
    "schedule.s": "0.008",
    "schedule.t_max": "",
    "model.family": "taupoly",
    "model.coeffs": "1,1,1,1",
    "model.lambda": "0.5",
    "model.dim": "2",
    "solver.method": "ddim",
    "solver.phi1": "m3",
    "solver.r1": "",
    "solver.r2": "",
    "solver.nfe": "",
    "trajectory.kind": "uniform",
    "trajectory.steps": "10",
    "trajectory.t_start": "",
    "trajectory.t_end": "1e-3",
    "trajectory.k": "",
    "run.seed": "0",
    "run.out": "",
}


def load_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path!r}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config: line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise UsageError(f"--config: line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def merged_config(args) -> dict[str, str]:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for flag, key in [
        ("kind", "trajectory.kind"), ("trajectory", "trajectory.kind"),
        ("steps", "trajectory.steps"), ("t_start", "trajectory.t_start"),
        ("t_end", "trajectory.t_end"), ("k", "trajectory.k"),
        ("method", "solver.method"), ("phi1", "solver.phi1"),
        ("nfe", "solver.nfe"), ("schedule", "schedule.kind"),
        ("seed", "run.seed"), ("out", "run.out"),
    ]:
        value = getattr(args, flag, None)
        if value is not None:
            cfg[key] = str(value)
    return cfg


def _f(cfg, key, flag):
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise UsageError(f"{flag}: {cfg[key]!r} is not a number") from exc


def _i(cfg, key, flag):
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise UsageError(f"{flag}: {cfg[key]!r} is not an integer") from exc


def build_schedule(cfg) -> NoiseSchedule:
    kind = cfg["schedule.kind"]
    if kind not in ("linear", "cosine"):
        raise UsageError(f"schedule.kind: {kind!r} not one of linear/cosine")
    if cfg["schedule.t_max"]:
        t_max = _f(cfg, "schedule.t_max", "schedule.t_max")
    else:
        t_max = LINEAR_T_MAX if kind == "linear" else COSINE_T_MAX
    if kind == "linear":
        return NoiseSchedule.linear(_f(cfg, "schedule.beta0", "schedule.beta0"),
                                    _f(cfg, "schedule.beta1", "schedule.beta1"),
                                    t_max)
    return NoiseSchedule.cosine(_f(cfg, "schedule.s", "schedule.s"), t_max)


def build_traj_spec(cfg, schedule, n_steps=None) -> TrajectorySpec:
    kind = cfg["trajectory.kind"]
    if kind not in KINDS:
        raise UsageError(f"--kind: {kind!r} not one of {'/'.join(KINDS)}")
    t_start = (_f(cfg, "trajectory.t_start", "--t-start")
               if cfg["trajectory.t_start"] else schedule.t_max)
    k = _f(cfg, "trajectory.k", "--k") if cfg["trajectory.k"] else None
    steps = n_steps if n_steps is not None else _i(cfg, "trajectory.steps",
                                                   "--steps")
    return TrajectorySpec(kind=kind, n_steps=steps, t_start=t_start,
                          t_end=_f(cfg, "trajectory.t_end", "--t-end"),
                          k_param=k)


def build_model(cfg) -> SyntheticModel:
    family = cfg["model.family"]
    dim = _i(cfg, "model.dim", "model.dim")
    if dim < 1:
        raise UsageError(f"model.dim: {dim} must be >= 1")
    try:
        if family == "constant":
            c = [float(v) for v in cfg["model.coeffs"].split(",")]
            if len(c) == 1:
                c = c * dim
            return SyntheticModel.constant(c)
        if family == "taupoly":
            coeffs = [float(v) for v in cfg["model.coeffs"].split(",")]
            return SyntheticModel.tau_poly(coeffs, dim=dim)
        if family == "linear_state":
            return SyntheticModel.linear_state(_f(cfg, "model.lambda",
                                                  "model.lambda"))
    except ValueError as exc:
        raise UsageError(f"model.coeffs: {exc}") from exc
    raise UsageError(f"model.family: {family!r} not one of "
                     "constant/taupoly/linear_state")


def seeded_gaussian(dim: int, seed: int) -> np.ndarray:
    """Standard-normal draw via Box-Muller over PCG64 uniforms.

    The transform is spelled out (rather than Generator.normal) so the
    byte stream, and therefore every trace, is stable across platforms
    and numpy versions.
    """
    gen = np.random.Generator(np.random.PCG64(seed))
    pairs = (dim + 1) // 2
    u1 = 1.0 - gen.random(pairs)  # (0, 1]; keeps log finite
    u2 = gen.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([radius * np.cos(2.0 * np.pi * u2),
                        radius * np.sin(2.0 * np.pi * u2)])
    return z[:dim]


def fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path: str | None, header: list[str], rows: list[list]) -> None:
    text = ",".join(header) + "\n"
    for row in rows:
        text += ",".join(fmt(v) for v in row) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands -------------------------------------------------------


def cmd_trajectory(args) -> int:
    cfg = merged_config(args)
    schedule = build_schedule(cfg)
    spec = build_traj_spec(cfg, schedule)
    traj = build_trajectory(schedule, spec)
    trans = transform_values(schedule, spec, traj)
    rows = []
    for i in range(len(traj.times)):
        rows.append([i, float(traj.times[i]), float(traj.nsr_values[i]),
                     float(trans[i]) if trans is not None else ""])
    write_csv(cfg["run.out"] or None, ["i", "t", "nsr", "trans"], rows)
    return 0


def cmd_sample(args) -> int:
    cfg = merged_config(args)
    schedule = build_schedule(cfg)
    method = cfg["solver.method"]
    if method == "agile":
        if getattr(args, "steps", None) is not None:
            raise UsageError("--steps: not valid with --method agile "
                             "(use --nfe)")
        if not cfg["solver.nfe"]:
            raise UsageError("--nfe: required for the agile method")
        budget = _i(cfg, "solver.nfe", "--nfe")
    else:
        if cfg["solver.nfe"]:
            raise UsageError("--nfe: only valid with --method agile "
                             "(use --steps)")
        budget = 0
    spec = build_traj_spec(cfg, schedule)
    solver_cfg = SolverConfig(
        method=method, trajectory=spec,
        phi1=_phi1(cfg), nfe_budget=budget,
        r1=_f(cfg, "solver.r1", "solver.r1") if cfg["solver.r1"] else None,
        r2=_f(cfg, "solver.r2", "solver.r2") if cfg["solver.r2"] else 2.0 / 3.0)
    synth = build_model(cfg)
    dim = synth.dim() or _i(cfg, "model.dim", "model.dim")
    model = SyntheticEpsModel(synth, schedule)
    x_init = seeded_gaussian(dim, _i(cfg, "run.seed", "--seed"))
    result = sample(solver_cfg, model, schedule, x_init)

    rows = [[rec.index, rec.kind, rec.t_from, rec.t_to, rec.h,
             "" if rec.s1 is None else rec.s1,
             "" if rec.s2 is None else rec.s2,
             rec.step_norm] for rec in result.trace]
    write_csv(cfg["run.out"] or None,
              ["i", "kind", "t_from", "t_to", "h", "s1", "s2", "step_norm"],
              rows)
    norm = float(np.sqrt(np.sum(result.x_final ** 2)))
    print(f"final_norm={fmt(norm)} nfe={result.nfe}")
    return 0


def _phi1(cfg) -> Phi1Mode:
    try:
        return Phi1Mode.from_config(cfg["solver.phi1"])
    except ValueError as exc:
        raise UsageError(f"--phi1: {exc}") from exc


def _parse_list(text: str, flag: str, valid=None) -> list[str]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise UsageError(f"{flag}: empty list")
    if valid is not None:
        for item in items:
            if item not in valid:
                raise UsageError(f"{flag}: {item!r} not one of "
                                 f"{'/'.join(valid)}")
    return items


def _parse_ns(text: str) -> list[int]:
    try:
        ns = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"--ns: {exc}") from exc
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise UsageError("--ns: need a strictly increasing list")
    return ns


def _study_cells(cells, worker):
    """Run study cells, optionally in parallel; SCIRE_THREADS caps width."""
    raw = os.environ.get("SCIRE_THREADS", "")
    try:
        width = int(raw) if raw else min(4, os.cpu_count() or 1)
    except ValueError as exc:
        raise UsageError(f"SCIRE_THREADS: {raw!r} is not an integer") from exc
    if width <= 1:
        return [worker(cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=width) as pool:
        return list(pool.map(worker, cells))


def _reference_endpoint(synth, schedule, x_init, t_start, t_end):
    return reference_solve(synth, schedule, x_init, t_start, t_end,
                           ReferenceConfig())


def cmd_convergence(args) -> int:
    cfg = merged_config(args)
    schedule = build_schedule(cfg)
    methods = _parse_list(args.methods, "--methods",
                          valid=("ddim", "scire2", "scire3"))
    phi_names = _parse_list(args.phi1_list, "--phi1",
                            valid=("m3", "limit", "fde"))
    ns = _parse_ns(args.ns)
    synth = build_model(cfg)
    dim = synth.dim() or _i(cfg, "model.dim", "model.dim")
    x_init = seeded_gaussian(dim, _i(cfg, "run.seed", "--seed"))
    base_spec = build_traj_spec(cfg, schedule, n_steps=1)
    ref = _reference_endpoint(synth, schedule, x_init,
                              base_spec.t_start, base_spec.t_end)

    def run_cell(cell):
        method, phi_name, n = cell
        spec = TrajectorySpec(kind=base_spec.kind, n_steps=n,
                              t_start=base_spec.t_start,
                              t_end=base_spec.t_end,
                              k_param=base_spec.k_param)
        solver_cfg = SolverConfig(method=method, trajectory=spec,
                                  phi1=Phi1Mode.from_config(phi_name))
        model = SyntheticEpsModel(synth, schedule)
        result = sample(solver_cfg, model, schedule, x_init)
        return cell, result.nfe, relative_error(result.x_final, ref)

    cells = [(m, p, n) for m in methods for p in phi_names for n in ns]
    results = {cell: (nfe, err)
               for cell, nfe, err in _study_cells(cells, run_cell)}

    rows = []
    for method in methods:
        for phi_name in phi_names:
            seen_ns, seen_errs = [], []
            for n in ns:
                nfe, err = results[(method, phi_name, n)]
                seen_ns.append(n)
                seen_errs.append(err)
                if len(seen_ns) < 2:
                    slope = ""
                elif min(seen_errs) <= EXACT_FLOOR:
                    slope = "exact"
                else:
                    slope = fmt(empirical_order(seen_ns, seen_errs))
                rows.append([method, phi_name, n, nfe, err, slope])
            final = rows[-1][5]
            print(f"method={method} phi1={phi_name} slope={final}")
    write_csv(cfg["run.out"] or None,
              ["method", "phi1", "N", "nfe", "error", "slope_so_far"], rows)
    return 0


def cmd_compare(args) -> int:
    cfg = merged_config(args)
    schedule = build_schedule(cfg)
    methods = _parse_list(args.methods, "--methods",
                          valid=("scire2", "scire3"))
    ns = _parse_ns(args.ns)
    synth = build_model(cfg)
    dim = synth.dim() or _i(cfg, "model.dim", "model.dim")
    x_init = seeded_gaussian(dim, _i(cfg, "run.seed", "--seed"))
    base_spec = build_traj_spec(cfg, schedule, n_steps=1)
    ref = _reference_endpoint(synth, schedule, x_init,
                              base_spec.t_start, base_spec.t_end)
    modes = [("rde", Phi1Mode.finite(3)), ("fde", Phi1Mode.fde())]

    def run_cell(cell):
        mode_name, phi1, method, n = cell
        spec = TrajectorySpec(kind=base_spec.kind, n_steps=n,
                              t_start=base_spec.t_start,
                              t_end=base_spec.t_end,
                              k_param=base_spec.k_param)
        solver_cfg = SolverConfig(method=method, trajectory=spec, phi1=phi1)
        model = SyntheticEpsModel(synth, schedule)
        result = sample(solver_cfg, model, schedule, x_init)
        return cell, relative_error(result.x_final, ref)

    cells = [(mn, p, m, n) for mn, p in modes for m in methods for n in ns]
    results = dict(_study_cells(cells, run_cell))
    rows = [[mode_name, method, n, results[(mode_name, phi1, method, n)]]
            for mode_name, phi1 in modes for method in methods for n in ns]
    write_csv(cfg["run.out"] or None, ["mode", "method", "N", "error"], rows)
    return 0


# -- entry point -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scire", description="NSR-reparametrized diffusion ODE samplers")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat section.key = value file")
    common.add_argument("--out", help="output CSV path (default: stdout)")
    common.add_argument("--schedule", choices=["linear", "cosine"])
    common.add_argument("--t-end", dest="t_end", type=float)
    common.add_argument("--t-start", dest="t_start", type=float)

    p_traj = sub.add_parser("trajectory", parents=[common],
                            help="dump a time trajectory as CSV")
    p_traj.add_argument("--kind", choices=list(KINDS))
    p_traj.add_argument("--steps", type=int)
    p_traj.add_argument("--k", type=float)
    p_traj.set_defaults(func=cmd_trajectory)

    p_samp = sub.add_parser("sample", parents=[common],
                            help="run a sampler and dump its trace")
    p_samp.add_argument("--method",
                        choices=["ddim", "scire2", "scire3", "agile"])
    p_samp.add_argument("--steps", type=int)
    p_samp.add_argument("--nfe", type=int)
    p_samp.add_argument("--phi1", choices=["m3", "limit", "fde"])
    p_samp.add_argument("--trajectory", choices=list(KINDS))
    p_samp.add_argument("--k", type=float)
    p_samp.add_argument("--seed", type=int)
    p_samp.set_defaults(func=cmd_sample)

    p_conv = sub.add_parser("convergence", parents=[common],
                            help="error-vs-N study against the reference")
    p_conv.add_argument("--methods", default="ddim,scire2,scire3")
    p_conv.add_argument("--phi1", dest="phi1_list", default="m3,fde")
    p_conv.add_argument("--ns", default="8,16,32,64,128")
    p_conv.add_argument("--trajectory", choices=list(KINDS))
    p_conv.add_argument("--seed", type=int)
    p_conv.set_defaults(func=cmd_convergence)

    p_cmp = sub.add_parser("compare", parents=[common],
                           help="rescaled vs plain difference estimation")
    p_cmp.add_argument("--methods", default="scire2,scire3")
    p_cmp.add_argument("--ns", default="8,16,32,64,128")
    p_cmp.add_argument("--trajectory", choices=list(KINDS))
    p_cmp.add_argument("--seed", type=int)
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SolverError, ReferenceNotConverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (UsageError, TrajectoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
