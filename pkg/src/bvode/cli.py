"""Config-driven command line: run solvers and studies, emit CSV tables.

Every subcommand reads one INI config, writes CSV into an output
directory (atomically, via a temp file and rename), and prints a one
line summary.  Exit codes: 0 success, 1 invalid config, 2 step cap.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .analysis import convergence_study, sigma_n_check  # noqa: F401  (sigma_n_check: library parity)
from .config import ConfigError, ExperimentConfig, load_config
from .jumpmap import JumpMeasure, measure_from_sigma, phi_solve, phi_explicit_ramp, ramp_z
from .limit import solve_limit
from .mollify import classify_regime, sigma_delta_limit
from .scheme import StepLimitError, solve_grid


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _write_csv(out_dir: str, filename: str, header, rows) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, filename)
    tmp = f"{path}.tmp.{os.getpid()}"
    count = 0
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
            count += 1
    os.replace(tmp, path)
    return path


def _default_u_probes(cfg: ExperimentConfig):
    if cfg.u_probes is not None:
        return cfg.u_probes
    return tuple(np.linspace(0.0, 1.0, 21))


def _mu_for(cfg: ExperimentConfig) -> JumpMeasure:
    if cfg.mu is not None:
        return cfg.mu
    if cfg.driver is not None and cfg.driver.jump_epochs.size:
        raise ConfigError("run", "mu", "required when the driver has jumps")
    return JumpMeasure.lebesgue()


def _cmd_solve_scheme(cfg: ExperimentConfig, out_dir: str, args) -> int:
    L = cfg.need("driver", "driver", "breakpoints")
    f = cfg.need("field", "field", "name")
    profile = cfg.need("profile", "mollifier", "profile")
    sched = cfg.need("schedule", "mollifier", "alpha")
    n = cfg.need("n", "run", "n")
    h = sched.h(n)
    gp = solve_grid(f, L, profile, n, h, cfg.x0, n_offsets=cfg.n_offsets,
                    mollify_coefficient=cfg.mollify_coefficient,
                    conv_points=cfg.conv_points, step_cap=cfg.step_cap)
    path = _write_csv(out_dir, "grid_path.csv",
                      ("offset_index", "tau", "k", "t", "x"), gp.rows())
    finals = gp.final_values()
    print(f"solve-scheme: n={n} h={h:g} offsets={cfg.n_offsets} "
          f"final x in [{finals.min():.6g}, {finals.max():.6g}] -> {path}")
    return 0


def _cmd_solve_limit(cfg: ExperimentConfig, out_dir: str, args) -> int:
    L = cfg.need("driver", "driver", "breakpoints")
    f = cfg.need("field", "field", "name")
    mu = _mu_for(cfg)
    lp = solve_limit(f, L, mu, cfg.x0, sample_times=cfg.sample_times,
                     v_max=cfg.v_max)
    path = _write_csv(out_dir, "limit_path.csv",
                      ("t", "x_left", "x", "is_jump"), lp.rows())
    print(f"solve-limit: {lp.t.size} samples, final x={lp.x[-1]:.10g} -> {path}")
    return 0


def _cmd_sigma(cfg: ExperimentConfig, out_dir: str, args) -> int:
    profile = cfg.need("profile", "mollifier", "profile")
    sched = cfg.need("schedule", "mollifier", "alpha")
    rows = []
    n_conv = 0
    probes = [u for u in _default_u_probes(cfg)]
    for delta in cfg.deltas:
        for u in probes:
            probe = sigma_delta_limit(profile, sched, delta, u)
            n_conv += int(probe.converged)
            for n, v in zip(probe.n_values, probe.values):
                rows.append((delta, u, n, v))
    path = _write_csv(out_dir, "sigma_probes.csv",
                      ("delta", "u", "n", "value"), rows)
    total = len(cfg.deltas) * len(probes)
    print(f"sigma: {total} probes ({n_conv} converged), "
          f"{len(sched.meshes)} meshes each -> {path}")
    return 0


def _cmd_classify(cfg: ExperimentConfig, out_dir: str, args) -> int:
    profile = cfg.need("profile", "mollifier", "profile")
    sched = cfg.need("schedule", "mollifier", "alpha")
    report = classify_regime(profile, sched, deltas=cfg.deltas,
                             u_probes=_default_u_probes(cfg))
    path = _write_csv(out_dir, "classify_evidence.csv",
                      ("delta", "u", "n", "value"), report.evidence)
    detail = f" ({report.detail})" if report.detail else ""
    print(f"classify: {report.verdict}{detail} "
          f"max_spread={report.max_spread:.3g} -> {path}")
    return 0


def _cmd_study(cfg: ExperimentConfig, out_dir: str, args) -> int:
    L = cfg.need("driver", "driver", "breakpoints")
    f = cfg.need("field", "field", "name")
    profile = cfg.need("profile", "mollifier", "profile")
    sched = cfg.need("schedule", "mollifier", "alpha")
    mu = _mu_for(cfg)
    result = convergence_study(f, L, profile, sched, mu, cfg.x0,
                               n_offsets=cfg.n_offsets, threads=args.threads,
                               mollify_coefficient=cfg.mollify_coefficient,
                               conv_points=cfg.conv_points,
                               step_cap=cfg.step_cap)
    path = _write_csv(out_dir, "study.csv", ("n", "h_n", "metric", "value"),
                      result.rows())
    print(f"study: {len(result.ns)} meshes, final l1={result.l1_errors[-1]:.6g} "
          f"(rel {result.rel_errors[-1]:.3g}), decreasing={result.decreasing} -> {path}")
    return 0


def _cmd_jumpmap(cfg: ExperimentConfig, out_dir: str, args) -> int:
    sigma = cfg.need("sigma", "sigma", "intervals")
    mu = measure_from_sigma(sigma)
    rng = np.random.default_rng(args.seed)
    qs = cfg.jump_q if cfg.jump_q is not None else tuple(rng.uniform(0.0, 1.0, 6))
    eps_list = cfg.jump_eps if cfg.jump_eps is not None else tuple(rng.uniform(0.05, 0.6, 4))
    ts = cfg.jump_t if cfg.jump_t is not None else tuple(rng.uniform(0.0, 1.0, 5))
    x_ref = cfg.x0
    rows = []
    skipped = 0
    max_err = 0.0
    for q in qs:
        for eps in eps_list:
            z = ramp_z(q, eps, x_ref)
            for t in ts:
                try:
                    oracle = phi_explicit_ramp(sigma, q, eps, x_ref, t)
                except ValueError:
                    skipped += 1
                    continue
                phi = phi_solve(z, x_ref, t, mu)
                err = abs(phi - oracle)
                max_err = max(max_err, err)
                rows.append((q, eps, t, phi, oracle, err))
    path = _write_csv(out_dir, "jumpmap.csv",
                      ("q", "eps", "t", "phi", "oracle", "abs_err"), rows)
    print(f"jumpmap: {len(rows)} evaluations ({skipped} skipped at "
          f"staircase-interior q), max |err|={max_err:.3g} -> {path}")
    return 0


_HANDLERS = {
    "solve-scheme": _cmd_solve_scheme,
    "solve-limit": _cmd_solve_limit,
    "sigma": _cmd_sigma,
    "classify": _cmd_classify,
    "study": _cmd_study,
    "jumpmap": _cmd_jumpmap,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bvode",
        description="Finite-difference and limit-equation toolkit for "
                    "equations driven by bounded-variation signals.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "solve-scheme": "run the lattice scheme over an offset fan",
        "solve-limit": "solve the limit equation for a driver and measure",
        "sigma": "tabulate shifted-inverse limits over the mesh schedule",
        "classify": "name the scheme's limiting regime for a schedule",
        "study": "mesh-refinement error study against the limit path",
        "jumpmap": "jump-map evaluations against the explicit ramp oracle",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, help="experiment config file")
        sp.add_argument("--out", default=None, help="output directory (default: config or .)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for study rows")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized probe grids")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        out_dir = args.out if args.out is not None else cfg.out_dir
        return _HANDLERS[args.command](cfg, out_dir, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except StepLimitError as exc:
        print(f"step limit: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
