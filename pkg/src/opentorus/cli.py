"""Experiment driver: subcommands, artifact persistence, pass/fail gating.

Each subcommand computes one capability's report, persists CSV/JSON (and
SVG where a plot is natural) under the output directory, and prints one
PASS/FAIL line per check.  Exit code 0 when every check passes, 2 when
any fails, 1 on configuration errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys as _sys
from dataclasses import asdict, replace

import numpy as np

from .config import (ConfigError, ExperimentConfig, build_base_point,
                     build_system, load_config)
from .covering import SurvivorSpec, cover_verify
from .dimension import box_dimension, deficit_sweep
from .holes import Hole
from .mixing import (MixingParams, correlation_series, fit_decay,
                     noise_floor_estimate, verify_measure_estimate)
from .mollifier import build_mollifier, build_psi, verify_norm_scaling
from .system import unit_ball_volume
from . import reports
from .covering import CellSet


def _checks_to_payload(checks) -> dict:
    return {"checks": [{"name": n, "passed": ok, "detail": d}
                       for n, ok, d in checks]}


_COVER_T_GRID = (2, 3, 4)     # short horizons keep the exact oracle tractable


def cmd_cover_verify(cfg: ExperimentConfig):
    sysm = build_system(cfg)
    x = build_base_point(cfg, sysm)
    # covering bounds compare against the doubled ball, so they need 2r < r0
    eligible = [r for r in cfg.radius_list if 2.0 * r < sysm.r0]
    skipped = [r for r in cfg.radius_list if 2.0 * r >= sysm.r0]
    if not eligible:
        raise ConfigError(
            "radius_list",
            f"covering verification needs a radius with 2r < r0 = {sysm.r0}")
    rows, checks = [], []
    for t in _COVER_T_GRID:
        for r in eligible:
            delta = cfg.delta if cfg.delta > 0 else r / 200.0
            hole = Hole(cfg.hole_center, r)
            for k in range(1, cfg.k + 1):
                spec = SurvivorSpec(r=r, t=t, k=k, hole=hole, x=x)
                rep = cover_verify(sysm, spec, delta, seed=cfg.seed)
                rows.append([rep.t, rep.r, rep.k, rep.delta,
                             rep.survivor_cells, rep.actual_count,
                             rep.greedy_count, rep.bound,
                             "" if rep.refined is None else rep.refined,
                             rep.slack, rep.ok])
                checks.append((f"cover-bound-t{t}-r{r:g}-k{k}", rep.ok,
                               f"count {rep.actual_count} vs bound "
                               f"{rep.bound:.4g}"))
    out = cfg.out_dir
    header = ["t", "r", "k", "delta", "survivor_cells", "actual_count",
              "greedy_count", "bound", "refined", "slack", "ok"]
    reports.write_csv(os.path.join(out, "cover_verify.csv"), header, rows)
    payload = _checks_to_payload(checks)
    payload["rows"] = [dict(zip(header, row)) for row in rows]
    payload["skipped_radii"] = skipped
    reports.write_json(os.path.join(out, "cover_verify.json"),
                       "cover_verify", payload, cfg)
    xs = list(range(len(rows)))
    fig = reports.semilogy_figure(
        [("exact cover count", xs, [row[5] for row in rows], None),
         ("greedy count", xs, [row[6] for row in rows],
          {"marker": "s", "ms": 3}),
         ("bound", xs, [row[7] for row in rows],
          {"marker": "^", "ms": 3, "linestyle": "--"})],
        "instance (t, r, k)", "Bowen boxes", "covering bounds")
    reports.save_svg(fig, os.path.join(out, "cover_verify.svg"))
    return checks, payload


_EPS_LADDER = tuple(2.0 ** -j for j in range(4, 10))


def cmd_mollifier_scaling(cfg: ExperimentConfig):
    build_system(cfg)
    rows, checks, curves = [], [], []
    for d in (1, 2):
        for ell in range(0, cfg.ell + 1):
            rep = verify_norm_scaling(d, 0.1, ell, _EPS_LADDER)
            rows.append([rep.d, rep.ell, rep.slope, rep.bound_slope,
                         rep.slope_ok, rep.monotone, rep.passed])
            checks.append((f"norm-scaling-d{d}-ell{ell}", rep.passed,
                           f"slope {rep.slope:.3f} <= {rep.bound_slope:.3f}"))
            curves.append((f"d={d} ell={ell}",
                           [1.0 / e for e in rep.eps_values],
                           list(rep.norms), None))
    out = cfg.out_dir
    reports.write_csv(os.path.join(out, "mollifier_scaling.csv"),
                      ["d", "ell", "slope", "bound_slope", "slope_ok",
                       "monotone", "passed"], rows)
    payload = _checks_to_payload(checks)
    payload["rows"] = [dict(zip(["d", "ell", "slope", "bound_slope",
                                 "slope_ok", "monotone", "passed"], row))
                       for row in rows]
    reports.write_json(os.path.join(out, "mollifier_scaling.json"),
                       "mollifier_scaling", payload, cfg)
    fig = reports.loglog_figure(curves, "1/eps", "Sobolev norm",
                                "mollifier norm scaling")
    reports.save_svg(fig, os.path.join(out, "mollifier_scaling.svg"))
    return checks, payload


def cmd_mixing_fit(cfg: ExperimentConfig):
    sysm = build_system(cfg)
    x = build_base_point(cfg, sysm)
    r = cfg.hole_radius
    psi = build_psi(sysm, cfg.hole_center, r, 0.3 * r)
    step = 2.0 ** -16 if sysm.n == 1 else 2.0 ** -8
    f = build_mollifier(sysm.n, 0.1, 0.05, step)
    f_coarse = build_mollifier(sysm.n, 0.1, 0.05, 2.0 * step)
    t_values = list(range(1, cfg.t + 15))
    fine = correlation_series(sysm, f, psi, x, t_values)
    coarse = correlation_series(sysm, f_coarse, psi, x, t_values)
    floor = noise_floor_estimate(fine, coarse)
    series = fit_decay(np.asarray(t_values, dtype=float), fine, floor)
    params = MixingParams(lambda_prime=cfg.lambda_prime, p=cfg.p,
                          ell=cfg.ell, k_em=cfg.k_em)
    measure = verify_measure_estimate(sysm, x, Hole(cfg.hole_center, r),
                                      params=params)
    checks = [
        ("decay-rate-positive", series.fitted_lambda > 0,
         f"lambda {series.fitted_lambda:.4f}"),
        ("decay-fit-quality", series.r_squared >= 0.9,
         f"R^2 {series.r_squared:.4f}"),
        ("measure-limit", measure.pass_limit,
         f"c_r {measure.c_r:.6g} vs predicted {measure.predicted_c:.6g}"),
        ("measure-decay", measure.pass_decay,
         f"lambda' {measure.lambda_prime_fit:.4f}"),
    ]
    out = cfg.out_dir
    reports.write_csv(os.path.join(out, "mixing_fit.csv"),
                      ["t", "correlation", "correlation_coarse"],
                      [[t, c, cc] for t, c, cc in zip(t_values, fine, coarse)])
    payload = _checks_to_payload(checks)
    payload["decay"] = {
        "t_values": list(map(float, series.t_values)),
        "correlations": list(map(float, series.correlations)),
        "fitted_lambda": series.fitted_lambda,
        "fitted_amplitude": series.fitted_amplitude,
        "r_squared": series.r_squared,
        "noise_floor": series.noise_floor,
    }
    payload["measure"] = {k: (list(v) if isinstance(v, tuple) else v)
                          for k, v in asdict(measure).items()}
    reports.write_json(os.path.join(out, "mixing_fit.json"),
                       "mixing_fit", payload, cfg)
    tv = np.asarray(t_values, dtype=float)
    fit_curve = series.fitted_amplitude * np.exp(-series.fitted_lambda * tv)
    fig = reports.semilogy_figure(
        [("|correlation|", t_values, np.abs(fine) + 1e-300, None),
         ("fit", t_values, fit_curve, {"linestyle": "--"}),
         ("noise floor", t_values, [floor] * len(t_values),
          {"linestyle": ":"})],
        "t", "|C(t)|", "leaf correlation decay")
    reports.save_svg(fig, os.path.join(out, "mixing_fit.svg"))
    return checks, payload


def cmd_dim_sweep(cfg: ExperimentConfig):
    sysm = build_system(cfg)
    x = build_base_point(cfg, sysm)
    if len(cfg.radius_list) < 4:
        raise ConfigError("radius_list",
                          f"need at least four radii, got {len(cfg.radius_list)}")
    params = MixingParams(lambda_prime=cfg.lambda_prime, p=cfg.p,
                          ell=cfg.ell, k_em=cfg.k_em)
    rep = deficit_sweep(sysm, cfg.hole_center, cfg.radius_list, x=x,
                        params=params, k_max=cfg.k, workers=cfg.workers)
    checks = []
    for row in rep.rows:
        checks.append((f"deficit-positive-r{row.r:g}",
                       row.deficit > 2.0 * row.dim_stderr,
                       f"deficit {row.deficit:.5f} vs 2*stderr "
                       f"{2 * row.dim_stderr:.5f}"))
    ordered = sorted(rep.rows, key=lambda row: row.r)
    mono = all(b.deficit >= a.deficit - 2.0 * (a.dim_stderr + b.dim_stderr)
               for a, b in zip(ordered, ordered[1:]))
    checks.append(("deficit-monotone", mono,
                   "nondecreasing in r within error bars"))
    out = cfg.out_dir
    reports.write_csv(os.path.join(out, "dim_sweep.csv"),
                      ["r", "dim", "deficit", "theorem_ratio",
                       "conjecture_ratio"],
                      [[row.r, row.dim_estimate, row.deficit,
                        row.theorem_ratio, row.conjecture_ratio]
                       for row in rep.rows])
    payload = _checks_to_payload(checks)
    payload["rows"] = [asdict(row) for row in rep.rows]
    payload["d_double_prime"] = rep.d_double_prime
    payload["c_conjecture"] = rep.c_conjecture
    payload["protocol"] = {"lambda_prime": rep.lambda_prime, "p": rep.p,
                           "k_max": rep.k_max,
                           "points_per_step": rep.points_per_step}
    reports.write_json(os.path.join(out, "dim_sweep.json"),
                       "dim_sweep", payload, cfg)
    count_curves = [(f"r={row.r:g}", list(est.scales), list(est.counts), None)
                    for row, est in zip(rep.rows, rep.estimates)]
    fig = reports.loglog_figure(count_curves, "scale", "occupied boxes",
                                "survivor box counts")
    reports.save_svg(fig, os.path.join(out, "dim_sweep_counts.svg"))
    rs = np.asarray([row.r for row in ordered])
    defs = np.asarray([row.deficit for row in ordered])
    errs = np.asarray([2.0 * row.dim_stderr for row in ordered])
    vm = unit_ball_volume(sysm.m)
    grid = np.geomspace(rs[0], rs[-1], 64)
    fig, ax = reports.plt.subplots(figsize=(6.0, 4.5))
    ax.errorbar(rs, defs, yerr=errs, fmt="o", ms=4, label="measured deficit")
    ax.plot(grid, rep.d_double_prime * grid ** sysm.m / np.log(1.0 / grid),
            "--", label="D'' r^m / log(1/r)")
    ax.plot(grid, rep.c_conjecture * vm * grid ** sysm.m, ":",
            label="C V_m r^m")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("hole radius r")
    ax.set_ylabel("dimension deficit")
    ax.set_title("deficit against both candidate scalings")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    reports.save_svg(fig, os.path.join(out, "dim_sweep_deficit.svg"))
    return checks, payload


def _interval_cells(delta: float) -> CellSet:
    idx = np.arange(int(round(1.0 / delta)), dtype=np.int64)
    return CellSet(delta, idx[:, None], 0.5)


def _cantor_cells(depth: int) -> CellSet:
    starts = [0]
    for k in range(depth):
        w = 3 ** (depth - k - 1)
        starts = starts + [s + 2 * w for s in starts]
    idx = np.asarray(sorted(starts), dtype=np.int64)
    return CellSet(3.0 ** -depth, idx[:, None], 0.5)


def cmd_calibrate(cfg: ExperimentConfig):
    interval = box_dimension(_interval_cells(1e-4),
                             [0.05 * 2.0 ** -j for j in range(8)])
    cantor = box_dimension(_cantor_cells(10),
                           [3.0 ** -j for j in range(1, 9)])
    target_c = math.log(2.0) / math.log(3.0)
    rows = [
        ["interval", interval.slope, 1.0, 0.02,
         abs(interval.slope - 1.0) <= 0.02],
        ["cantor_depth10", cantor.slope, target_c, 0.02,
         abs(cantor.slope - target_c) <= 0.02],
    ]
    checks = [(f"calibration-{name}", ok, f"slope {slope:.4f} vs {target:.4f}")
              for name, slope, target, _, ok in rows]
    out = cfg.out_dir
    reports.write_csv(os.path.join(out, "calibrate.csv"),
                      ["name", "slope", "target", "tolerance", "passed"], rows)
    payload = _checks_to_payload(checks)
    payload["rows"] = [dict(zip(["name", "slope", "target", "tolerance",
                                 "passed"], row)) for row in rows]
    reports.write_json(os.path.join(out, "calibrate.json"),
                       "calibrate", payload, cfg)
    fig = reports.loglog_figure(
        [("interval", [1.0 / s for s in interval.scales],
          list(interval.counts), None),
         ("cantor", [1.0 / s for s in cantor.scales],
          list(cantor.counts), {"marker": "s", "ms": 3})],
        "1/scale", "occupied boxes", "estimator calibration")
    reports.save_svg(fig, os.path.join(out, "calibrate.svg"))
    return checks, payload


def cmd_report(cfg: ExperimentConfig):
    aggregate, checks = {}, []
    for name, fn in (("calibrate", cmd_calibrate),
                     ("cover_verify", cmd_cover_verify),
                     ("mollifier_scaling", cmd_mollifier_scaling),
                     ("mixing_fit", cmd_mixing_fit),
                     ("dim_sweep", cmd_dim_sweep)):
        sub_checks, payload = fn(cfg)
        aggregate[name] = payload
        checks.extend((f"{name}:{n}", ok, d) for n, ok, d in sub_checks)
    reports.write_json(os.path.join(cfg.out_dir, "report.json"),
                       "report", {"sections": aggregate}, cfg)
    return checks, {"sections": aggregate}


_COMMANDS = {
    "cover-verify": (cmd_cover_verify, "survivor covering bounds"),
    "mollifier-scaling": (cmd_mollifier_scaling, "mollifier norm slopes"),
    "mixing-fit": (cmd_mixing_fit, "correlation decay and measure estimate"),
    "dim-sweep": (cmd_dim_sweep, "survivor dimension deficit sweep"),
    "calibrate": (cmd_calibrate, "box-count estimator calibration"),
    "report": (cmd_report, "all reports plus an aggregate summary"),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="opentorus",
        description="numerical laboratory for open toral automorphisms")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="worker pool size")
        p.add_argument("--seed", type=int, default=None, help="sampling seed")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        overrides = {}
        if args.out is not None:
            overrides["out_dir"] = args.out
        if args.workers is not None:
            overrides["workers"] = args.workers
        if args.seed is not None:
            overrides["seed"] = args.seed
        if overrides:
            cfg = replace(cfg, **overrides)
        from .config import validate_config
        validate_config(cfg)
        checks, _ = _COMMANDS[args.command][0](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 1
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if all(ok for _, ok, _ in checks) else 2


if __name__ == "__main__":
    raise SystemExit(main())
