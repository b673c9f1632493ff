"""Command-line front end.

Subcommands: solve-wave, evolve, stability, kdv-limit, liouville,
monotonicity, commutator-test, rescale. Configuration is flat
``key = value`` text with ``[sections]``; unknown keys are errors. Flags
override config values. Exit codes: 0 success, 1 domain error, 2 usage
error.
"""

from __future__ import annotations

import argparse
import configparser
import sys

import numpy as np

from .experiments import (
    ExperimentConfig,
    ensure_outdir,
    run_kdv_limit,
    run_liouville_probe,
    run_stability,
    save_series_svg,
    write_csv,
    write_report,
)

KNOWN_KEYS = {
    "grid": {"n", "l"},
    "wave": {"gamma", "c"},
    "evolution": {
        "dt", "t", "record_every", "snapshot_every", "sponge_strength",
        "sponge_width_frac",
    },
    "perturbation": {"kind", "rel", "seed"},
    "experiment": {"scenario", "b", "eps0", "r_list", "out_dir"},
}


class ConfigFileError(ValueError):
    pass


def load_config(path: str | None) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigFileError(f"config file not found: {path}")
    for section in parser.sections():
        if section not in KNOWN_KEYS:
            raise ConfigFileError(f"unknown config section [{section}] in {path}")
        for key in parser[section]:
            if key not in KNOWN_KEYS[section]:
                raise ConfigFileError(
                    f"unknown key '{key}' in section [{section}] of {path}"
                )
    g = parser["grid"] if parser.has_section("grid") else {}
    w = parser["wave"] if parser.has_section("wave") else {}
    e = parser["evolution"] if parser.has_section("evolution") else {}
    p = parser["perturbation"] if parser.has_section("perturbation") else {}
    x = parser["experiment"] if parser.has_section("experiment") else {}
    if "n" in g:
        cfg.n = int(g["n"])
    if "l" in g:
        cfg.L = float(g["l"])
    if "gamma" in w:
        cfg.gamma = float(w["gamma"])
    if "c" in w:
        cfg.c = float(w["c"])
    if "dt" in e:
        cfg.dt = float(e["dt"])
    if "t" in e:
        cfg.T = float(e["t"])
    if "record_every" in e:
        cfg.record_every = int(e["record_every"])
    if "snapshot_every" in e:
        cfg.snapshot_every = int(e["snapshot_every"])
    if "sponge_strength" in e:
        cfg.sponge_strength = float(e["sponge_strength"])
    if "sponge_width_frac" in e:
        cfg.sponge_width_frac = float(e["sponge_width_frac"])
    if "kind" in p:
        cfg.perturb_kind = p["kind"]
    if "rel" in p:
        cfg.perturb_rel = float(p["rel"])
    if "seed" in p:
        cfg.seed = int(p["seed"])
    if "scenario" in x:
        cfg.scenario = x["scenario"]
    if "b" in x:
        cfg.b = float(x["b"])
    if "eps0" in x:
        cfg.eps0 = float(x["eps0"])
    if "r_list" in x:
        cfg.R_list = tuple(float(s) for s in x["r_list"].split())
    if "out_dir" in x:
        cfg.out_dir = x["out_dir"]
    return cfg


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    for attr, name in [
        ("gamma", "gamma"), ("c", "c"), ("n", "n"), ("L", "L"),
        ("dt", "dt"), ("T", "T"), ("seed", "seed"), ("out_dir", "out"),
    ]:
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, attr, val)
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="benlab", description="Benjamin-equation solitary wave laboratory"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--gamma", type=float, default=None)
        p.add_argument("--c", type=float, default=None)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--L", type=float, default=None)
        p.add_argument("--dt", type=float, default=None)
        p.add_argument("--T", type=float, default=None)

    add_common(sub.add_parser("solve-wave", help="compute a profile, write CSV"))
    add_common(sub.add_parser("evolve", help="evolve initial data, write trajectory CSV"))
    add_common(sub.add_parser("stability", help="perturbed-soliton stability run"))
    add_common(sub.add_parser("kdv-limit", help="profile distance to the KdV soliton"))
    add_common(sub.add_parser("liouville", help="perturbation-equation tail decay"))
    mono = sub.add_parser("monotonicity", help="localized-functional defect sweep")
    add_common(mono)
    mono.add_argument("--which", default="I_right",
                      choices=["I_right", "I_left", "combo4IJ", "H_right"])
    mono.add_argument("--vartheta", type=float, default=0.5)
    comm = sub.add_parser("commutator-test", help="commutator-estimate ratios")
    add_common(comm)
    comm.add_argument("--eps", type=float, default=0.1)
    comm.add_argument("--samples", type=int, default=200)
    resc = sub.add_parser("rescale", help="apply the scaling symmetry to a profile")
    add_common(resc)
    resc.add_argument("--lam", type=float, default=1.1)
    return parser


def _cmd_solve_wave(cfg: ExperimentConfig, args, out):
    from .waves import continue_branch

    wave = continue_branch(cfg.gamma, cfg.c, cfg.grid())
    rows = list(zip(wave.profile.grid.x.tolist(), wave.profile.values.tolist()))
    write_csv(f"{out}/profile.csv", ["x", "Q"], rows)
    body = (
        f"gamma = {cfg.gamma}\nc = {cfg.c}\nresidual = {wave.residual:.3e}\n"
        f"iterations = {wave.iterations}\ndecay_constant = {wave.decay:.6g}\n"
        f"peak = {float(np.max(wave.profile.values)):.17g}\n"
        f"tail magnitude at L/2 ~ decay/(L/2)^2 = "
        f"{wave.decay / (cfg.L / 2) ** 2:.3e}\n"
    )
    write_report(f"{out}/report.txt", "solve-wave", cfg.resolved_text(), body)
    print(body, end="")
    return 0


def _cmd_evolve(cfg: ExperimentConfig, args, out):
    from .evolution import EvolutionConfig, evolve
    from .waves import continue_branch

    wave = continue_branch(cfg.gamma, cfg.c, cfg.grid())
    ev = EvolutionConfig(
        dt=cfg.dt, T=cfg.T, record_every=cfg.record_every,
        sponge_strength=cfg.sponge_strength,
        sponge_width_frac=cfg.sponge_width_frac,
    )
    traj = evolve(wave.profile, cfg.gamma, ev)
    rows = [(r.t, r.mass, r.energy, r.h1, r.linf) for r in traj.records]
    write_csv(f"{out}/trajectory.csv", ["t", "mass", "energy", "h1norm", "linf"], rows)
    snap_rows = list(zip(traj.grid.x.tolist(), traj.final.values.tolist()))
    write_csv(f"{out}/final_state.csv", ["x", "u"], snap_rows)
    drift_m = abs(traj.records[-1].mass - traj.records[0].mass) / traj.records[0].mass
    body = f"records = {len(traj.records)}\nmass_drift = {drift_m:.3e}\n"
    write_report(f"{out}/report.txt", "evolve", cfg.resolved_text(), body)
    print(body, end="")
    return 0


def _cmd_stability(cfg: ExperimentConfig, args, out):
    rep = run_stability(cfg)
    rows = list(
        zip(rep.times.tolist(), rep.right_window_h1.tolist(), rep.xdot.tolist(),
            rep.eta_h1.tolist())
    )
    write_csv(
        f"{out}/stability.csv", ["t", "right_window_h1", "xdot", "eta_h1"], rows
    )
    save_series_svg(
        f"{out}/stability.svg", rep.times,
        {"right-window H1 error": rep.right_window_h1}, "t", "H1 error", logy=True,
    )
    body = (
        f"c_star = {rep.c_star:.17g}\nalpha = {rep.alpha:.17g}\n"
        + "".join(f"{k} = {v}\n" for k, v in rep.flags.items())
    )
    write_report(f"{out}/report.txt", "stability", rep.config_text, body)
    print(body, end="")
    return 0


def _cmd_kdv_limit(cfg: ExperimentConfig, args, out):
    rep = run_kdv_limit(cfg)
    rows = [(r["gamma"], r["h1"], r["h2"]) for r in rep["rows"]]
    write_csv(f"{out}/kdv_limit.csv", ["gamma", "h1_distance", "h2_distance"], rows)
    body = f"fitted_order = {rep['fitted_order']:.6g}\n"
    write_report(f"{out}/report.txt", "kdv-limit", rep["config_text"], body)
    print(body, end="")
    return 0


def _cmd_liouville(cfg: ExperimentConfig, args, out):
    rep = run_liouville_probe(cfg)
    rows = [(R, rep["tails"][R]) for R in sorted(rep["tails"])]
    write_csv(f"{out}/tails.csv", ["R", "tail"], rows)
    body = f"C = {rep['C']:.17g}\nslope = {rep['slope']:.6g}\n"
    write_report(f"{out}/report.txt", "liouville", rep["config_text"], body)
    print(body, end="")
    return 0


def _cmd_monotonicity(cfg: ExperimentConfig, args, out):
    from .evolution import EvolutionConfig, evolve
    from .modulation import track_modulation
    from .monotonicity import monotonicity_sweep
    from .spectral import norm, shift
    from .waves import WaveParams, continue_branch
    from .experiments import make_perturbation

    grid = cfg.grid()
    wave = continue_branch(cfg.gamma, cfg.c, grid)
    u0 = shift(wave.profile, cfg.L / 4)
    if cfg.perturb_rel > 0:
        u0 = u0 + make_perturbation(
            grid, cfg.perturb_kind, cfg.perturb_rel * norm(wave.profile, "h1"),
            -cfg.L / 4, cfg.seed,
        )
    ev = EvolutionConfig(
        dt=cfg.dt, T=cfg.T, record_every=cfg.record_every,
        snapshot_every=cfg.snapshot_every,
    )
    traj = evolve(u0, cfg.gamma, ev)
    recs = track_modulation(traj, WaveParams(cfg.gamma, cfg.c), profile=wave.profile)
    xs = [r.rho for r in recs]
    report = monotonicity_sweep(
        traj, xs, list(cfg.R_list), cfg.gamma, vartheta=args.vartheta,
        which=args.which,
    )
    rows = [(r.R, r.t, r.t0, args.which, r.value, r.defect) for r in report["rows"]]
    write_csv(
        f"{out}/sweep.csv", ["R", "t", "t0", "functional", "value", "defect"], rows
    )
    body = "".join(
        f"{k} = {report[k]}\n"
        for k in ("which", "slope", "K", "speed_ok", "loc_ok", "loc_sup", "theta0")
    )
    write_report(f"{out}/report.txt", "monotonicity", cfg.resolved_text(), body)
    print(body, end="")
    return 0


def _cmd_commutator(cfg: ExperimentConfig, args, out):
    from .monotonicity import commutator_defect, commutator_derivative_defect, periodic_plateau
    from .spectral import Field

    grid = cfg.grid()
    rng = np.random.default_rng(cfg.seed)
    f = Field(grid, np.sin(2 * np.pi * grid.x / grid.L))
    ratios = []
    for _ in range(args.samples):
        hat = np.zeros(grid.n // 2 + 1, complex)
        kmax = grid.n // 8
        hat[1:kmax] = rng.standard_normal(kmax - 1) + 1j * rng.standard_normal(kmax - 1)
        u = Field.from_hat(grid, hat)
        ratios.append(commutator_defect(f, u)["ratio"])
    rows = [(i, r) for i, r in enumerate(ratios)]
    write_csv(f"{out}/commutator_ratios.csv", ["sample", "ratio"], rows)
    lefts = []
    r_list = [10.0, 20.0, 40.0, 80.0]
    u = Field.from_hat(grid, hat)
    for R in r_list:
        fr = periodic_plateau(grid, R, center=-grid.L / 5, extent=grid.L / 4)
        lefts.append(commutator_derivative_defect(fr, u, args.eps)["left"])
    slope = float(np.polyfit(np.log(r_list), np.log(lefts), 1)[0])
    body = (
        f"max_ratio = {max(ratios):.6g}\n"
        f"derivative_scaling_slope = {slope:.6g}\n"
        f"expected_slope = {-(2 - args.eps) * 0.75:.6g}\n"
    )
    write_report(f"{out}/report.txt", "commutator-test", cfg.resolved_text(), body)
    print(body, end="")
    return 0


def _cmd_rescale(cfg: ExperimentConfig, args, out):
    from .evolution import rescale
    from .waves import WaveParams, continue_branch, profile_residual

    grid = cfg.grid()
    wave = continue_branch(cfg.gamma, cfg.c, grid)
    scaled, new_params = rescale(wave.profile, args.lam, WaveParams(cfg.gamma, cfg.c))
    res = profile_residual(scaled, new_params)
    rows = list(zip(grid.x.tolist(), scaled.values.tolist()))
    write_csv(f"{out}/rescaled_profile.csv", ["x", "Q"], rows)
    body = (
        f"lambda = {args.lam}\nnew_gamma = {new_params.gamma:.17g}\n"
        f"new_c = {new_params.c:.17g}\nresidual = {res:.3e}\n"
    )
    write_report(f"{out}/report.txt", "rescale", cfg.resolved_text(), body)
    print(body, end="")
    return 0


COMMANDS = {
    "solve-wave": _cmd_solve_wave,
    "evolve": _cmd_evolve,
    "stability": _cmd_stability,
    "kdv-limit": _cmd_kdv_limit,
    "liouville": _cmd_liouville,
    "monotonicity": _cmd_monotonicity,
    "commutator-test": _cmd_commutator,
    "rescale": _cmd_rescale,
}


def cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        out = ensure_outdir(cfg.out_dir if args.out is None else args.out)
        return COMMANDS[args.command](cfg, args, out)
    except (ConfigFileError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli())


if __name__ == "__main__":
    main()
