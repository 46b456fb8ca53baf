"""``dengue-seir`` command-line interface.

Every subcommand accepts every run-configuration key as a flag; values
come from the defaults, then ``--config FILE``, then explicit flags.
Exit status: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import dataio
from .dataio import CONFIG_FIELDS, ConfigError, DataFormatError, RunConfig
from .model import IntegrationError, ParameterError

HELP = {
    "beta_np": "baseline transmission rate, 1/day",
    "a_beta": "seasonal amplitude, 1/day",
    "t_p": "peak day of year",
    "sigma": "seasonal width, days",
    "beta_peak": "peak logistic transmission rate, 1/day (alias --beta-p)",
    "delta": "incubation rate, 1/day",
    "gamma": "recovery rate, 1/day",
    "mu": "natural death rate, 1/day",
    "pop": "population for ODE runs",
    "omega": "season length, days",
    "observable": "incidence (delta*E) or prevalence (I)",
    "h": "RK4 step, days",
    "init_cases": "observable value at day 0 used to seed the ODE state",
    "fit_init": "ODE start for fit and ppc: data (first observed count) or config (init_cases)",
    "days": "simulated or synthetic horizon, days",
    "sigma_obs": "observation noise sd for synth",
    "likelihood": "gaussian or simplified",
    "chains": "MCMC chains",
    "iters": "MCMC iterations per chain, including warm-up",
    "warmup": "MCMC warm-up iterations",
    "seed": "master random seed",
    "n": "CTMC sample paths",
    "ol": "outbreak level for E+I",
    "t0": "introduction time, days",
    "t_max": "CTMC horizon; 0 means t0 + 5*omega",
    "ctmc_pop": "population for CTMC runs",
    "grid_n": "sample paths per outbreak-heatmap cell",
    "grid": "heatmap resolution, ROWSxCOLS",
    "x_axis": "heatmap row axis, name:lo:hi",
    "y_axis": "heatmap column axis, name:lo:hi",
    "out": "output directory",
    "workers": "worker processes; results do not depend on it",
}

COMMANDS = {
    "simulate": "integrate the ODE and write trajectory.csv",
    "synth": "write synthetic case data to synthetic.csv",
    "fit": "run MCMC on --data; writes posterior.csv and summary.csv",
    "summarize": "summarise a posterior CSV into summary.csv",
    "ppc": "posterior predictive bands; writes ppc.csv and ppc.svg",
    "ctmc": "simulate one recorded CTMC path to ctmc_path.csv",
    "outbreak": "Monte Carlo outbreak probability; writes outbreak.csv and paths.csv",
    "r0": "basic reproduction number",
    "r0-seasonal": "seasonal reproduction number by Floquet bisection",
    "heatmap-r0": "seasonal R0 over a parameter grid",
    "heatmap-outbreak": "outbreak probability over a parameter grid",
    "plot": "render a CSV output as SVG",
    "table3": "recompute the nine-row R0 / outbreak comparison table",
}


class UsageError(Exception):
    pass


def _config_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    g = parent.add_argument_group("run configuration (flags override --config)")
    g.add_argument("--config", metavar="FILE", help="key = value configuration file")
    defaults = RunConfig()
    for name in CONFIG_FIELDS:
        flags = ["--" + name.replace("_", "-")]
        if name == "beta_peak":
            flags.append("--beta-p")
        default = getattr(defaults, name)
        g.add_argument(*flags, dest=name, default=None, metavar=type(default).__name__.upper(),
                       help=f"{HELP.get(name, name.replace('_', ' '))} (default: {default})")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dengue-seir", description="Seasonal SEIR dengue modelling toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    parent = _config_parent()
    cmds = {}
    for name, help_text in COMMANDS.items():
        cmds[name] = sub.add_parser(name, parents=[parent], help=help_text,
                                    description=help_text)
    for name in ("fit", "ppc"):
        cmds[name].add_argument("--data", required=True, help="case CSV with header date,cases")
    for name in ("summarize", "ppc"):
        cmds[name].add_argument("--draws", help="posterior CSV (default: OUT/posterior.csv)")
    cmds["ppc"].add_argument("--ppc-draws", type=int, default=500,
                             help="posterior draws used for the bands (default: 500)")
    cmds["r0"].add_argument("--beta-bar", type=float,
                            help="mean transmission rate; computed from the model flags if omitted")
    cmds["outbreak"].add_argument("--no-path-log", action="store_true",
                                  help="skip writing paths.csv")
    cmds["plot"].add_argument("--kind", required=True,
                              choices=("beta", "trajectory", "band", "heatmap"),
                              help="beta: transmission rate over one season from the model "
                                   "flags; the others render a CSV written by another command")
    cmds["plot"].add_argument("--input", help="CSV to plot (trajectory, band, heatmap)")
    cmds["plot"].add_argument("--rainfall", help="month,mm CSV drawn as bars under beta")
    cmds["plot"].add_argument("--output", help="SVG path (default: OUT/<kind>.svg)")
    cmds["table3"].add_argument("--deterministic-only", action="store_true",
                                help="skip the Monte Carlo outbreak column")
    return parser


def resolve_config(args) -> RunConfig:
    cfg = dataio.load_config(args.config) if args.config else RunConfig()
    return dataio.apply_overrides(cfg, {k: getattr(args, k) for k in CONFIG_FIELDS})


# -- commands -------------------------------------------------------------


def _out(cfg: RunConfig, name: str) -> Path:
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def _ode_init(cfg, p):
    from .model import initial_state
    return initial_state(p, cfg.init_cases, cfg.observable)


def _fit_init(cfg, p):
    if cfg.fit_init == "config":
        return _ode_init(cfg, p)
    if cfg.fit_init != "data":
        raise UsageError(f"fit_init must be data or config, got {cfg.fit_init!r}")
    return None


def cmd_simulate(cfg, args):
    from .model import integrate
    p = cfg.model_params()
    traj = integrate(p, _ode_init(cfg, p), cfg.days, h=cfg.h, observable=cfg.observable)
    path = _out(cfg, "trajectory.csv")
    dataio.write_trajectory_csv(traj, path)
    k = int(np.argmax(traj.y))
    return f"simulate: peak {cfg.observable} {dataio.fmt(traj.y[k])} at day {dataio.fmt(traj.t[k])} -> {path}"


def _theta(cfg):
    return [cfg.beta_np, cfg.a_beta, cfg.t_p, cfg.sigma, cfg.beta_peak, cfg.sigma_obs]


def cmd_synth(cfg, args):
    p = cfg.model_params()
    series = dataio.generate_synthetic(p, _theta(cfg), cfg.sigma_obs, T=cfg.days, seed=cfg.seed,
                                       init_cases=cfg.init_cases, observable=cfg.observable,
                                       h=cfg.h)
    path = _out(cfg, "synthetic.csv")
    dataio.write_case_csv(series, path)
    return f"synth: {len(series)} days, max {dataio.fmt(series.cases.max())} -> {path}"


def cmd_fit(cfg, args):
    from .diagnostics import summarize
    from .inference import MCMCConfig, run_mh
    data = dataio.load_case_csv(args.data)
    p = cfg.model_params()
    mc = MCMCConfig(chains=cfg.chains, iters=cfg.iters, warmup=cfg.warmup, seed=cfg.seed,
                    observable=cfg.observable, simplified=_simplified(cfg), h=cfg.h,
                    workers=cfg.workers)
    chains = run_mh(data, cfg.priors(), p, mc, init=_fit_init(cfg, p))
    summary = summarize(chains, cfg.priors())
    dataio.write_posterior_csv(chains, _out(cfg, "posterior.csv"))
    dataio.write_summary_csv(summary, _out(cfg, "summary.csv"))
    lo, hi = summary.r_hat_range
    return (f"fit: {chains.n_chains} chains x {chains.n_draws} draws, R-hat "
            f"[{lo:.4f}, {hi:.4f}], acceptance {np.mean(chains.accept_rate):.3f} -> {cfg.out}")


def _simplified(cfg):
    if cfg.likelihood not in ("gaussian", "simplified"):
        raise UsageError(f"likelihood must be gaussian or simplified, got {cfg.likelihood!r}")
    return cfg.likelihood == "simplified"


def _draws_path(cfg, args):
    return Path(args.draws) if args.draws else Path(cfg.out) / "posterior.csv"


def cmd_summarize(cfg, args):
    from .diagnostics import summarize
    chains = dataio.load_posterior_csv(_draws_path(cfg, args))
    summary = summarize(chains, cfg.priors())
    path = _out(cfg, "summary.csv")
    dataio.write_summary_csv(summary, path)
    lo, hi = summary.r_hat_range
    return f"summarize: {len(summary.rows)} parameters, R-hat [{lo:.4f}, {hi:.4f}] -> {path}"


def cmd_ppc(cfg, args):
    from .diagnostics import posterior_predictive
    from .plotting import emit_plot
    data = dataio.load_case_csv(args.data)
    chains = dataio.load_posterior_csv(_draws_path(cfg, args))
    p = cfg.model_params()
    bands = posterior_predictive(chains, p, data, draws=args.ppc_draws, seed=cfg.seed,
                                 observable=cfg.observable, init=_fit_init(cfg, p), h=cfg.h)
    dataio.write_bands_csv(bands, data.cases, _out(cfg, "ppc.csv"))
    emit_plot("band", {"x": bands.days, "mean": bands.mean, "lower": bands.lower,
                       "upper": bands.upper, "observed": data.cases},
              _out(cfg, "ppc.svg"), title="Posterior predictive check")
    return f"ppc: 95% band covers {bands.coverage(data.cases):.3f} of observations -> {cfg.out}"


def cmd_ctmc(cfg, args):
    from .stochastic import path_rng, simulate_path
    p = cfg.model_params(ctmc=True)
    res = simulate_path(p, t0=cfg.t0, ol=cfg.ol, t_max=cfg.resolved_t_max(),
                        rng=path_rng(cfg.seed, 0), record=True)
    path = _out(cfg, "ctmc_path.csv")
    lines = ["t,S,E,I,R"] + [",".join([dataio.fmt(r[0]), *(str(int(v)) for v in r[1:])])
                             for r in res.log]
    dataio._write(path, lines)
    return f"ctmc: {res.outcome} at t={dataio.fmt(res.t_end)} after {res.events} events -> {path}"


def cmd_outbreak(cfg, args):
    from .stochastic import outbreak_probability
    p = cfg.model_params(ctmc=True)
    ens = outbreak_probability(p, t0=cfg.t0, ol=cfg.ol, t_max=cfg.resolved_t_max(), n=cfg.n,
                               seed=cfg.seed, workers=cfg.workers)
    dataio._write(_out(cfg, "outbreak.csv"), [
        "n,n_extinct,n_outbreak,n_censored,p_outbreak,std_error",
        f"{ens.n},{ens.n_ext},{ens.n_outbreak},{ens.n_censored},"
        f"{dataio.fmt(ens.p_outbreak)},{dataio.fmt(ens.std_error)}"])
    if not args.no_path_log:
        dataio.write_path_log(ens.outcomes, _out(cfg, "paths.csv"))
    return (f"outbreak: P_outbreak = {ens.p_outbreak:.4f} +/- {ens.std_error:.4f} "
            f"(n={ens.n}, censored {ens.n_censored})")


def cmd_r0(cfg, args):
    from .model import mean_transmission_rate
    from .reproduction import basic_r0
    p = cfg.model_params()
    bb = args.beta_bar if args.beta_bar is not None else mean_transmission_rate(p)
    return f"r0: R0 = {basic_r0(bb, p.delta, p.gamma, p.mu):.4f} (beta_bar = {bb:.6g})"


def cmd_r0_seasonal(cfg, args):
    from .reproduction import seasonal_r0
    res = seasonal_r0(cfg.model_params())
    return (f"r0-seasonal: R0_seasonal = {res.r0:.4f} (rho = {res.rho:.8f}, "
            f"{res.iterations} bisection steps)")


def _axes(cfg):
    from .grid import parse_axis
    n1, n2 = cfg.grid_shape()
    return parse_axis(cfg.x_axis, n1), parse_axis(cfg.y_axis, n2)


def _write_heatmap(cfg, stem, a1, a2, z, zlabel):
    from .plotting import emit_plot
    dataio.write_grid_csv(a1, a2, z, _out(cfg, stem + ".csv"))
    emit_plot("heatmap", {"z": z, "y": a1[1], "x": a2[1], "ylabel": a1[0], "xlabel": a2[0],
                          "zlabel": zlabel}, _out(cfg, stem + ".svg"), title=zlabel)


def cmd_heatmap_r0(cfg, args):
    from .reproduction import r0_heatmap
    a1, a2 = _axes(cfg)
    z = r0_heatmap(cfg.model_params(), a1, a2, workers=cfg.workers)
    _write_heatmap(cfg, "heatmap_r0", a1, a2, z, "seasonal R0")
    return f"heatmap-r0: {z.shape[0]}x{z.shape[1]}, R0_seasonal in [{z.min():.4f}, {z.max():.4f}] -> {cfg.out}"


def cmd_heatmap_outbreak(cfg, args):
    from .stochastic import outbreak_probability_grid
    a1, a2 = _axes(cfg)
    z = outbreak_probability_grid(cfg.model_params(ctmc=True), a1, a2, n=cfg.grid_n, ol=cfg.ol,
                                  t0=cfg.t0, t_max=cfg.resolved_t_max(), seed=cfg.seed,
                                  workers=cfg.workers)
    _write_heatmap(cfg, "heatmap_outbreak", a1, a2, z, "P_outbreak")
    return f"heatmap-outbreak: {z.shape[0]}x{z.shape[1]}, P_outbreak in [{z.min():.4f}, {z.max():.4f}] -> {cfg.out}"


def _read_columns(path):
    import csv
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise DataFormatError(f"{path}: no data rows")
    body = np.array(rows[1:], dtype=float)
    return {name: body[:, k] for k, name in enumerate(rows[0])}


def cmd_plot(cfg, args):
    from .model import transmission_rate
    from .plotting import emit_plot
    out = Path(args.output) if args.output else _out(cfg, f"{args.kind}.svg")
    if args.kind != "beta" and not args.input:
        raise UsageError(f"plot --kind {args.kind} needs --input")
    if args.kind == "beta":
        p = cfg.model_params()
        t = np.linspace(0.0, p.omega, 366)
        data = {"x": t, "series": {"beta(t)": transmission_rate(p, t)},
                "xlabel": "day of year", "ylabel": "beta(t), 1/day"}
        if args.rainfall:
            rain = dataio.load_rainfall_csv(args.rainfall)
            width = p.omega / 12.0
            data["bars"] = {"x": (rain.months - 0.5) * width, "values": rain.mm,
                            "width": width, "label": "rainfall, mm"}
        emit_plot("timeseries", data, out, title="Seasonal transmission rate")
    elif args.kind == "trajectory":
        cols = _read_columns(args.input)
        emit_plot("timeseries", {"x": cols["t"], "series": {k: cols[k] for k in "SEIR"},
                                 "xlabel": "day", "ylabel": "persons"}, out, title="SEIR trajectory")
    elif args.kind == "band":
        cols = _read_columns(args.input)
        emit_plot("band", {"x": cols["day"], "mean": cols["mean"], "lower": cols["lower"],
                           "upper": cols["upper"], "observed": cols["observed"]},
                  out, title="Posterior predictive check")
    else:
        (n1, v1), (n2, v2), z = dataio.load_grid_csv(args.input)
        emit_plot("heatmap", {"z": z, "y": v1, "x": v2, "ylabel": n1, "xlabel": n2},
                  out, title=Path(args.input).stem)
    return f"plot: {args.kind} -> {out}"


def cmd_table3(cfg, args):
    from .tables import COLUMNS, reproduce_table3
    rows = reproduce_table3(cfg.model_params(), n=cfg.n, ol=cfg.ol, t0=cfg.t0,
                            t_max=cfg.resolved_t_max(), seed=cfg.seed, ctmc_pop=cfg.ctmc_pop,
                            workers=cfg.workers, stochastic=not args.deterministic_only)
    header = ["sigma", "beta_np", "beta_p"]
    for c in COLUMNS:
        header += [c, c + "_ref", c + "_delta"]
    header += ["censored_fraction"]
    lines = [",".join(header)]
    for r in rows:
        vals = [r.reference.sigma, r.reference.beta_np, r.reference.beta_p]
        for c in COLUMNS:
            vals += [getattr(r.computed, c), getattr(r.reference, c), r.delta(c)]
        vals.append(r.censored_fraction)
        lines.append(",".join(dataio.fmt(v) for v in vals))
    path = _out(cfg, "table3.csv")
    dataio._write(path, lines)
    worst = {c: max(r.delta(c) for r in rows) for c in COLUMNS}
    shown = ", ".join(f"{c} {v:.4f}" for c, v in worst.items() if not math.isnan(v))
    return f"table3: max |delta| {shown} -> {path}"


HANDLERS = {
    "simulate": cmd_simulate, "synth": cmd_synth, "fit": cmd_fit, "summarize": cmd_summarize,
    "ppc": cmd_ppc, "ctmc": cmd_ctmc, "outbreak": cmd_outbreak, "r0": cmd_r0,
    "r0-seasonal": cmd_r0_seasonal, "heatmap-r0": cmd_heatmap_r0,
    "heatmap-outbreak": cmd_heatmap_outbreak, "plot": cmd_plot, "table3": cmd_table3,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        line = HANDLERS[args.command](cfg, args)
    except (UsageError, ConfigError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, IntegrationError, DataFormatError, ValueError, RuntimeError,
            OSError) as exc:
        print(f"{parser.prog} {args.command}: {exc}", file=sys.stderr)
        return 1
    print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
