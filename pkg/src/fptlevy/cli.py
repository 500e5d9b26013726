"""Command line entry points.

Exit codes: 0 on success, 1 for I/O failures, 2 for usage errors
(including invalid parameter values), 3 when a computation refuses to
produce a result it cannot stand behind.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import os
import sys
import time

import click
import numpy as np

from . import kernel as kernel_mod
from .config import RunConfig, load_config, set_config
from .errors import FptError
from .ioutil import atomic_write_text, read_csv_columns, write_csv
from .iteration import (
    SpaceTimeGrid,
    build_kernel_table,
    iterate,
    write_marginals_csv,
)
from .models import lsbm_to_json
from .oracles import (
    FdConfig,
    fd_first_passage,
    mc_first_passage,
    write_fd_csv,
    write_mc_csv,
)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FptError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except ValueError as exc:
            raise click.UsageError(str(exc)) from exc
    return wrapper


def _config_options(fn):
    fn = click.option("--set", "set_name", type=click.Choice(["I", "II"]),
                      default="I", show_default=True,
                      help="Built-in parameter set.")(fn)
    fn = click.option("--config", "config_path", default=None, metavar="PATH",
                      help="JSON run configuration; overrides --set.")(fn)
    return fn


def _out_option(fn):
    return click.option("--out", "out_dir", default=".", show_default=True,
                        metavar="DIR", help="Output directory.")(fn)


def _resolve(config_path, set_name, n_iter=None, seed=None) -> RunConfig:
    cfg = load_config(config_path) if config_path else set_config(set_name)
    if n_iter is not None:
        cfg = dataclasses.replace(
            cfg, iteration=dataclasses.replace(cfg.iteration, n_iter=n_iter))
    if seed is not None:
        cfg = dataclasses.replace(
            cfg, mc=dataclasses.replace(cfg.mc, seed=seed))
    return cfg


def _ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def _solve(cfg: RunConfig):
    grid = SpaceTimeGrid.build(cfg.T, cfg.grid.n_t, cfg.grid.X, cfg.grid.n_x,
                               law=cfg.grid.law, anchor=cfg.x0)
    t0 = time.perf_counter()
    table = build_kernel_table(cfg.model, grid, cfg.quadrature)
    t1 = time.perf_counter()
    series = iterate(table, grid, grid.x0_index(cfg.x0),
                     cfg.iteration.n_iter, cfg.iteration.tol)
    t2 = time.perf_counter()
    timings = {
        "precompute_s": t1 - t0,
        "per_iteration_s": (t2 - t1) / max(len(series.marginals), 1),
    }
    return grid, table, series, timings


@click.group()
@click.version_option(package_name="fptlevy")
def main():
    """First-passage densities of subordinated Brownian motion."""


# x1 is negative in normal use; let bare "-0.5" reach the argument parser
@main.command("kernel", context_settings={"ignore_unknown_options": True})
@click.argument("x0", type=float)
@click.argument("s", type=float)
@click.argument("x1", type=float)
@click.option("--route", type=click.Choice(kernel_mod.ROUTES),
              default="auto", show_default=True)
@_config_options
@_guarded
def kernel_cmd(x0, s, x1, route, config_path, set_name):
    """Evaluate the one-pass kernel p1(X0, S, X1) at a single point.

    Prints the value, a refinement delta (the change when the panel budget
    doubles) and the elapsed time.
    """
    cfg = _resolve(config_path, set_name)
    t0 = time.perf_counter()
    value = kernel_mod.p1(cfg.model, x0, s, x1, cfg.quadrature, route=route)
    elapsed = time.perf_counter() - t0
    fine = dataclasses.replace(cfg.quadrature,
                               n_points=2 * cfg.quadrature.n_points)
    refined = kernel_mod.p1(cfg.model, x0, s, x1, fine, route=route)
    click.echo(f"p1(x0={x0}, s={s}, x1={x1}) = {value!r}")
    click.echo(f"refinement delta = {refined - value:.3e}")
    click.echo(f"elapsed = {elapsed * 1e3:.1f} ms")


@main.command("solve")
@_config_options
@_out_option
@click.option("--n-iter", type=int, default=None,
              help="Override the number of iterates.")
@click.option("--no-plot", is_flag=True, help="Skip figure rendering.")
@_guarded
def solve_cmd(config_path, set_name, out_dir, n_iter, no_plot):
    """Build the kernel table, iterate, and write the report files.

    Writes p_star_iterates.csv, l1_convergence.csv and summary.json to the
    output directory, plus iterates.png unless --no-plot is given.
    """
    cfg = _resolve(config_path, set_name, n_iter=n_iter)
    _ensure_dir(out_dir)
    grid, table, series, timings = _solve(cfg)

    write_marginals_csv(series, grid, os.path.join(out_dir, "p_star_iterates.csv"))
    write_csv(os.path.join(out_dir, "l1_convergence.csv"),
              ["iterate", "l1_step"],
              [(i + 2, v) for i, v in enumerate(series.l1_steps)])
    summary = {
        "schema_version": 1,
        "model": lsbm_to_json(cfg.model),
        "x0": cfg.x0,
        "T": cfg.T,
        "n_t": grid.n_t,
        "n_x": grid.n_x,
        "n_iter": len(series.marginals),
        "c_hat": series.c_hat,
        "l1_steps": series.l1_steps,
        "stopped": series.stopped,
        "absorbed_mass": float(grid.dt * series.marginals[-1].sum()),
        "timings": timings,
    }
    atomic_write_text(os.path.join(out_dir, "summary.json"),
                      json.dumps(summary, indent=2) + "\n")
    if not no_plot:
        from .plots import plot_iterates, plot_l1

        plot_iterates(grid.t_mid, series.marginals,
                      os.path.join(out_dir, "iterates.png"))
        if series.l1_steps:
            plot_l1(series.l1_steps, os.path.join(out_dir, "l1_convergence.png"))
    click.echo(f"c_hat = {series.c_hat:.4f}")
    for i, v in enumerate(series.l1_steps):
        click.echo(f"l1 step {i + 1}->{i + 2}: {v:.6e}")
    click.echo(f"stopped by {series.stopped} after {len(series.marginals)} iterates")
    click.echo(f"precompute {timings['precompute_s']:.3f} s, "
               f"per iteration {timings['per_iteration_s']:.3f} s")


@main.command("oracle")
@click.option("--which", type=click.Choice(["fd", "mc"]), required=True)
@_config_options
@_out_option
@click.option("--seed", type=int, default=None, help="Override the MC seed.")
@click.option("--no-plot", is_flag=True, help="Skip figure rendering.")
@_guarded
def oracle_cmd(which, config_path, set_name, out_dir, seed, no_plot):
    """Compute an independent reference solution and write it out."""
    cfg = _resolve(config_path, set_name, seed=seed)
    _ensure_dir(out_dir)
    if which == "fd":
        res = fd_first_passage(cfg.model, cfg.x0, cfg.T, cfg.fd)
        write_fd_csv(res, os.path.join(out_dir, "fd_reference.csv"))
        if not no_plot:
            from .plots import plot_reference

            plot_reference(os.path.join(out_dir, "fd_reference.png"), fd=res)
        click.echo(f"fd reference: {res.config.n_t} x {res.config.n_x}, "
                   f"final survival {res.survival[-1]:.6f}")
    else:
        res = mc_first_passage(cfg.model, cfg.x0, cfg.mc)
        write_mc_csv(res, os.path.join(out_dir, "mc_reference.csv"))
        if not no_plot:
            from .plots import plot_reference

            plot_reference(os.path.join(out_dir, "mc_reference.png"), mc=res)
        click.echo(f"mc reference: {res.n_paths} paths, "
                   f"{res.n_crossed} crossed by t = {res.config.horizon}")


def _plateau_onset(l1: list[float]) -> int | None:
    """First 1-based iterate from which no step improves by 2x or better."""
    if len(l1) < 2 or max(l1) < 1e-15:
        return None
    ratios = [l1[j] / max(l1[j - 1], 1e-300) for j in range(1, len(l1))]
    for j in range(len(ratios)):
        if all(r > 0.5 for r in ratios[j:]):
            return j + 2
    return None


@main.command("compare")
@click.argument("solve_csv")
@click.argument("oracle_csv")
@_out_option
@click.option("--no-plot", is_flag=True, help="Skip figure rendering.")
@_guarded
def compare_cmd(solve_csv, oracle_csv, out_dir, no_plot):
    """Measure the iterates in SOLVE_CSV against the curve in ORACLE_CSV.

    SOLVE_CSV is a p_star_iterates.csv from `solve`; ORACLE_CSV is either
    an fd_reference.csv from `oracle --which fd` (every iterate is scored
    against its density) or another iterates file (columns matched by
    name).  Writes l1_vs_reference.csv with per-iterate L1 distances on
    the common grid, their log10, and a plateau flag.
    """
    solve = read_csv_columns(solve_csv)
    oracle = read_csv_columns(oracle_csv)
    for path, cols in ((solve_csv, solve), (oracle_csv, oracle)):
        if "t" not in cols:
            raise ValueError(f"{path} lacks a t column")
    t = solve["t"]
    t_ref = oracle["t"]
    if abs(t[-1] - t_ref[-1]) > 0.05 * max(t[-1], t_ref[-1]):
        raise ValueError(
            f"horizons differ: {solve_csv} ends at {t[-1]:g}, "
            f"{oracle_csv} at {t_ref[-1]:g}")
    names = sorted((k for k in solve if k.startswith("p_star_")),
                   key=lambda k: int(k.rsplit("_", 1)[1]))
    if not names:
        raise ValueError(f"{solve_csv} has no p_star_* columns")
    if "density" in oracle:
        refs = {name: np.interp(t, t_ref, oracle["density"]) for name in names}
    else:
        missing = [k for k in names if k not in oracle]
        if missing:
            raise ValueError(
                f"{oracle_csv} has neither a density column nor {missing[0]}")
        refs = {name: np.interp(t, t_ref, oracle[name]) for name in names}
    dt = float(np.mean(np.diff(t))) if len(t) > 1 else 1.0

    l1 = [dt * float(np.abs(solve[k] - refs[k]).sum()) for k in names]
    onset = _plateau_onset(l1)
    rows = [(i + 1, v, np.log10(v) if v > 0 else float("-inf"),
             int(onset is not None and i + 1 >= onset))
            for i, v in enumerate(l1)]
    _ensure_dir(out_dir)
    write_csv(os.path.join(out_dir, "l1_vs_reference.csv"),
              ["iterate", "l1", "log10_l1", "plateau"], rows)
    if not no_plot and min(l1) > 0:
        from .plots import plot_l1

        plot_l1(l1, os.path.join(out_dir, "l1_vs_reference.png"),
                ylabel="L1 distance to reference")
    for i, v in enumerate(l1):
        click.echo(f"iterate {i + 1}: L1 vs reference = {v:.6e}")
    if onset is None:
        click.echo("plateau: not reached")
    else:
        click.echo(f"plateau: from iterate {onset}")


_BENCH_METHOD_NT = (10, 25, 50, 100, 200)
_BENCH_METHOD_NX = (10, 20)
_BENCH_FD_NT = (50, 100, 200)
_BENCH_FD_NX = (1150, 2300, 3450, 4600, 5750)


@main.command("bench")
@click.option("--which", type=click.Choice(["method", "fd"]), default="method",
              show_default=True)
@_config_options
@_out_option
@_guarded
def bench_cmd(which, config_path, set_name, out_dir):
    """Time the solver or the reference across a sweep of resolutions."""
    cfg = _resolve(config_path, set_name)
    _ensure_dir(out_dir)
    rows = []
    if which == "method":
        for n_x in _BENCH_METHOD_NX:
            for n_t in _BENCH_METHOD_NT:
                run = dataclasses.replace(
                    cfg, grid=dataclasses.replace(cfg.grid, n_t=n_t, n_x=n_x))
                _, _, series, timings = _solve(run)
                rows.append((n_t, n_x, timings["precompute_s"],
                             timings["per_iteration_s"]))
                click.echo(f"n_t={n_t:4d} n_x={n_x:3d}  "
                           f"precompute {timings['precompute_s']:8.3f} s  "
                           f"per-iteration {timings['per_iteration_s']:8.4f} s")
        write_csv(os.path.join(out_dir, "bench_method.csv"),
                  ["n_t", "n_x", "precompute_s", "per_iteration_s"], rows)
    else:
        for n_x in _BENCH_FD_NX:
            for n_t in _BENCH_FD_NT:
                fd_cfg = FdConfig(n_t=n_t, n_x=n_x, X=cfg.fd.X)
                t0 = time.perf_counter()
                fd_first_passage(cfg.model, cfg.x0, cfg.T, fd_cfg)
                elapsed = time.perf_counter() - t0
                rows.append((n_t, n_x, elapsed))
                click.echo(f"n_t={n_t:4d} n_x={n_x:5d}  elapsed {elapsed:8.3f} s")
        write_csv(os.path.join(out_dir, "bench_fd.csv"),
                  ["n_t", "n_x", "elapsed_s"], rows)


if __name__ == "__main__":
    main()
