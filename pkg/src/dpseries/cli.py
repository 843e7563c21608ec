"""Command-line interface: ``dpseries run|sensitivity|sweep|synth|ingest|kernel``."""

from __future__ import annotations

import json
import logging
import math
import os
import sys
from dataclasses import asdict, replace
from datetime import datetime, timezone

import click
import numpy as np

from .core import CountSeries, read_series_values, validate_series, write_series
from .dataio import CheckInLayout, SynthConfig, generate_synth, ingest_checkins, ingest_series, parse_timestamp
from .errors import DPSeriesError
from .filters import filter_stats, gaussian_kernel, identity_kernel, write_kernel
from .harness import (
    ALPHA_COLUMNS,
    DEFAULT_F_LIST,
    SWEEP_COLUMNS,
    emit_plot_data,
    sweep_alpha,
    sweep_frequency,
    write_rows,
)
from .mechanisms import DEFAULT_DFT_K, KINDS, MechanismConfig, release_with_redraw
from .sensitivity import bounds_table


def _fail(exc):
    raise click.ClickException(str(exc))


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose):
    """Differentially private release of count time-series."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--mechanism", type=click.Choice(KINDS), required=True)
@click.option("--epsilon", type=float, default=0.5, show_default=True)
@click.option("--delta", type=float, default=1e-4, show_default=True)
@click.option("--I", "I", type=int, required=True, help="participation limit")
@click.option("--p", type=float, default=None, help="subsampling rate")
@click.option("--sigma-g", type=float, default=None, help="Gaussian kernel width (filter-subsample)")
@click.option("--alpha", type=float, default=None)
@click.option("--I-prime", "I_prime", type=int, default=None)
@click.option("--delta-prime", type=float, default=None, help="target failure probability")
@click.option("--k", type=int, default=None, help=f"DFT coefficients kept (default {DEFAULT_DFT_K})")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--output", "output_path", type=click.Path(dir_okay=False), required=True)
def run(mechanism, epsilon, delta, I, p, sigma_g, alpha, I_prime, delta_prime, k, seed,
        input_path, output_path):
    """Release a sanitized copy of a ``t,value`` series.

    Writes the output CSV and a JSON sidecar next to it with the certified
    guarantee and every resolved parameter.
    """
    try:
        x = CountSeries(read_series_values(input_path))
        validate_series(x)
        kernel = None
        if mechanism == "filter-subsample":
            kernel = gaussian_kernel(x.T, sigma_g) if sigma_g is not None else identity_kernel(x.T)
        cfg = MechanismConfig(mechanism, epsilon, delta, I, p=p, kernel=kernel, alpha=alpha,
                              I_prime=I_prime, delta_prime=delta_prime, k=k, seed=seed)
        rel = release_with_redraw(x, cfg)
    except DPSeriesError as exc:
        _fail(exc)
    write_series(output_path, rel.signal)
    sidecar = {
        "config": dict(cfg.to_dict(), sigma_g=sigma_g),
        "resolved": rel.calibration.to_dict(),
        "guarantee": rel.guarantee.to_dict(),
        "seed_used": rel.seed,
        "redraws": rel.redraws,
        "kept": None if rel.draw is None else len(rel.draw),
        "T": x.T,
    }
    with open(os.path.splitext(output_path)[0] + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2)
    click.echo(f"wrote {output_path} (epsilon={rel.guarantee.epsilon_total:g}, "
               f"delta={rel.guarantee.delta_total:.6g}, sigma={rel.calibration.sigma:.6g})")


@main.command()
@click.option("--I", "I", type=int, required=True)
@click.option("--p", type=float, required=True)
@click.option("--delta-prime", type=float, default=1e-5, show_default=True)
@click.option("--T", "T", type=int, default=None, help="series length for the filter route")
@click.option("--sigma-g", type=float, default=None)
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]), default="text")
def sensitivity(I, p, delta_prime, T, sigma_g, fmt):
    """Tabulate (method, Delta_2, delta') bounds at a target delta'."""
    try:
        stats = None
        if sigma_g is not None:
            if T is None:
                raise click.UsageError("--sigma-g needs --T")
            stats = filter_stats(gaussian_kernel(T, sigma_g))
        rows = bounds_table(I, p, delta_prime, stats)
    except DPSeriesError as exc:
        _fail(exc)
    if fmt == "csv":
        click.echo("method,delta2,delta_prime")
        for r in rows:
            click.echo(f"{r.method},{r.delta2!r},{r.delta_prime!r}")
    else:
        click.echo(f"{'method':<16}{'delta2':>14}{'delta_prime':>16}")
        for r in rows:
            click.echo(f"{r.method:<16}{r.delta2:>14.6f}{r.delta_prime:>16.6g}")


SWEEP_DEFAULTS = {
    "synth": {},
    "mechanisms": list(KINDS),
    "f_list": list(DEFAULT_F_LIST),
    "repeats": 100,
    "master_seed": 0,
    "epsilon": 0.5,
    "delta": 1e-4,
    "noisy": [False, True],
    "k": DEFAULT_DFT_K,
    "log_base": 2,
    "workers": 1,
    "T": 10000,
    "sigma_g": 10.0,
    "p_list": [0.05, 0.1, 0.2],
    "alpha_grid": {"start": 0.01, "stop": 1.0, "num": 100},
}


def _alpha_grid(spec):
    if isinstance(spec, dict):
        return np.linspace(spec["start"], spec["stop"], spec["num"]).tolist()
    return list(spec)


@main.command()
@click.option("--kind", type=click.Choice(["frequency", "alpha"]), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--alpha-grid", "alpha_grid", type=str, default=None,
              help="start:stop:num override for --kind alpha")
@click.option("--emit-plot-data", "plot_dir", type=click.Path(file_okay=False), default=None)
def sweep(kind, config_path, out_path, alpha_grid, plot_dir):
    """Frequency sweep over Synth, or alpha sweep of delta'."""
    cfg = dict(SWEEP_DEFAULTS)
    if config_path:
        with open(config_path) as fh:
            cfg.update(json.load(fh))
    log_base = math.e if cfg["log_base"] in ("e", "natural") else float(cfg["log_base"])
    try:
        if kind == "frequency":
            synth = SynthConfig(**cfg["synth"])
            rows = sweep_frequency(
                synth, cfg["mechanisms"], cfg["f_list"], cfg["repeats"], cfg["master_seed"],
                epsilon=cfg["epsilon"], delta=cfg["delta"], noisy=cfg["noisy"], k=cfg["k"],
                log_base=log_base, workers=cfg["workers"],
            )
            write_rows(out_path, rows, SWEEP_COLUMNS)
            if plot_dir:
                for path in emit_plot_data(plot_dir, sweep_rows=rows, synth=synth,
                                           master_seed=cfg["master_seed"]):
                    click.echo(f"wrote {path}")
        else:
            if alpha_grid:
                start, stop, num = alpha_grid.split(":")
                grid = np.linspace(float(start), float(stop), int(num)).tolist()
            else:
                grid = _alpha_grid(cfg["alpha_grid"])
            stats = filter_stats(gaussian_kernel(cfg["T"], cfg["sigma_g"]))
            rows = sweep_alpha(stats, cfg["p_list"], grid)
            write_rows(out_path, rows, ALPHA_COLUMNS)
            if plot_dir:
                for path in emit_plot_data(plot_dir, alpha_rows=rows):
                    click.echo(f"wrote {path}")
    except DPSeriesError as exc:
        _fail(exc)
    click.echo(f"wrote {out_path} ({len(rows)} rows)")


@main.command()
@click.option("--f", type=float, default=1.0, show_default=True)
@click.option("--d", type=float, default=100.0, show_default=True)
@click.option("--omega", type=float, default=None)
@click.option("--T-base", "T_base", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--out-noisy", "noisy_path", type=click.Path(dir_okay=False), default=None)
def synth(f, d, omega, T_base, seed, out_path, noisy_path):
    """Generate the synthetic sine-plus-trend series."""
    kwargs = {"f": f, "d": d, "T_base": T_base, "seed": seed}
    if omega is not None:
        kwargs["omega"] = omega
    try:
        clean, noisy = generate_synth(SynthConfig(**kwargs))
    except DPSeriesError as exc:
        _fail(exc)
    write_series(out_path, clean)
    if noisy_path:
        write_series(noisy_path, noisy)
    click.echo(f"wrote {clean.T} steps")


def _when(text):
    try:
        return parse_timestamp(text)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None


@main.command()
@click.option("--format", "fmt", type=click.Choice(["checkins", "series"]), required=True)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--venue", type=str, default=None)
@click.option("--bin-hours", type=float, default=24.0, show_default=True)
@click.option("--from", "t_from", type=str, default=None, help="window start (ISO-8601 or epoch)")
@click.option("--to", "t_to", type=str, default=None, help="window end, exclusive")
@click.option("--layout", type=click.Choice(["gowalla", "foursquare"]), default="gowalla")
@click.option("--no-dedup", is_flag=True, help="count every check-in, not distinct users per bin")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None)
def ingest(fmt, input_path, venue, bin_hours, t_from, t_to, layout, no_dedup, out_path, report_path):
    """Aggregate check-ins for one venue, or validate a count series."""
    try:
        if fmt == "series":
            series = ingest_series(input_path)
            report = {"T": series.T}
        else:
            if venue is None or t_from is None or t_to is None:
                raise click.UsageError("checkins format needs --venue, --from and --to")
            lay = CheckInLayout.foursquare() if layout == "foursquare" else CheckInLayout()
            agg = ingest_checkins(input_path, venue, bin_hours * 3600.0, _when(t_from), _when(t_to),
                                  dedup=not no_dedup, layout=lay)
            series = agg.series
            report = dict(agg.report(), venue=venue)
    except DPSeriesError as exc:
        _fail(exc)
    write_series(out_path, series)
    if report_path:
        with open(report_path, "w") as fh:
            json.dump(report, fh, indent=2)
    click.echo(json.dumps(report))


@main.command()
@click.option("--T", "T", type=int, required=True)
@click.option("--sigma-g", type=float, required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def kernel(T, sigma_g, out_path):
    """Print the Gaussian kernel's spectral stats; optionally export ``k,h_k``."""
    try:
        ker = gaussian_kernel(T, sigma_g)
    except DPSeriesError as exc:
        _fail(exc)
    stats = filter_stats(ker)
    if out_path:
        write_kernel(out_path, ker)
    click.echo(json.dumps(asdict(stats)))


if __name__ == "__main__":
    main()
