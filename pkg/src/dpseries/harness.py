"""Repeated-release experiments, MAE reporting and parameter sweeps."""

from __future__ import annotations

import csv
import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .core import PathLike, as_array, derive_seed
from .dataio import SynthConfig, generate_synth
from .errors import AlphaBelowSamplingRate, InvalidParams, LengthMismatch
from .filters import FilterStats, gaussian_kernel
from .mechanisms import (
    DEFAULT_DFT_K,
    KINDS,
    Calibration,
    MechanismConfig,
    NoiseSource,
    resolve,
    run_with_redraw,
)
from .accounting import PrivacyGuarantee
from .sensitivity import chernoff_delta

DEFAULT_F_LIST = (1, 1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32, 1 / 64)


def mae(reference, output) -> float:
    ref, out = as_array(reference), as_array(output)
    if len(ref) != len(out):
        raise LengthMismatch(f"reference length {len(ref)} != output length {len(out)}")
    return math.fsum(np.abs(ref - out)) / len(ref)


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    maes: tuple
    mean_mae: float
    std_mae: float
    config: MechanismConfig
    calibration: Calibration
    master_seed: int
    redraws: int = 0

    @property
    def guarantee(self) -> PrivacyGuarantee:
        return self.calibration.guarantee

    def __eq__(self, other):
        if not isinstance(other, ExperimentResult):
            return NotImplemented
        return (self.maes == other.maes and self.mean_mae == other.mean_mae
                and self.std_mae == other.std_mae and self.config == other.config
                and self.master_seed == other.master_seed and self.redraws == other.redraws)

    __hash__ = None


def _mean_std(values):
    n = len(values)
    mean = math.fsum(values) / n
    # population std; fsum keeps the result independent of summation order
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / n)
    return mean, std


def run_experiment(
    x, reference, cfg: MechanismConfig, repeats: int, master_seed: int,
    workers: int = 1, noise: Optional[NoiseSource] = None,
) -> ExperimentResult:
    """Run ``repeats`` independent releases and collect their MAE against
    ``reference``. Repeat ``r`` uses a seed derived from ``(master_seed, r)``,
    so the result does not depend on ``workers``."""
    if repeats < 1:
        raise InvalidParams("repeats must be at least 1")
    cal = resolve(cfg)
    seeds = [derive_seed(master_seed, "repeat", r) for r in range(repeats)]

    def one(seed):
        rel = run_with_redraw(x, cfg, cal, seed=seed, noise=noise)
        return mae(reference, rel.signal), rel.redraws

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(one, seeds))
    else:
        out = [one(s) for s in seeds]
    maes = tuple(m for m, _ in out)
    mean, std = _mean_std(maes)
    return ExperimentResult(maes, mean, std, cfg, cal, master_seed, sum(r for _, r in out))


# -- frequency sweep --------------------------------------------------------


def schedule_scale(f: float, log_base: float = 2.0) -> float:
    """``1 - log(f) / 4``; grows as the signal is sampled more coarsely."""
    log_f = math.log(f) if log_base == math.e else math.log(f, log_base)
    return 1.0 - log_f / 4.0


def p_schedule(f: float, log_base: float = 2.0, p0: float = 0.1) -> float:
    return p0 * schedule_scale(f, log_base)


def sigma_g_schedule(f: float, log_base: float = 2.0, sigma_g0: float = 10.0) -> float:
    return sigma_g0 / schedule_scale(f, log_base)


@dataclass(frozen=True)
class SweepRow:
    mechanism: str
    f: float
    noisy: bool
    p: Optional[float]
    sigma_g: Optional[float]
    alpha: Optional[float]
    I: int
    I_prime: Optional[int]
    delta_prime: Optional[float]
    sigma: float
    epsilon_total: float
    delta_total: float
    mean_mae: float
    std_mae: float
    repeats: int
    seed: int
    log_base: float


SWEEP_COLUMNS = [f.name for f in dataclasses.fields(SweepRow)]


def mechanism_config(kind: str, T: int, *, epsilon: float, delta: float, I: int,
                     p: Optional[float] = None, sigma_g: Optional[float] = None,
                     k: int = DEFAULT_DFT_K, seed: int = 0) -> MechanismConfig:
    """Config for ``kind`` with the multiplier left to the budget solver."""
    if kind == "gaussian":
        return MechanismConfig(kind, epsilon, delta, I, seed=seed)
    if kind == "dft":
        return MechanismConfig(kind, epsilon, delta, I, k=min(k, T), seed=seed)
    if kind == "subsample":
        return MechanismConfig(kind, epsilon, delta, I, p=p, seed=seed)
    if kind == "filter-subsample":
        return MechanismConfig(kind, epsilon, delta, I, p=p,
                               kernel=gaussian_kernel(T, sigma_g), seed=seed)
    raise InvalidParams(f"unknown mechanism {kind!r}")


def sweep_frequency(
    synth: SynthConfig,
    mechanisms: Sequence[str] = KINDS,
    f_list: Sequence[float] = DEFAULT_F_LIST,
    repeats: int = 100,
    master_seed: int = 0,
    *,
    epsilon: float = 0.5,
    delta: float = 1e-4,
    noisy: Sequence[bool] = (False, True),
    k: int = DEFAULT_DFT_K,
    log_base: float = 2.0,
    p0: float = 0.1,
    sigma_g0: float = 10.0,
    workers: int = 1,
) -> list:
    """One row per (noisy, f, mechanism). The noiseless and noisy inputs
    are both scored against the noiseless signal."""
    rows = []
    for fi, f in enumerate(f_list):
        clean, observed = generate_synth(replace(synth, f=f))
        T = clean.T
        p = p_schedule(f, log_base, p0)
        sg = sigma_g_schedule(f, log_base, sigma_g0)
        for flag in noisy:
            x = observed if flag else clean
            for mi, kind in enumerate(mechanisms):
                cfg = mechanism_config(kind, T, epsilon=epsilon, delta=delta, I=synth.I,
                                       p=p, sigma_g=sg, k=k)
                cell_seed = derive_seed(master_seed, "cell", fi, KINDS.index(kind), int(flag))
                res = run_experiment(x, clean, cfg, repeats, cell_seed, workers=workers)
                cal = res.calibration
                rows.append(SweepRow(
                    mechanism=kind, f=f, noisy=bool(flag),
                    p=p if kind in ("subsample", "filter-subsample") else None,
                    sigma_g=sg if kind == "filter-subsample" else None,
                    alpha=cal.alpha, I=synth.I, I_prime=cal.I_prime,
                    delta_prime=cal.delta_prime, sigma=cal.sigma,
                    epsilon_total=cal.guarantee.epsilon_total,
                    delta_total=cal.guarantee.delta_total,
                    mean_mae=res.mean_mae, std_mae=res.std_mae, repeats=repeats,
                    seed=cell_seed, log_base=log_base,
                ))
    return rows


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def write_rows(path: PathLike, rows: Sequence, columns: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            d = dataclasses.asdict(row) if dataclasses.is_dataclass(row) else row
            writer.writerow([_cell(d[c]) for c in columns])


# -- alpha sweep ------------------------------------------------------------


@dataclass(frozen=True)
class AlphaRow:
    p: float
    alpha: float
    delta_prime: Optional[float]


ALPHA_COLUMNS = ["p", "alpha", "delta_prime"]


def sweep_alpha(stats: FilterStats, p_list: Sequence[float], alpha_grid: Sequence[float]) -> list:
    """Chernoff ``delta'`` over a grid; points with ``alpha^2 < p`` are null."""
    rows = []
    for p in p_list:
        for a in alpha_grid:
            try:
                dp = chernoff_delta(stats, p, a)
            except AlphaBelowSamplingRate:
                dp = None
            rows.append(AlphaRow(p, float(a), dp))
    return rows


# -- plot data --------------------------------------------------------------


def example_traces(synth: SynthConfig, master_seed: int, *, f: float = 1.0, noisy: bool = True,
                   epsilon: float = 0.5, delta: float = 1e-4, k: int = DEFAULT_DFT_K,
                   log_base: float = 2.0) -> dict:
    """One output per mechanism on a single Synth series, for trace plots."""
    clean, observed = generate_synth(replace(synth, f=f))
    x = observed if noisy else clean
    T = clean.T
    cols = {"t": np.arange(T), "clean": clean.values, "input": x.values}
    for kind in KINDS:
        cfg = mechanism_config(kind, T, epsilon=epsilon, delta=delta, I=synth.I,
                               p=p_schedule(f, log_base), sigma_g=sigma_g_schedule(f, log_base), k=k)
        seed = derive_seed(master_seed, "cell", 0, KINDS.index(kind), int(noisy))
        cols[kind] = run_with_redraw(x, cfg, resolve(cfg), seed=seed).signal.values
    return cols


def _write_columns(path, cols: dict):
    names = list(cols)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(len(cols[names[0]])):
            writer.writerow([_cell(cols[n][i].item()) for n in names])


def emit_plot_data(outdir: PathLike, *, sweep_rows: Optional[Sequence[SweepRow]] = None,
                   synth: Optional[SynthConfig] = None, master_seed: int = 0,
                   alpha_rows: Optional[Sequence[AlphaRow]] = None) -> list:
    """Write per-figure CSVs into ``outdir`` and return their paths."""
    os.makedirs(outdir, exist_ok=True)
    written = []
    cols = ["mechanism", "f", "mean_mae", "std_mae"]
    if sweep_rows:
        for flag, name in ((False, "fig3a_noiseless.csv"), (True, "fig3b_noisy.csv")):
            sel = [r for r in sweep_rows if r.noisy == flag]
            if sel:
                path = os.path.join(outdir, name)
                write_rows(path, sel, cols)
                written.append(path)
    if synth is not None:
        for flag, name in ((True, "fig2_traces_noisy.csv"), (False, "fig_traces_noiseless.csv")):
            path = os.path.join(outdir, name)
            _write_columns(path, example_traces(synth, master_seed, noisy=flag))
            written.append(path)
    if alpha_rows:
        path = os.path.join(outdir, "alpha_vs_delta_prime.csv")
        write_rows(path, alpha_rows, ALPHA_COLUMNS)
        written.append(path)
    return written
