"""
Seeded Monte Carlo harness for the double-IRS link.

Every trial derives its random streams from
``(master_seed, sweep_index, trial_index)`` through numpy SeedSequence, so
a trial is reproducible on its own and all schemes of one trial see the
same channel. Cell statistics are reduced with ``math.fsum`` in trial
order, which makes the output independent of the thread count.
"""

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.exceptions import OutputWriteError, ScenarioValidationError
from app.schemas.experiment import ALL_SCHEMES, ExperimentConfig
from app.schemas.scenario import ScenarioConfig, db_to_linear, dbm_to_watts, default_scenario, linear_to_db
from app.services.baselines import (
    beamform_single_irs,
    estimate_single_irs,
    expected_gain_single,
    perfect_csi_bound,
    realize_single_irs,
    single_irs_gain,
)
from app.services.beamforming import (
    RateParams,
    achievable_rate,
    ao_optimize,
    beamform_s2,
    expected_gain_s1,
    expected_gain_s2,
    rate_from_gain,
    receive_snr,
    snr_from_gain,
)
from app.services.channel import ArrayLayout, cascaded_channel, realize_channels
from app.services.estimation import estimate_scheme1, estimate_scheme2, mse_scheme1_theory, mse_scheme2_approx
from app.services.training import observe, schedule_scheme1, schedule_scheme2

logger = logging.getLogger(__name__)

SCHEME_IDS: Dict[str, int] = {"S1": 1, "S2": 2, "single": 3, "perfect": 4}

CSV_HEADER = ["sweep_value", "scheme", "metric", "mean", "stderr", "n_valid", "n_degenerate"]

# Metric families reported by each sweep kind
SWEEP_METRICS: Dict[str, Tuple[str, ...]] = {
    "rician_nmse": ("nmse",),
    "rician_snr": ("snr", "gain"),
    "rate_vs_m": ("rate",),
    "rate_vs_power": ("rate",),
    "custom": ("nmse", "snr", "gain", "rate"),
}

PRESET_NAMES = ("fig2a", "fig2b", "fig3a", "fig3b")

RICIAN_GRID_DB = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
SUBSURFACE_GRID = [float(m) for m in range(2, 11)]
POWER_GRID_DBM = [10.0, 15.0, 20.0, 25.0, 30.0, 35.0]

SeedKey = Tuple[int, int, int]


@dataclass(frozen=True)
class TrialOutcome:
    """Per-trial quantities of one scheme; metrics are None where they do not apply."""
    scheme: str
    degenerate: bool = False
    sq_error: Optional[float] = None
    energy: Optional[float] = None
    theory_mse: Optional[float] = None
    snr: Optional[float] = None
    expected_gain: Optional[float] = None
    rates: Dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class SweepRow:
    """One aggregated (sweep value, scheme, metric) cell."""
    sweep_value: float
    scheme: str
    metric: str
    mean: float
    stderr: float
    n_valid: int
    n_degenerate: int

    @property
    def sort_key(self) -> Tuple[float, str, str]:
        return (self.sweep_value, self.scheme, self.metric)


@dataclass
class SweepResult:
    """Rows of a sweep in emit order plus the config that produced them."""
    rows: List[SweepRow]
    config: Optional[ExperimentConfig] = None
    duration_seconds: float = 0.0

    def sorted_rows(self) -> List[SweepRow]:
        return sorted(self.rows, key=lambda row: row.sort_key)

    def select(self, scheme: str, metric: str) -> List[SweepRow]:
        """Rows of one scheme and metric in sweep order."""
        return [row for row in self.sorted_rows() if row.scheme == scheme and row.metric == metric]


def trial_seed(master_seed: int, sweep_index: int, trial_index: int, scheme: Optional[str] = None) -> np.random.SeedSequence:
    """
    Seed sequence of a trial's channel stream, or of a scheme's noise stream.

    The channel stream is keyed by ``(master_seed, sweep_index, trial_index)``
    and the noise stream appends the scheme id.
    """
    key = [master_seed, sweep_index, trial_index]
    if scheme is not None:
        key.append(SCHEME_IDS[scheme])
    return np.random.SeedSequence(key)


def training_overhead(cfg: ScenarioConfig, scheme: str) -> int:
    """Pilots a scheme spends per block: M1*M2, M1+M2, M1+M2 (single IRS) or 0."""
    return cfg.training_length(scheme)


def _rates(gain: float, cfg: ScenarioConfig, scheme: str, block_lengths: Sequence[int]) -> Dict[int, float]:
    T_t = training_overhead(cfg, scheme)
    return {
        T: rate_from_gain(gain, RateParams(T=T, T_t=T_t, Gamma=cfg.Gamma, sigma_sq=cfg.noise_power_normalized))
        for T in block_lengths
    }


def run_trial(
    seed_key: SeedKey,
    cfg: ScenarioConfig,
    scheme: str,
    layout: ArrayLayout = "subsurface",
    block_lengths: Optional[Sequence[int]] = None,
) -> TrialOutcome:
    """
    One realization of a scheme's training, estimation and beamforming pipeline.

    Receive SNR and rates are evaluated against the true channel. A degenerate
    Scheme 2 or single-IRS estimate is returned as a flagged outcome.

    Args:
        seed_key: (master_seed, sweep_index, trial_index)
        cfg: Scenario of this sweep value
        scheme: One of S1, S2, single, perfect
        layout: Surface layout of the channel model
        block_lengths: Coherence lengths to report rates for (default: cfg.T)

    Returns:
        TrialOutcome: Per-trial metrics of the scheme
    """
    if scheme not in SCHEME_IDS:
        raise ScenarioValidationError(f"Unknown scheme '{scheme}'")
    block_lengths = list(block_lengths) if block_lengths else [cfg.T]
    sigma_sq = cfg.noise_power_normalized
    channel_rng = np.random.default_rng(trial_seed(*seed_key))
    noise_rng = np.random.default_rng(trial_seed(*seed_key, scheme=scheme))

    if scheme == "single":
        realization = realize_single_irs(cfg, channel_rng, layout)
        h_hat = estimate_single_irs(realization.h, sigma_sq, noise_rng)
        beam = beamform_single_irs(h_hat)
        if beam.degenerate:
            return TrialOutcome(scheme=scheme, degenerate=True)
        gain = single_irs_gain(realization.h, beam.theta)
        return TrialOutcome(
            scheme=scheme,
            sq_error=float(np.linalg.norm(h_hat - realization.h) ** 2),
            energy=float(np.linalg.norm(realization.h) ** 2),
            theory_mse=sigma_sq,
            snr=snr_from_gain(gain, sigma_sq),
            expected_gain=expected_gain_single(h_hat, beam.theta, sigma_sq),
            rates=_rates(gain, cfg, scheme, block_lengths),
        )

    H = cascaded_channel(realize_channels(cfg, channel_rng, layout), cfg.N0).H
    energy = float(np.linalg.norm(H) ** 2)

    if scheme == "perfect":
        pair = perfect_csi_bound(H)
        return TrialOutcome(
            scheme=scheme,
            energy=energy,
            snr=receive_snr(H, pair, sigma_sq),
            expected_gain=pair.objective,
            rates=_rates(pair.objective, cfg, scheme, block_lengths),
        )

    if scheme == "S1":
        sched = schedule_scheme1(cfg.M1, cfg.M2)
        obs = observe(H, sched, sigma_sq, noise_rng)
        est = estimate_scheme1(obs.as_matrix(), sched.Theta1, sched.Theta2, sigma_sq)
        pair = ao_optimize(est.H_hat)
        H_hat = est.H_hat
        theory = mse_scheme1_theory(sched.Theta1, sched.Theta2, sigma_sq)
        expected = expected_gain_s1(pair, H_hat, sigma_sq)
    else:
        sched = schedule_scheme2(cfg.M1, cfg.M2)
        obs = observe(H, sched, sigma_sq, noise_rng)
        y1, y2 = obs.sub_blocks()
        est = estimate_scheme2(y1, y2, sched.Theta1, sched.Theta2)
        if est.degenerate:
            logger.debug(f"Trial {seed_key} skipped: degenerate Scheme 2 estimate")
            return TrialOutcome(scheme=scheme, degenerate=True)
        pair = beamform_s2(est)
        H_hat = est.HL_hat
        theory = mse_scheme2_approx(est, sched.Theta1, sched.Theta2, sigma_sq)
        expected = expected_gain_s2(pair, est, sigma_sq)

    return TrialOutcome(
        scheme=scheme,
        sq_error=float(np.linalg.norm(H_hat - H) ** 2),
        energy=energy,
        theory_mse=theory,
        snr=receive_snr(H, pair, sigma_sq),
        expected_gain=expected,
        rates={
            T: achievable_rate(
                H, pair, RateParams(T=T, T_t=training_overhead(cfg, scheme), Gamma=cfg.Gamma, sigma_sq=sigma_sq)
            )
            for T in block_lengths
        },
    )


def mean_stderr(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and standard error with exactly rounded sums; stderr is 0 for a single value."""
    n = len(values)
    if n == 0:
        return math.nan, math.nan
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    variance = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(variance / n)


def _ratio_stats(numerators: Sequence[float], denominators: Sequence[float]) -> Tuple[float, float]:
    """``sum(num) / sum(den)`` with the stderr of ``num`` scaled by ``mean(den)``."""
    if not numerators:
        return math.nan, math.nan
    den_mean = math.fsum(denominators) / len(denominators)
    if den_mean == 0:
        return math.nan, math.nan
    num_mean, num_stderr = mean_stderr(numerators)
    return num_mean / den_mean, num_stderr / den_mean


def _db_stats(mean: float, stderr: float) -> Tuple[float, float]:
    """Mean in dB of a linear mean; the stderr is carried to first order."""
    if math.isnan(mean):
        return math.nan, math.nan
    if mean > 0 and math.isfinite(mean):
        return linear_to_db(mean), 10.0 / math.log(10.0) * stderr / mean
    return linear_to_db(mean), math.nan


def aggregate_outcomes(
    sweep_value: float,
    scheme: str,
    outcomes: Sequence[TrialOutcome],
    families: Iterable[str],
    block_lengths: Sequence[int],
) -> List[SweepRow]:
    """Reduce one cell's trials to result rows, excluding degenerate trials."""
    families = set(families)
    valid = [o for o in outcomes if not o.degenerate]
    n_valid = len(valid)
    n_degenerate = len(outcomes) - n_valid
    stats: Dict[str, Tuple[float, float]] = {}

    if "nmse" in families and scheme != "perfect":
        errors = [o.sq_error for o in valid]
        energies = [o.energy for o in valid]
        theory = [o.theory_mse for o in valid]
        stats["nmse_mc"] = _ratio_stats(errors, energies)
        stats["nmse_theory"] = _ratio_stats(theory, energies)
        if scheme == "S2":
            stats["mse_ratio"] = _ratio_stats(errors, theory)

    if "snr" in families:
        stats["snr"] = mean_stderr([o.snr for o in valid])
        stats["snr_db"] = _db_stats(*stats["snr"])

    if "gain" in families:
        stats["expected_gain_db"] = _db_stats(*mean_stderr([o.expected_gain for o in valid]))

    if "rate" in families:
        for T in block_lengths:
            stats[f"rate_T{T}"] = mean_stderr([o.rates[T] for o in valid])

    return [
        SweepRow(
            sweep_value=float(sweep_value),
            scheme=scheme,
            metric=metric,
            mean=mean,
            stderr=stderr,
            n_valid=n_valid,
            n_degenerate=n_degenerate,
        )
        for metric, (mean, stderr) in stats.items()
    ]


def scenario_for_value(config: ExperimentConfig, value: float) -> ScenarioConfig:
    """Base scenario with the swept parameter set; dB and dBm values are converted here."""
    base = config.scenario
    if config.sweep in ("rician_nmse", "rician_snr"):
        return base.with_updates(K_I=db_to_linear(value))
    if config.sweep == "rate_vs_m":
        return base.with_updates(M1=int(value), M2=int(value))
    if config.sweep == "rate_vs_power":
        return base.with_updates(P=dbm_to_watts(value))
    field_type = ScenarioConfig.model_fields[config.sweep_field].annotation
    return base.with_updates(**{config.sweep_field: int(value) if field_type is int else value})


def run_sweep(config: ExperimentConfig, threads: int = 1) -> SweepResult:
    """
    Run every (sweep value, scheme) cell of an experiment.

    Trials of a cell run on ``threads`` workers; results do not depend on it.

    Raises:
        ScenarioValidationError: If a block length cannot hold a scheme's training
    """
    started = time.perf_counter()
    families = SWEEP_METRICS[config.sweep]
    block_lengths = config.block_lengths
    scenarios = [scenario_for_value(config, value) for value in config.sweep_values]

    # Every trial evaluates rates, so each cell must fit before any trial runs
    for scenario in scenarios:
        for scheme in config.schemes:
            for T in block_lengths:
                scenario.check_training_budget(scheme, T)

    rows: List[SweepRow] = []
    total_degenerate = 0
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for sweep_index, (value, scenario) in enumerate(zip(config.sweep_values, scenarios)):
            for scheme in config.schemes:
                logger.info(f"Cell {config.sweep}={value:g} scheme={scheme}: {config.n_trials} trials")
                task = partial(
                    _run_indexed_trial,
                    master_seed=config.master_seed,
                    sweep_index=sweep_index,
                    cfg=scenario,
                    scheme=scheme,
                    layout=config.array_layout,
                    block_lengths=block_lengths,
                )
                trial_indices = range(config.n_trials)
                outcomes = list(pool.map(task, trial_indices) if pool else map(task, trial_indices))
                cell_rows = aggregate_outcomes(value, scheme, outcomes, families, block_lengths)
                total_degenerate += sum(o.degenerate for o in outcomes)
                rows.extend(cell_rows)
    finally:
        if pool is not None:
            pool.shutdown()

    if total_degenerate:
        logger.warning(f"{total_degenerate} degenerate trials excluded from sweep {config.sweep}")
    duration = time.perf_counter() - started
    logger.info(f"Sweep {config.sweep} finished: {len(rows)} rows in {duration:.2f}s")
    return SweepResult(rows=sorted(rows, key=lambda row: row.sort_key), config=config, duration_seconds=duration)


def _run_indexed_trial(trial_index: int, *, master_seed: int, sweep_index: int, **kwargs) -> TrialOutcome:
    return run_trial((master_seed, sweep_index, trial_index), **kwargs)


def preset_config(
    name: str,
    n_trials: int = 500,
    master_seed: int = 0,
    scenario: Optional[ScenarioConfig] = None,
) -> ExperimentConfig:
    """
    Experiment for one of the bundled presets.

    fig2a: NMSE of both schemes over K_I; fig2b: receive SNR over K_I;
    fig3a: rates over M at T = 150 and 400; fig3b: rates over P at T = 40.
    """
    base = scenario or default_scenario()
    if name == "fig2a":
        return ExperimentConfig(
            name=name, scenario=base, sweep="rician_nmse", sweep_values=RICIAN_GRID_DB,
            n_trials=n_trials, master_seed=master_seed, schemes=["S1", "S2"],
        )
    if name == "fig2b":
        return ExperimentConfig(
            name=name, scenario=base, sweep="rician_snr", sweep_values=RICIAN_GRID_DB,
            n_trials=n_trials, master_seed=master_seed, schemes=list(ALL_SCHEMES),
        )
    if name == "fig3a":
        return ExperimentConfig(
            name=name, scenario=base, sweep="rate_vs_m", sweep_values=SUBSURFACE_GRID,
            n_trials=n_trials, master_seed=master_seed, schemes=list(ALL_SCHEMES),
            coherence_lengths=[150, 400],
        )
    if name == "fig3b":
        return ExperimentConfig(
            name=name, scenario=base.with_updates(T=40), sweep="rate_vs_power", sweep_values=POWER_GRID_DBM,
            n_trials=n_trials, master_seed=master_seed, schemes=list(ALL_SCHEMES),
            coherence_lengths=[40],
        )
    raise ScenarioValidationError(f"Unknown preset '{name}'", {"presets": list(PRESET_NAMES)})


def _format_float(value: float) -> str:
    return f"{value:.17e}"


def format_csv(result: SweepResult) -> str:
    """CSV text of a result: fixed header, full-precision floats, sorted rows."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.sorted_rows():
        writer.writerow([
            _format_float(row.sweep_value),
            row.scheme,
            row.metric,
            _format_float(row.mean),
            _format_float(row.stderr),
            row.n_valid,
            row.n_degenerate,
        ])
    return buffer.getvalue()


def emit_csv(result: SweepResult, path: Union[str, Path]) -> Path:
    """
    Write a result as CSV.

    Raises:
        OutputWriteError: If the file cannot be written
    """
    path = Path(path)
    try:
        path.write_text(format_csv(result), encoding="utf-8")
    except OSError as exc:
        raise OutputWriteError(str(path), exc.strerror or str(exc)) from exc
    logger.info(f"Wrote {len(result.rows)} rows to {path}")
    return path


def parse_csv(text: str) -> List[SweepRow]:
    """Rows of CSV text produced by format_csv."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_HEADER:
        raise ScenarioValidationError(f"Unexpected CSV header {reader.fieldnames}")
    return [
        SweepRow(
            sweep_value=float(record["sweep_value"]),
            scheme=record["scheme"],
            metric=record["metric"],
            mean=float(record["mean"]),
            stderr=float(record["stderr"]),
            n_valid=int(record["n_valid"]),
            n_degenerate=int(record["n_degenerate"]),
        )
        for record in reader
    ]
