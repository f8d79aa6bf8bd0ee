"""Experiment scenarios and metrics.

Two desk-scale loops: a system-identification setup (tapped-delay regressor
against a known target vector) and a feedforward noise-cancellation setup
with synthetic primary/secondary paths, a filtered regressor and an
open-loop prefix. Plus block attenuation and time-to-threshold metrics.
Runs are deterministic given the scenario, policy, configuration and seed.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.signal

from .adapt import AdaptState, DivergenceError, StepSizePolicy
from .dsp_core import NoiseSpec, Polynomial, TransferOperator, gen_noise, poly_mul, windowed_variance
from .spr_design import DagConfig, is_spr_numeric, ratio_transfer

DEFAULT_ATTEN_WINDOW_S = 3.0
ATTEN_CLAMP_DB = 120.0

# entropy tail for the measurement-noise stream, kept distinct from the
# disturbance stream that uses the bare scenario seed
_MEAS_NOISE_STREAM = 109


class RunDiverged(RuntimeError):
    """Adaptation diverged inside a scenario run; carries the partial trace."""

    def __init__(self, step: int, trace: "RunTrace"):
        super().__init__(f"run diverged at step {step}")
        self.step = step
        self.trace = trace


@dataclass
class ScenarioConfig:
    """Inputs of one experiment run.

    ``kind`` selects the loop: ``sysid`` needs ``true_params``;
    ``feedforward`` needs the primary and secondary paths (the secondary
    model defaults to the secondary path itself, and the regressor filter
    defaults to the secondary model).
    """

    kind: str
    noise: NoiseSpec
    n_adaptive_params: int
    duration_samples: int
    true_params: np.ndarray | None = None
    primary_path: TransferOperator | None = None
    secondary_path: TransferOperator | None = None
    secondary_model: TransferOperator | None = None
    regressor_filter: TransferOperator | None = None
    measurement_noise_rms: float = 0.0
    open_loop_prefix_samples: int = 0

    def __post_init__(self):
        if self.kind not in ("sysid", "feedforward"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.n_adaptive_params < 1:
            raise ValueError("n_adaptive_params must be at least 1")
        if self.duration_samples <= self.open_loop_prefix_samples:
            raise ValueError("duration must exceed the open-loop prefix")
        if self.kind == "sysid":
            if self.true_params is None:
                raise ValueError("sysid scenario needs true_params")
            self.true_params = np.asarray(self.true_params, dtype=float)
            if self.true_params.size != self.n_adaptive_params:
                raise ValueError("n_adaptive_params must match true_params length")
        else:
            if self.primary_path is None or self.secondary_path is None:
                raise ValueError("feedforward scenario needs primary and secondary paths")


@dataclass
class RunTrace:
    """Per-step records of one run plus run-level flags."""

    sample_rate_hz: float
    open_loop_prefix_samples: int
    e0: np.ndarray
    e_post: np.ndarray
    residual: np.ndarray
    param_err: np.ndarray
    diverged: bool = False
    divergence_step: int | None = None
    wall_time_s: float = 0.0
    spr_ok: bool | None = None
    atten_db: np.ndarray | None = None
    atten_clamped: np.ndarray | None = None
    atten_window_samples: int | None = None
    theta_path: np.ndarray | None = None
    theta_final: np.ndarray | None = None


def _empty_trace(scn: ScenarioConfig, record_theta: bool) -> RunTrace:
    T = scn.duration_samples
    trace = RunTrace(
        sample_rate_hz=scn.noise.sample_rate_hz,
        open_loop_prefix_samples=scn.open_loop_prefix_samples,
        e0=np.full(T, np.nan),
        e_post=np.full(T, np.nan),
        residual=np.full(T, np.nan),
        param_err=np.full(T, np.nan),
    )
    if record_theta:
        trace.theta_path = np.full((T, scn.n_adaptive_params), np.nan)
    return trace


def run_sysid(
    scn: ScenarioConfig,
    policy: StepSizePolicy,
    cfg: DagConfig | None = None,
    record_theta: bool = False,
) -> RunTrace:
    """Identify ``scn.true_params`` from noisy input/output data.

    The regressor is the tapped delay line of the generated input; the
    desired output is the target filter's response plus optional
    measurement noise. Divergence raises :class:`RunDiverged` carrying the
    partial trace.
    """
    if scn.kind != "sysid":
        raise ValueError("scenario kind must be 'sysid'")
    theta_true = scn.true_params
    n = scn.n_adaptive_params
    T = scn.duration_samples
    d = gen_noise(scn.noise, T)
    x = scipy.signal.lfilter(theta_true, [1.0], d)
    if scn.measurement_noise_rms > 0.0:
        rng = np.random.default_rng([scn.noise.seed, _MEAS_NOISE_STREAM])
        x = x + scn.measurement_noise_rms * rng.standard_normal(T)

    trace = _empty_trace(scn, record_theta)
    state = AdaptState(n, policy, cfg)
    phi = np.zeros(n)
    started = time.perf_counter()
    for t in range(T):
        if n > 1:
            phi[1:] = phi[:-1]
        phi[0] = d[t]
        try:
            pair = state.update(phi, x[t])
        except DivergenceError as exc:
            trace.diverged = True
            trace.divergence_step = exc.step
            trace.wall_time_s = time.perf_counter() - started
            trace.theta_final = state.theta.copy()
            raise RunDiverged(exc.step, trace) from exc
        trace.e0[t] = pair.e0
        if pair.e_post is not None:
            trace.e_post[t] = pair.e_post
        trace.residual[t] = pair.e0
        trace.param_err[t] = float(np.linalg.norm(theta_true - state.theta))
        if record_theta:
            trace.theta_path[t] = state.theta
    trace.wall_time_s = time.perf_counter() - started
    trace.theta_final = state.theta.copy()
    return trace


def _screen_path_ratio(g: TransferOperator, g_model: TransferOperator) -> bool:
    """SPR screen of the secondary path over its model; warns, never fatal."""
    try:
        verdict = is_spr_numeric(ratio_transfer(g, g_model))
    except (ValueError, RuntimeError) as exc:
        warnings.warn(f"could not verify the secondary path ratio: {exc}", stacklevel=3)
        return False
    if not verdict.is_spr:
        warnings.warn(
            "secondary path over its model is not strictly positive real "
            f"(min real part {verdict.min_real_part:.3g}); adaptation may degrade",
            stacklevel=3,
        )
    return verdict.is_spr


def run_feedforward(
    scn: ScenarioConfig,
    policy: StepSizePolicy,
    cfg: DagConfig | None = None,
    record_theta: bool = False,
) -> RunTrace:
    """Adaptive feedforward cancellation of a filtered disturbance.

    The disturbance drives the primary path to produce the uncontrolled
    residual. An adaptive FIR filter fed by the raw disturbance produces
    the compensation signal, filtered through the secondary path and
    subtracted at the error point; the update uses the regressor filtered
    through the regressor filter (defaulting to the secondary-path model).
    During the open-loop prefix the compensator is disconnected and no
    adaptation happens. A block attenuation series is attached when a full
    window fits the prefix and the controlled span.
    """
    if scn.kind != "feedforward":
        raise ValueError("scenario kind must be 'feedforward'")
    n = scn.n_adaptive_params
    T = scn.duration_samples
    prefix = scn.open_loop_prefix_samples

    w = gen_noise(scn.noise, T)
    x = scn.primary_path.fresh().filter_signal(w)
    if scn.measurement_noise_rms > 0.0:
        rng = np.random.default_rng([scn.noise.seed, _MEAS_NOISE_STREAM])
        x = x + scn.measurement_noise_rms * rng.standard_normal(T)
    g = scn.secondary_path.fresh()
    g_model = scn.secondary_model if scn.secondary_model is not None else scn.secondary_path
    reg_filter = (scn.regressor_filter if scn.regressor_filter is not None else g_model).fresh()

    trace = _empty_trace(scn, record_theta)
    trace.spr_ok = _screen_path_ratio(scn.secondary_path, g_model)
    state = AdaptState(n, policy, cfg)
    phi = np.zeros(n)
    phi_f = np.zeros(n)
    started = time.perf_counter()
    for t in range(T):
        v = w[t]
        vf = reg_filter.filter_step(v)
        if n > 1:
            phi[1:] = phi[:-1]
            phi_f[1:] = phi_f[:-1]
        phi[0] = v
        phi_f[0] = vf
        if t < prefix:
            g.filter_step(0.0)
            trace.residual[t] = x[t]
            if record_theta:
                trace.theta_path[t] = state.theta
            continue
        # the compensator runs the same effective estimate the update law
        # predicts with, so the measured residual is its a-priori error
        y = float(np.dot(state.effective_estimate(), phi))
        e_meas = float(x[t]) - g.filter_step(y)
        try:
            pair = state.update_from_error(phi_f, e_meas)
        except DivergenceError as exc:
            trace.diverged = True
            trace.divergence_step = exc.step
            trace.wall_time_s = time.perf_counter() - started
            trace.theta_final = state.theta.copy()
            raise RunDiverged(exc.step, trace) from exc
        trace.e0[t] = e_meas
        if pair.e_post is not None:
            trace.e_post[t] = pair.e_post
        trace.residual[t] = e_meas
        if record_theta:
            trace.theta_path[t] = state.theta
    trace.wall_time_s = time.perf_counter() - started
    trace.theta_final = state.theta.copy()

    win = int(round(DEFAULT_ATTEN_WINDOW_S * scn.noise.sample_rate_hz))
    if prefix >= win and T - prefix >= win:
        attenuation_db(trace, DEFAULT_ATTEN_WINDOW_S)
    return trace


def attenuation_db(
    trace: RunTrace,
    window_seconds: float = DEFAULT_ATTEN_WINDOW_S,
    sample_rate_hz: float | None = None,
) -> np.ndarray:
    """Block attenuation of the controlled residual, in dB.

    ``10 log10(var_open / var_controlled)`` per non-overlapping window of
    the controlled span, with the open-loop variance taken over the whole
    open-loop prefix. Zero controlled variance clamps at +120 dB with the
    companion ``atten_clamped`` mask set; a silent run (both variances
    zero) reads 0 dB. The series is stored on the trace and returned.
    """
    fs = float(sample_rate_hz if sample_rate_hz is not None else trace.sample_rate_hz)
    win = int(round(window_seconds * fs))
    if win < 1:
        raise ValueError("window must cover at least one sample")
    prefix = trace.open_loop_prefix_samples
    if prefix < win:
        raise ValueError("open-loop prefix shorter than one window")
    if trace.residual.size - prefix < win:
        raise ValueError("no full controlled window in the trace")
    var_open = float(trace.residual[:prefix].var())
    var_ctrl = windowed_variance(trace.residual[prefix:], win, mode="block")
    quiet = var_ctrl == 0.0
    db = np.zeros(var_ctrl.size)
    if var_open > 0.0:
        db[~quiet] = 10.0 * np.log10(var_open / var_ctrl[~quiet])
        db[quiet] = ATTEN_CLAMP_DB
        clamped = quiet
    else:
        db[~quiet] = -ATTEN_CLAMP_DB
        clamped = ~quiet
    trace.atten_db = db
    trace.atten_clamped = clamped
    trace.atten_window_samples = win
    return db


def time_to_threshold(trace_or_series, threshold_db: float) -> int | None:
    """First attenuation-window index at or above the threshold, sustained.

    A crossing counts only when the following window also meets the
    threshold. Returns None when never reached (or never sustained).
    """
    if isinstance(trace_or_series, RunTrace):
        if trace_or_series.atten_db is None:
            raise ValueError("attenuation series not computed on this trace")
        series = trace_or_series.atten_db
    else:
        series = np.asarray(trace_or_series, dtype=float)
    for i in range(series.size - 1):
        if series[i] >= threshold_db and series[i + 1] >= threshold_db:
            return i
    return None


# --------------------------------------------------------------------------
# Synthetic paths and default scenarios
# --------------------------------------------------------------------------

def resonant_section(f0_hz: float, radius: float, sample_rate_hz: float) -> Polynomial:
    """Denominator of a single resonator: conjugate poles at the given radius."""
    w = 2.0 * math.pi * f0_hz / sample_rate_hz
    return Polynomial((1.0, -2.0 * radius * math.cos(w), radius * radius))


def _normalized_peak(num: Polynomial, den: Polynomial) -> TransferOperator:
    h = TransferOperator(num, den)
    omega = np.linspace(0.0, np.pi, 4096)
    peak = float(np.max(np.abs(h.response_at(np.exp(-1j * omega)))))
    return TransferOperator(Polynomial(tuple(c / peak for c in num.coeffs)), den)


def make_primary_path(sample_rate_hz: float = 2500.0) -> TransferOperator:
    """Lightly damped 4th-order path carrying the disturbance to the sensor."""
    den = poly_mul(
        resonant_section(95.0, 0.94, sample_rate_hz),
        resonant_section(120.0, 0.88, sample_rate_hz),
    )
    num = Polynomial((1.0, 0.2))
    return _normalized_peak(num, den)


def make_secondary_path(sample_rate_hz: float = 2500.0) -> TransferOperator:
    """Lightly damped 4th-order path from the compensator to the sensor."""
    den = poly_mul(
        resonant_section(85.0, 0.93, sample_rate_hz),
        resonant_section(140.0, 0.90, sample_rate_hz),
    )
    num = poly_mul(Polynomial((1.0, -0.3)), Polynomial((1.0, 0.4)))
    return _normalized_peak(num, den)


def make_mismatched_model(sample_rate_hz: float = 2500.0) -> TransferOperator:
    """Deliberately wrong secondary-path model for the SPR warning path.

    Shifted resonances plus a non-minimum-phase numerator zero, a common
    identification failure; the path-over-model ratio is then far from
    strictly positive real.
    """
    den = poly_mul(
        resonant_section(78.0, 0.88, sample_rate_hz),
        resonant_section(152.0, 0.86, sample_rate_hz),
    )
    num = poly_mul(Polynomial((1.0, -1.25)), Polynomial((1.0, 0.4)))
    return _normalized_peak(num, den)


def default_feedforward_scenario(
    seed: int = 20260810,
    duration_s: float = 60.0,
    prefix_s: float = 15.0,
    n_taps: int = 60,
    sample_rate_hz: float = 2500.0,
    amplitude: float = 0.006,
    mismatched_model: bool = False,
) -> ScenarioConfig:
    """Broadband 70-170 Hz cancellation scenario with synthetic paths."""
    noise = NoiseSpec(
        kind="bandpass",
        sample_rate_hz=sample_rate_hz,
        band_low_hz=70.0,
        band_high_hz=170.0,
        seed=seed,
        amplitude=amplitude,
    )
    model = make_mismatched_model(sample_rate_hz) if mismatched_model else None
    return ScenarioConfig(
        kind="feedforward",
        noise=noise,
        n_adaptive_params=n_taps,
        duration_samples=int(round(duration_s * sample_rate_hz)),
        primary_path=make_primary_path(sample_rate_hz),
        secondary_path=make_secondary_path(sample_rate_hz),
        secondary_model=model,
        open_loop_prefix_samples=int(round(prefix_s * sample_rate_hz)),
    )
