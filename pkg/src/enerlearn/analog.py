"""Driven damped oscillator as the minimal mechanical learner.

The plant is m x'' = -k x - gamma x' + f(t).  Its internal energy is the
mechanical energy E = m v^2 / 2 + k x^2 / 2, and the power balance is

    dE/dt = f v - gamma v^2

so the system gains energy only while its velocity tracks the drive.  The
inflow and outflow balance exactly at v = f / gamma, and the net gain rate
f v - gamma v^2 peaks at v = f / (2 gamma) with value f^2 / (4 gamma).
Synchronizing velocity with a sinusoidal force is ordinary velocity
resonance: the steady-state absorbed power is maximal at the natural
frequency, where velocity and force are exactly in phase.

Integration is fixed-step RK4: deterministic, 4th order, no adaptive-step
nondeterminism.  Steady-state helpers average over whole drive periods
after the transient has decayed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .csvio import write_rows


def trapezoid(y: np.ndarray, dx: float) -> float:
    """Composite trapezoidal integral on a uniform grid."""
    y = np.asarray(y, dtype=float)
    return float((y[1:] + y[:-1]).sum() * (0.5 * dx))


@dataclass(frozen=True)
class OscillatorParams:
    """Mass (kg), spring stiffness (N/m), friction coefficient (kg/s)."""

    m: float
    k_spring: float
    gamma: float

    def __post_init__(self):
        if self.m <= 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if self.k_spring < 0:
            raise ValueError(f"stiffness must be nonnegative, got {self.k_spring}")
        if self.gamma < 0:
            raise ValueError(f"friction must be nonnegative, got {self.gamma}")

    @property
    def omega0(self) -> float:
        """Natural frequency sqrt(k/m); zero for a free particle."""
        return math.sqrt(self.k_spring / self.m)


@dataclass(frozen=True)
class OscillatorState:
    x: float
    v: float
    t: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.v) and math.isfinite(self.t)):
            raise ValueError("state must be finite")


class ForceSignal:
    """Scalar external force as a function of time."""

    def value_at(self, t: float) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class SinusoidForce(ForceSignal):
    """f(t) = amplitude * cos(omega t + phase)."""

    amplitude: float
    omega: float
    phase: float = 0.0

    def value_at(self, t: float) -> float:
        return self.amplitude * math.cos(self.omega * t + self.phase)


@dataclass(frozen=True)
class ConstantForce(ForceSignal):
    value: float

    def value_at(self, t: float) -> float:
        return self.value


class SampledForce(ForceSignal):
    """Piecewise-linear interpolation of samples on a uniform grid."""

    def __init__(self, values, dt: float, t0: float = 0.0):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("sampled force needs a nonempty 1-d value array")
        if not np.all(np.isfinite(values)):
            raise ValueError("sampled force values must be finite")
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.values = values
        self.dt = dt
        self.t0 = t0

    def value_at(self, t: float) -> float:
        pos = (t - self.t0) / self.dt
        if pos <= 0.0:
            return float(self.values[0])
        if pos >= self.values.size - 1:
            return float(self.values[-1])
        i = int(pos)
        frac = pos - i
        return float(self.values[i] * (1.0 - frac) + self.values[i + 1] * frac)


@dataclass(frozen=True)
class PowerTrace:
    """Time series of state and power flows along one simulation.

    p_in = f v is the power delivered by the drive, p_out = gamma v^2 the
    frictional loss, and e_net the running trapezoidal integral of their
    difference.
    """

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    f: np.ndarray
    p_in: np.ndarray
    p_out: np.ndarray
    e_net: np.ndarray

    def __len__(self) -> int:
        return self.t.size

    def trailing_half(self) -> slice:
        return slice(self.t.size // 2, self.t.size)


def net_power(f: float, v: float, gamma: float) -> float:
    """Instantaneous net energy intake rate f*v - gamma*v^2."""
    if gamma < 0:
        raise ValueError(f"friction must be nonnegative, got {gamma}")
    return f * v - gamma * v * v


def simulate(
    params: OscillatorParams,
    force: ForceSignal,
    x0: float,
    v0: float,
    dt: float,
    duration: float,
) -> PowerTrace:
    """Integrate the driven damped oscillator with fixed-step RK4."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if duration < dt:
        raise ValueError(f"duration must be at least dt, got {duration} < {dt}")
    n_steps = int(round(duration / dt))
    m, k, gamma = params.m, params.k_spring, params.gamma
    value_at = force.value_at

    t_arr = np.empty(n_steps + 1)
    x_arr = np.empty(n_steps + 1)
    v_arr = np.empty(n_steps + 1)
    f_arr = np.empty(n_steps + 1)

    x, v = float(x0), float(v0)
    t_arr[0], x_arr[0], v_arr[0] = 0.0, x, v
    f_arr[0] = value_at(0.0)
    half = 0.5 * dt
    sixth = dt / 6.0
    for i in range(1, n_steps + 1):
        t = (i - 1) * dt
        f1 = value_at(t)
        f2 = value_at(t + half)
        f4 = value_at(t + dt)
        # k-stages for (x, v)
        ax1 = v
        av1 = (f1 - k * x - gamma * v) / m
        x2 = x + half * ax1
        v2 = v + half * av1
        ax2 = v2
        av2 = (f2 - k * x2 - gamma * v2) / m
        x3 = x + half * ax2
        v3 = v + half * av2
        ax3 = v3
        av3 = (f2 - k * x3 - gamma * v3) / m
        x4 = x + dt * ax3
        v4 = v + dt * av3
        ax4 = v4
        av4 = (f4 - k * x4 - gamma * v4) / m
        x = x + sixth * (ax1 + 2.0 * (ax2 + ax3) + ax4)
        v = v + sixth * (av1 + 2.0 * (av2 + av3) + av4)
        if not (math.isfinite(x) and math.isfinite(v)):
            raise FloatingPointError(f"integration diverged at step {i} (t={i * dt:g})")
        t_arr[i] = i * dt
        x_arr[i] = x
        v_arr[i] = v
        f_arr[i] = f4

    p_in = f_arr * v_arr
    p_out = gamma * v_arr * v_arr
    net = p_in - p_out
    e_net = np.concatenate(([0.0], np.cumsum((net[1:] + net[:-1]) * (0.5 * dt))))
    return PowerTrace(t=t_arr, x=x_arr, v=v_arr, f=f_arr, p_in=p_in, p_out=p_out, e_net=e_net)


@dataclass(frozen=True)
class SteadyState:
    """Closed-form sinusoidal steady state of the driven damped oscillator."""

    velocity_amplitude: float
    phase: float
    mean_power: float


def analytic_steady_state(params: OscillatorParams, F0: float, omega: float) -> SteadyState:
    """Velocity amplitude, force-velocity phase, and mean absorbed power.

    V = F0 w / sqrt((k - m w^2)^2 + (gamma w)^2), P = gamma V^2 / 2; the
    phase vanishes exactly at the natural frequency, where the velocity
    locks onto the drive.
    """
    a = params.k_spring - params.m * omega * omega
    b = params.gamma * omega
    denom = math.hypot(a, b)
    if denom == 0.0:
        raise ValueError(
            "undamped oscillator driven exactly at resonance has an unbounded response"
        )
    amplitude = abs(F0) * abs(omega) / denom
    phase = math.atan2(a, b)
    mean_power = 0.5 * params.gamma * amplitude * amplitude
    return SteadyState(velocity_amplitude=amplitude, phase=phase, mean_power=mean_power)


def resonance_residual(trace: PowerTrace, force: ForceSignal, gamma: float) -> float:
    """RMS deviation of the velocity from f/gamma over the trailing half.

    Normalized by the RMS of f/gamma; zero means the velocity tracks the
    drive exactly (the synchronized, maximally-absorbing regime).  For a
    zero force the normalizer vanishes, so the unnormalized
    RMS(gamma v - f) is returned with a warning.
    """
    if gamma <= 0:
        raise ValueError(f"friction must be positive, got {gamma}")
    tail = trace.trailing_half()
    t_tail = trace.t[tail]
    v_tail = trace.v[tail]
    f_tail = np.array([force.value_at(t) for t in t_tail])
    target = f_tail / gamma
    scale = math.sqrt(float(np.mean(target * target)))
    if scale == 0.0:
        warnings.warn(
            "zero force signal: returning the unnormalized residual RMS(v)*gamma",
            stacklevel=2,
        )
        return gamma * math.sqrt(float(np.mean(v_tail * v_tail)))
    return math.sqrt(float(np.mean((v_tail - target) ** 2))) / scale


def steady_mean_power_sim(
    params: OscillatorParams,
    F0: float,
    omega: float,
    steps_per_period: int = 1000,
    settle_damping_times: float = 20.0,
    avg_periods: int = 4,
) -> float:
    """Simulated mean absorbed power at one drive frequency.

    The step size divides the drive period exactly (and also resolves the
    natural period), and the mean is taken over whole drive periods after
    at least ``settle_damping_times`` * m/gamma of transient decay, so the
    estimate is directly comparable to the analytic steady state.
    """
    if params.gamma <= 0:
        raise ValueError("steady-state power requires positive friction")
    if omega <= 0:
        raise ValueError(f"drive frequency must be positive, got {omega}")
    period = 2.0 * math.pi / omega
    ratio = params.omega0 / omega if params.omega0 > 0 else 1.0
    n_sub = int(math.ceil(steps_per_period * max(1.0, ratio)))
    dt = period / n_sub
    tau = params.m / params.gamma
    n_settle = int(math.ceil(settle_damping_times * tau / period))
    n_periods = n_settle + avg_periods
    trace = simulate(params, SinusoidForce(F0, omega), 0.0, 0.0, dt, n_periods * period)
    seg = trace.p_in[-(avg_periods * n_sub + 1):]
    return trapezoid(seg, dt) / (avg_periods * period)


def frequency_sweep(
    params: OscillatorParams,
    F0: float,
    omegas,
    steps_per_period: int = 1000,
    settle_damping_times: float = 20.0,
    avg_periods: int = 4,
) -> list[tuple[float, float, float, float]]:
    """(omega, simulated power, analytic power, resonance residual) rows."""
    rows = []
    for omega in omegas:
        omega = float(omega)
        sim_power = steady_mean_power_sim(
            params, F0, omega, steps_per_period, settle_damping_times, avg_periods
        )
        analytic = analytic_steady_state(params, F0, omega).mean_power
        period = 2.0 * math.pi / omega
        ratio = params.omega0 / omega if params.omega0 > 0 else 1.0
        n_sub = int(math.ceil(steps_per_period * max(1.0, ratio)))
        dt = period / n_sub
        tau = params.m / params.gamma
        n_periods = int(math.ceil(settle_damping_times * tau / period)) + avg_periods
        trace = simulate(params, SinusoidForce(F0, omega), 0.0, 0.0, dt, n_periods * period)
        residual = resonance_residual(trace, SinusoidForce(F0, omega), params.gamma)
        rows.append((omega, sim_power, analytic, residual))
    return rows


def save_trace_csv(trace: PowerTrace, path) -> None:
    write_rows(
        path,
        ["t", "x", "v", "f", "p_in", "p_out", "e_net"],
        zip(trace.t, trace.x, trace.v, trace.f, trace.p_in, trace.p_out, trace.e_net),
    )


def save_sweep_csv(rows, path) -> None:
    write_rows(path, ["omega", "mean_power_sim", "mean_power_analytic", "residual"], rows)
