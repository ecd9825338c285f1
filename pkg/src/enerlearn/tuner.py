"""Noise-driven parameter search with a power-activated brake.

Random fluctuations walk a plant's tunable parameters through their space;
a braking law shrinks the step scale as the measured power rises, so the
walk slows down and lingers wherever the plant extracts energy well (a
resonant configuration) and roams freely where it does not.  The brake is
smooth and reversible: sigma_eff = sigma0 / (1 + beta * max(p_bar, 0)),
with p_bar an exponential moving average of measured power.  If power
later falls, the steps grow back; a hard arrest is the beta -> infinity
limit.

Each step's perturbation is drawn from a generator seeded by (seed, step
index), so trajectories are exactly reproducible and the beta = 0 walk is
bit-identical to a plain seeded random walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .csvio import write_rows


@dataclass(frozen=True)
class TunerConfig:
    """Step scale, brake strength, power smoothing window, budget, seed."""

    sigma0: float
    beta: float = 0.0
    window: int = 1
    budget: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.sigma0 <= 0:
            raise ValueError(f"sigma0 must be positive, got {self.sigma0}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.window < 1:
            raise ValueError(f"window must be at least 1, got {self.window}")
        if self.budget < 0:
            raise ValueError(f"budget must be nonnegative, got {self.budget}")


@dataclass(frozen=True)
class TunerState:
    theta: np.ndarray
    sigma_eff: float
    p_bar: float
    best_theta: np.ndarray
    best_power: float
    step_index: int = 0


def init_state(theta0, cfg: TunerConfig) -> TunerState:
    theta0 = np.asarray(theta0, dtype=float).copy()
    return TunerState(
        theta=theta0,
        sigma_eff=cfg.sigma0,
        p_bar=0.0,
        best_theta=theta0.copy(),
        best_power=-math.inf,
        step_index=0,
    )


def braking_scale(cfg: TunerConfig, p_bar: float) -> float:
    """sigma0 / (1 + beta * max(p_bar, 0)); monotone non-increasing in p_bar."""
    return cfg.sigma0 / (1.0 + cfg.beta * max(p_bar, 0.0))


def step_rng(cfg: TunerConfig, step_index: int) -> np.random.Generator:
    return np.random.default_rng((cfg.seed, step_index))


def tuner_step(state: TunerState, cfg: TunerConfig, measured_power: float) -> TunerState:
    """Advance the walk one step given the power measured at state.theta.

    Updates the smoothed power, recomputes the braked step scale, perturbs
    every coordinate by a seeded uniform step in [-sigma_eff, sigma_eff],
    and keeps the incumbent if this measurement beats it.
    """
    if not math.isfinite(measured_power):
        raise ValueError(f"measured_power must be finite, got {measured_power}")
    p_bar = state.p_bar + (measured_power - state.p_bar) / cfg.window
    sigma_eff = braking_scale(cfg, p_bar)
    delta = step_rng(cfg, state.step_index).uniform(-sigma_eff, sigma_eff, size=state.theta.shape)
    improved = measured_power > state.best_power
    return TunerState(
        theta=state.theta + delta,
        sigma_eff=sigma_eff,
        p_bar=p_bar,
        best_theta=state.theta.copy() if improved else state.best_theta,
        best_power=measured_power if improved else state.best_power,
        step_index=state.step_index + 1,
    )


def reflect(theta: np.ndarray, lower, upper) -> np.ndarray:
    """Fold coordinates back into [lower, upper] by reflection at the walls."""
    if lower is None and upper is None:
        return theta
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    span = upper - lower
    if np.any(span <= 0):
        raise ValueError("upper bound must exceed lower bound")
    period = 2.0 * span
    y = np.mod(theta - lower, period)
    y = np.where(y > span, period - y, y)
    return lower + y


@dataclass(frozen=True)
class Plant:
    """A deterministic power oracle over a parameter vector, with bounds."""

    evaluate: Callable[[np.ndarray], float]
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None


@dataclass
class TuneResult:
    best_theta: np.ndarray
    best_power: float
    history: list = field(default_factory=list)  # (step, theta, power, sigma_eff, is_incumbent)
    skipped: list = field(default_factory=list)  # (step, theta) with non-finite power


def tune(plant: Plant, theta0, cfg: TunerConfig) -> TuneResult:
    """Run the fluctuation-plus-brake search for cfg.budget evaluations.

    Non-finite plant evaluations are recorded and skipped (the walk still
    moves on); a zero budget just evaluates the start point.
    """
    state = init_state(reflect(np.asarray(theta0, dtype=float), plant.lower, plant.upper), cfg)
    if cfg.budget == 0:
        power = float(plant.evaluate(state.theta))
        return TuneResult(best_theta=state.theta.copy(), best_power=power)

    result = TuneResult(best_theta=state.theta.copy(), best_power=-math.inf)
    for step in range(cfg.budget):
        power = float(plant.evaluate(state.theta))
        if not math.isfinite(power):
            result.skipped.append((step, state.theta.copy()))
            # move along without touching the power statistics
            delta = step_rng(cfg, state.step_index).uniform(
                -state.sigma_eff, state.sigma_eff, size=state.theta.shape
            )
            state = replace(
                state,
                theta=reflect(state.theta + delta, plant.lower, plant.upper),
                step_index=state.step_index + 1,
            )
            continue
        evaluated_theta = state.theta.copy()
        prev_best = state.best_power
        state = tuner_step(state, cfg, power)
        state = replace(state, theta=reflect(state.theta, plant.lower, plant.upper))
        result.history.append((step, evaluated_theta, power, state.sigma_eff, power > prev_best))
    result.best_theta = state.best_theta.copy()
    result.best_power = state.best_power
    return result


def oscillator_stiffness_plant(
    m: float,
    gamma: float,
    F0: float,
    omega_drive: float,
    k_min: float,
    k_max: float,
) -> Plant:
    """Driven damped oscillator with tunable stiffness, theta = [k_spring].

    Power is the closed-form steady-state mean absorbed power under the
    fixed sinusoidal drive; it peaks when sqrt(k/m) matches the drive.
    """
    from .analog import OscillatorParams, analytic_steady_state

    if not 0 < k_min < k_max:
        raise ValueError("stiffness bounds must satisfy 0 < k_min < k_max")

    def evaluate(theta: np.ndarray) -> float:
        params = OscillatorParams(m=m, k_spring=float(theta[0]), gamma=gamma)
        return analytic_steady_state(params, F0, omega_drive).mean_power

    return Plant(evaluate=evaluate, lower=np.array([k_min]), upper=np.array([k_max]))


def save_history_csv(result: TuneResult, path) -> None:
    if result.history:
        dim = len(result.history[0][1])
    else:
        dim = len(result.best_theta)
    header = ["step"] + [f"theta_{i}" for i in range(dim)] + ["power_W", "sigma_eff", "is_incumbent"]
    rows = [
        [step, *theta, power, sigma_eff, is_incumbent]
        for step, theta, power, sigma_eff, is_incumbent in result.history
    ]
    write_rows(path, header, rows)
