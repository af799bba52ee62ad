"""Desk-scale attacker/defender simulator with grid-search best responses.

A scenario runs on a discrete minute clock.  The injury-scale curve is a
plateau at ``i_high`` from the attack start until police arrive, then a
multiplicative per-minute decay.  The simulator is deterministic
("expectation mode"): casualties accrue as expected values and the
engagement stops at the first minute where the cumulative stop probability
crosses the configured threshold.  A seeded Monte-Carlo mode exists for
stochastic stopping.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence


@dataclass(frozen=True)
class MillerCurve:
    i_high: float
    i_low_decay: float

    def __post_init__(self):
        if self.i_high <= 0:
            raise ValueError("i_high must be positive")
        if not 0.0 < self.i_low_decay < 1.0:
            raise ValueError("i_low_decay must be in (0, 1)")


@dataclass(frozen=True)
class Scenario:
    n_shooters: int
    bullet_budget: int
    horizon_min: int
    t_attack: int
    t_cop: int
    victims: tuple
    material_cost_per_min: float
    miller: MillerCurve
    stop_threshold: float = 0.9

    def __post_init__(self):
        if not 0 <= self.t_attack <= self.t_cop <= self.horizon_min:
            raise ValueError("need 0 <= t_attack <= t_cop <= horizon_min")
        if self.n_shooters < 1 or self.bullet_budget < 1 or self.horizon_min < 1:
            raise ValueError("n_shooters, bullet_budget, horizon_min must be positive")
        if any(v < 0 or not math.isfinite(v) for v in self.victims):
            raise ValueError("victim values must be finite and non-negative")
        if not 0.0 < self.stop_threshold <= 1.0:
            raise ValueError("stop_threshold must be in (0, 1]")

    def mean_victim_value(self) -> float:
        return sum(self.victims) / len(self.victims) if self.victims else 0.0


@dataclass(frozen=True)
class DefenderPolicy:
    officers: int
    weapon_level: float
    stop_rate: float
    unexpected_cost_rate: float = 0.0

    def __post_init__(self):
        if self.officers < 1:
            raise ValueError("officers must be positive")
        if self.weapon_level <= 0:
            raise ValueError("weapon_level must be positive")
        if not 0.0 < self.stop_rate <= 1.0:
            raise ValueError("stop_rate must be in (0, 1]")
        if self.unexpected_cost_rate < 0:
            raise ValueError("unexpected_cost_rate must be non-negative")

    def stop_probability_per_minute(self) -> float:
        per_officer = min(1.0, max(0.0, self.stop_rate * self.weapon_level))
        return 1.0 - (1.0 - per_officer) ** self.officers


@dataclass(frozen=True)
class SimOutcome:
    loss_v: float
    loss_m: float
    defender_payoff: float
    stop_time: Optional[int]      # minute index, None when the horizon ran out
    casualty_trajectory: tuple

    def total_loss(self) -> float:
        return self.loss_v + self.loss_m


def injury_scale(t: int, scenario: Scenario) -> float:
    if not 0 <= t <= scenario.horizon_min:
        raise ValueError(f"minute {t} outside horizon")
    if t < scenario.t_attack:
        return 0.0
    curve = scenario.miller
    if t < scenario.t_cop:
        return curve.i_high
    return curve.i_high * curve.i_low_decay ** (t - scenario.t_cop)


def simulate(scenario: Scenario, bullets_per_min: Sequence[int],
             policy: DefenderPolicy, rng: Optional[random.Random] = None) -> SimOutcome:
    """Run one engagement.  Passing ``rng`` switches stopping from the
    deterministic threshold rule to seeded Monte-Carlo draws."""
    if len(bullets_per_min) != scenario.horizon_min:
        raise ValueError(
            f"schedule length {len(bullets_per_min)} != horizon {scenario.horizon_min}")
    if any(b < 0 for b in bullets_per_min):
        raise ValueError("bullet counts must be non-negative")
    if sum(bullets_per_min) > scenario.bullet_budget:
        raise ValueError("schedule exceeds the bullet budget")

    mean_victim = scenario.mean_victim_value()
    p_stop = policy.stop_probability_per_minute()
    survival = 1.0
    loss_v = 0.0
    trajectory = []
    stop_time = None
    for t in range(scenario.horizon_min):
        if t >= scenario.t_attack:
            loss_v += (scenario.n_shooters * bullets_per_min[t]
                       * injury_scale(t, scenario) * mean_victim)
        trajectory.append(loss_v)
        if t >= scenario.t_cop:
            survival *= 1.0 - p_stop
            if rng is not None:
                stopped = rng.random() < p_stop
            else:
                stopped = 1.0 - survival >= scenario.stop_threshold
            if stopped:
                stop_time = t
                break

    end = stop_time if stop_time is not None else scenario.horizon_min - 1
    active_minutes = max(0, end - scenario.t_attack + 1)
    engagement_minutes = max(0, end - scenario.t_cop + 1)
    loss_m = scenario.material_cost_per_min * active_minutes
    cumulative_stop = 1.0 - survival
    payoff = (cumulative_stop * scenario.n_shooters
              - policy.unexpected_cost_rate * engagement_minutes)
    return SimOutcome(loss_v, loss_m, payoff, stop_time, tuple(trajectory))


# ---------------------------------------------------------------------------
# Schedule grids and best responses


def schedule_grid(scenario: Scenario, rates: Sequence[int] = (1, 2, 4, 8),
                  window_lengths: Optional[Sequence[int]] = None) -> list[tuple]:
    """Burst schedules: fire ``rate`` bullets per minute over a window
    starting anywhere at or after the attack minute.  Grids for a larger
    bullet budget are supersets of grids for a smaller one, which keeps
    best-response losses monotone in the budget."""
    horizon = scenario.horizon_min
    if window_lengths is None:
        window_lengths = range(1, horizon - scenario.t_attack + 1)
    grid = []
    for rate in rates:
        for length in window_lengths:
            if rate * length > scenario.bullet_budget:
                continue
            for start in range(scenario.t_attack, horizon - length + 1):
                schedule = [0] * horizon
                for t in range(start, start + length):
                    schedule[t] = rate
                grid.append(tuple(schedule))
    if not grid:
        grid.append(tuple([0] * horizon))
    return grid


def shooter_best_response(scenario: Scenario, policy: DefenderPolicy,
                          grid: Sequence[Sequence[int]]) -> tuple:
    """Maximize loss_v + loss_m over the schedule grid; among maximizers
    prefer the schedule spending fewer bullets, then the earliest grid
    index."""
    if not grid:
        raise ValueError("empty schedule grid")
    best = None
    for index, schedule in enumerate(grid):
        outcome = simulate(scenario, schedule, policy)
        key = (-outcome.total_loss(), sum(schedule), index)
        if best is None or key < best[0]:
            best = (key, tuple(schedule), outcome)
    return best[1], best[2]


def policy_grid(officers_range: Sequence[int], weapon_levels: Sequence[float],
                stop_rate: float, unexpected_cost_rate: float) -> list[DefenderPolicy]:
    return [
        DefenderPolicy(officers, weapon, stop_rate, unexpected_cost_rate)
        for officers in officers_range
        for weapon in weapon_levels
    ]


def defender_best_response(scenario: Scenario, shooter_schedule: Sequence[int],
                           grid: Sequence[DefenderPolicy]) -> tuple:
    """Maximize defender payoff over the policy grid; ties go to the
    earliest grid index."""
    if not grid:
        raise ValueError("empty policy grid")
    best = None
    for index, policy in enumerate(grid):
        outcome = simulate(scenario, shooter_schedule, policy)
        key = (-outcome.defender_payoff, index)
        if best is None or key < best[0]:
            best = (key, policy, outcome)
    return best[1], best[2]


# ---------------------------------------------------------------------------
# Calibration against the observed casualty rate


def default_calibration_scenario(i_high: float = 1.0) -> tuple:
    """A 31-minute engagement template (attack at minute 0, police arriving
    at minute 7) with 78 bullets spread nearly uniformly and a passive
    defender, mirroring the average observed incident."""
    scenario = Scenario(
        n_shooters=1, bullet_budget=78, horizon_min=31, t_attack=0, t_cop=7,
        victims=(1.0,), material_cost_per_min=0.0,
        miller=MillerCurve(i_high=i_high, i_low_decay=0.9),
        stop_threshold=1.0,
    )
    schedule = tuple(3 if t < 16 else 2 for t in range(31))
    policy = DefenderPolicy(officers=1, weapon_level=1.0, stop_rate=1e-9)
    return scenario, schedule, policy


def simulated_casualty_rate(scenario: Scenario, schedule: Sequence[int],
                            policy: DefenderPolicy) -> float:
    outcome = simulate(scenario, schedule, policy)
    end = outcome.stop_time if outcome.stop_time is not None else scenario.horizon_min - 1
    crime_minutes = max(1, end - scenario.t_attack + 1)
    return outcome.loss_v / crime_minutes


def calibrate(target_rate: float, template=None, tol: float = 1e-6,
              lo: float = 1e-9, hi: float = 1e6) -> MillerCurve:
    """Bisect ``i_high`` until the simulated casualties-per-minute matches
    the target.  The simulated rate is monotone (linear) in ``i_high``."""
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if template is None:
        template = default_calibration_scenario()
    scenario, schedule, policy = template

    def rate(i_high: float) -> float:
        s = replace(scenario, miller=replace(scenario.miller, i_high=i_high))
        return simulated_casualty_rate(s, schedule, policy)

    if rate(hi) < target_rate or rate(lo) > target_rate:
        raise ValueError("target rate outside the bisection bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if abs(rate(mid) - target_rate) <= tol:
            return replace(scenario.miller, i_high=mid)
        if rate(mid) < target_rate:
            lo = mid
        else:
            hi = mid
    raise ArithmeticError("bisection failed to converge")


# ---------------------------------------------------------------------------
# Scenario files (flat key = value text)

_SCENARIO_KEYS = (
    "n_shooters", "bullet_budget", "horizon_min", "t_attack", "t_cop",
    "victims", "material_cost_per_min", "i_high", "i_low_decay",
    "stop_threshold", "officers", "weapon_level", "stop_rate",
    "unexpected_cost_rate",
)


def parse_scenario_file(text: str) -> tuple:
    """Parse a flat key=value scenario file into (Scenario, DefenderPolicy)."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _SCENARIO_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        values[key] = raw.strip()

    def need(key: str) -> str:
        if key not in values:
            raise ValueError(f"missing key {key!r}")
        return values[key]

    scenario = Scenario(
        n_shooters=int(need("n_shooters")),
        bullet_budget=int(need("bullet_budget")),
        horizon_min=int(need("horizon_min")),
        t_attack=int(need("t_attack")),
        t_cop=int(need("t_cop")),
        victims=tuple(float(v) for v in need("victims").split(",")),
        material_cost_per_min=float(values.get("material_cost_per_min", "0")),
        miller=MillerCurve(float(need("i_high")), float(need("i_low_decay"))),
        stop_threshold=float(values.get("stop_threshold", "0.9")),
    )
    policy = DefenderPolicy(
        officers=int(need("officers")),
        weapon_level=float(need("weapon_level")),
        stop_rate=float(need("stop_rate")),
        unexpected_cost_rate=float(values.get("unexpected_cost_rate", "0")),
    )
    return scenario, policy


def format_scenario_file(scenario: Scenario, policy: DefenderPolicy) -> str:
    lines = [
        f"n_shooters = {scenario.n_shooters}",
        f"bullet_budget = {scenario.bullet_budget}",
        f"horizon_min = {scenario.horizon_min}",
        f"t_attack = {scenario.t_attack}",
        f"t_cop = {scenario.t_cop}",
        "victims = " + ",".join(repr(v) for v in scenario.victims),
        f"material_cost_per_min = {scenario.material_cost_per_min!r}",
        f"i_high = {scenario.miller.i_high!r}",
        f"i_low_decay = {scenario.miller.i_low_decay!r}",
        f"stop_threshold = {scenario.stop_threshold!r}",
        f"officers = {policy.officers}",
        f"weapon_level = {policy.weapon_level!r}",
        f"stop_rate = {policy.stop_rate!r}",
        f"unexpected_cost_rate = {policy.unexpected_cost_rate!r}",
    ]
    return "\n".join(lines) + "\n"


def default_scenario() -> tuple:
    """A desk-scale scenario roughly shaped like the average incident."""
    scenario = Scenario(
        n_shooters=1, bullet_budget=78, horizon_min=45, t_attack=15, t_cop=22,
        victims=(1.0,) * 20, material_cost_per_min=0.5,
        miller=MillerCurve(i_high=0.05, i_low_decay=0.6),
        stop_threshold=0.9,
    )
    policy = DefenderPolicy(officers=4, weapon_level=1.0, stop_rate=0.08,
                            unexpected_cost_rate=0.01)
    return scenario, policy
