"""Two-state regime simulator for marker amplification.

Models a generator that drifts into a self-reinforcing "structured"
register. An episode walks `steps` steps over states
{unstructured, structured}:

* the episode starts structured with probability context_shift
* entering a step, a structured state persists with probability
  `absorption`, else it decays to unstructured before emitting
* the step emits a marker with probability trigger_rate_formal when
  structured, trigger_rate_mixture when unstructured
* an unstructured step that emits switches the state to structured for
  the next step (the marker itself is the trigger)

The baseline is the mixture rate, so
amplification = simulated emission frequency / (trigger_rate_mixture * 1000).

Occupancy obeys q_1 = context_shift,
q_{t+1} = absorption * (q_t + (1 - q_t) * trigger_rate_mixture), which
gives the closed-form mean amplification in analytic_amplification();
simulate() estimates the same quantity by seeded Monte Carlo.

Amplification grows with occupancy, so it is monotone nondecreasing in
absorption and context_shift whenever trigger_rate_formal >=
trigger_rate_mixture (in the inverted regime the direction flips, by
the same algebra).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import InputError

# Multiplier for deriving per-grid-point seeds in sweep(); any fixed odd
# constant works, it only needs to keep the streams distinct.
_SWEEP_SEED_STRIDE = 1_000_003


@dataclass(frozen=True, slots=True)
class MechanismParams:
    context_shift: float  # P(episode starts structured)
    trigger_rate_formal: float  # per-step emission prob, structured
    trigger_rate_mixture: float  # per-step emission prob, unstructured
    absorption: float  # P(structured persists into the next step)
    steps: int = 512
    episodes: int = 10_000
    seed: int = 42

    def __post_init__(self):
        for name in ("context_shift", "trigger_rate_formal", "trigger_rate_mixture", "absorption"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InputError(f"{name} must be in [0, 1], got {v}")
        if self.steps < 1:
            raise InputError(f"steps must be >= 1, got {self.steps}")
        if self.episodes < 1:
            raise InputError(f"episodes must be >= 1, got {self.episodes}")

    @property
    def exit_rate(self) -> float:
        return 1.0 - self.absorption


@dataclass(frozen=True, slots=True)
class SimOutcome:
    params: MechanismParams
    mean_emissions: float  # per episode
    var_emissions: float  # population variance per episode
    simulated_frequency: float  # emissions per 1,000 steps
    baseline_frequency: float  # trigger_rate_mixture * 1,000
    amplification: float
    mc_stderr: float  # standard error of the amplification estimate


def simulate(params: MechanismParams) -> SimOutcome:
    """Monte Carlo estimate over `episodes` seeded episodes.

    Requires trigger_rate_mixture > 0 (the baseline would otherwise be
    zero and the ratio meaningless).
    """
    if params.trigger_rate_mixture <= 0.0:
        raise InputError("simulate: trigger_rate_mixture must be > 0 (baseline of the ratio)")
    rng = np.random.Generator(np.random.PCG64(params.seed))
    n = params.episodes
    structured = rng.random(n) < params.context_shift
    emissions = np.zeros(n, dtype=np.int64)
    for t in range(params.steps):
        if t > 0:
            structured &= rng.random(n) < params.absorption
        rates = np.where(structured, params.trigger_rate_formal, params.trigger_rate_mixture)
        emitted = rng.random(n) < rates
        emissions += emitted
        structured |= emitted
    mean = float(emissions.mean())
    var = float(emissions.var())
    sim_freq = mean / params.steps * 1000.0
    base_freq = params.trigger_rate_mixture * 1000.0
    se_mean = math.sqrt(var / n)
    return SimOutcome(
        params=params,
        mean_emissions=mean,
        var_emissions=var,
        simulated_frequency=sim_freq,
        baseline_frequency=base_freq,
        amplification=sim_freq / base_freq,
        mc_stderr=(se_mean / params.steps * 1000.0) / base_freq,
    )


def _occupancy_sum(cs: float, a: float, pm: float, steps: int) -> float:
    """Sum of structured-state occupancy over steps 1..steps, closed form."""
    r = a * (1.0 - pm)
    c = a * pm
    if r == 1.0:  # only reachable with a == 1 and pm == 0
        return steps * cs
    q_star = c / (1.0 - r)
    return steps * q_star + (cs - q_star) * (1.0 - r**steps) / (1.0 - r)


def analytic_amplification(params: MechanismParams) -> float:
    """Closed-form expected amplification for the same chain.

    Degenerate corners behave continuously:
    * absorption = 1 with guaranteed entry gives exactly
      trigger_rate_formal / trigger_rate_mixture (full occupancy)
    * trigger_rate_mixture = 0 with context_shift = 0 returns the
      pm -> 0 limit (finite: occupancy is itself O(pm))
    * trigger_rate_mixture = 0 with context_shift > 0 is unbounded and
      returns inf
    """
    cs, a = params.context_shift, params.absorption
    pf, pm = params.trigger_rate_formal, params.trigger_rate_mixture
    steps = params.steps
    if pm == 0.0:
        if cs > 0.0:
            return math.inf
        # d(occupancy)/d(pm) at pm=0: s_1 = 0, s_{t+1} = a * (s_t + 1)
        if a == 1.0:
            s_sum = steps * (steps - 1) / 2.0
        else:
            s_sum = a / (1.0 - a) * (steps - (1.0 - a**steps) / (1.0 - a))
        return 1.0 + pf * s_sum / steps
    occ = _occupancy_sum(cs, a, pm, steps)
    expected = steps * pm + (pf - pm) * occ
    return expected / (steps * pm)


@dataclass(frozen=True, slots=True)
class SweepPoint:
    axis_value: float
    amplification: float
    mc_stderr: float
    analytic: float
    mean_emissions: float


SWEEP_AXES = ("steps", "absorption", "context_shift")


def sweep(params: MechanismParams, axis: str, grid: list[float]) -> list[SweepPoint]:
    """One simulation per grid value of `axis`, plot-ready.

    Each point runs on its own seed derived from params.seed, so the
    whole table is reproducible while points stay independent.
    """
    if axis not in SWEEP_AXES:
        raise InputError(f"sweep: unknown axis {axis!r}, expected one of {SWEEP_AXES}")
    if not grid:
        raise InputError("sweep: empty grid")
    points: list[SweepPoint] = []
    for i, g in enumerate(grid):
        value = int(g) if axis == "steps" else float(g)
        p = replace(params, **{axis: value}, seed=params.seed + i * _SWEEP_SEED_STRIDE)
        out = simulate(p)
        points.append(
            SweepPoint(
                axis_value=float(g),
                amplification=out.amplification,
                mc_stderr=out.mc_stderr,
                analytic=analytic_amplification(p),
                mean_emissions=out.mean_emissions,
            )
        )
    return points
