"""Seedable Monte Carlo simulator of the block race.

Serves as the independent oracle for every closed form in :mod:`chainsec.race`:
block production is an i.i.d. Bernoulli process (attacker block with
probability ``q``), exactly the binomial random walk underlying those models.

Reproducibility contract
------------------------
Randomness is counter-based.  The draw consumed by trial ``i`` at step ``k``
is a pure function of ``(seed, i, k)``::

    base(i)    = mix64(seed + GAMMA * (i + 1))
    u64(i, k)  = mix64(base(i) + GAMMA * k)          k = 1, 2, ...
    uniform    = (u64 >> 11) * 2**-53                in [0, 1)

where ``mix64`` is the SplitMix64 finalizer and ``GAMMA`` its odd increment.
Every trial therefore owns a private stream addressed by its index, so the
success count is bit-identical for a given ``(seed, config)`` no matter how
trials are batched, reordered or run in parallel.

Truncation
----------
A trial is scored a loss once the attacker's deficit reaches
:func:`hopeless_deficit`, the point where the closed-form overtake probability
drops below 1e-12; the residual success mass discarded this way is orders of
magnitude below one expected miscount per 10^6 trials.  The ``step_cap`` bound
remains as a hard stop, which matters only for ``q >= 0.5`` where the walk is
recurrent and genuinely unbounded waits occur.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .race import AttackerPower

__all__ = [
    "SimConfig",
    "SimResult",
    "DEFAULT_STEP_CAP",
    "hopeless_deficit",
    "simulate_race",
    "simulate_catch_up",
    "simulate_poisson_race",
]

DEFAULT_STEP_CAP = 100_000

# Residual overtake probability below which a lagging trial is abandoned.
_RESIDUAL_CUTOFF = 1e-12

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX_M1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_M2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 2.0**-53


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one merchant-race experiment."""

    power: AttackerPower
    n_confirmations: int
    trials: int
    seed: int
    attacker_premine: int = 1
    budget: int | None = None
    step_cap: int = DEFAULT_STEP_CAP

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.n_confirmations < 0:
            raise ValueError("n_confirmations must be non-negative")
        if self.attacker_premine < 0:
            raise ValueError("attacker_premine must be non-negative")
        if self.step_cap < self.n_confirmations:
            raise ValueError("step_cap must cover at least n_confirmations steps")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be non-negative when given")


@dataclass(frozen=True)
class SimResult:
    """Empirical success fraction with its binomial standard error."""

    successes: int
    trials: int

    def __post_init__(self) -> None:
        if not 0 <= self.successes <= self.trials:
            raise ValueError("successes must lie in [0, trials]")

    @property
    def estimate(self) -> float:
        return self.successes / self.trials

    @property
    def std_error(self) -> float:
        est = self.estimate
        return math.sqrt(est * (1.0 - est) / self.trials)


def hopeless_deficit(power: AttackerPower) -> int:
    """Deficit at which a trial is scored lost rather than walked further.

    Smallest ``d`` with ``(q/p)**(d+1) < 1e-12``.  Unbounded (no abandonment)
    when ``q >= p``, where the walk is recurrent and every deficit recoverable.
    """
    q, p = power.q, power.p
    if q >= p:
        return 2**62
    if q == 0.0:
        return 1
    per_block = math.log10(p / q)
    return math.ceil(-math.log10(_RESIDUAL_CUTOFF) / per_block)


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX_M1
    z = (z ^ (z >> np.uint64(27))) * _MIX_M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _race_kernel(seed, trials, q, n, premine, step_cap, abandon, budget):
    wins = 0
    for t in range(trials):
        base = _mix64(np.uint64(seed) + _GAMMA * np.uint64(t + 1))
        honest = 0
        attacker = premine
        if honest >= n and attacker > honest:
            wins += 1
            continue
        k = np.uint64(0)
        for _ in range(step_cap):
            k += np.uint64(1)
            u = _mix64(base + _GAMMA * k)
            if (u >> np.uint64(11)) * _INV_2_53 < q:
                attacker += 1
            else:
                honest += 1
            if honest >= n and attacker > honest:
                wins += 1
                break
            if honest - attacker >= abandon:
                break
            if budget >= 0 and honest - attacker + premine >= budget:
                break
    return wins


@njit(cache=True)
def _walk_kernel(seed, trials, q, lead, step_cap, abandon, budget):
    wins = 0
    for t in range(trials):
        base = _mix64(np.uint64(seed) + _GAMMA * np.uint64(t + 1))
        pos = -lead
        k = np.uint64(0)
        for _ in range(step_cap):
            k += np.uint64(1)
            u = _mix64(base + _GAMMA * k)
            if (u >> np.uint64(11)) * _INV_2_53 < q:
                pos += 1
            else:
                pos -= 1
            if pos >= 1:
                wins += 1
                break
            if -pos >= abandon:
                break
            if budget >= 0 and (-lead) - pos >= budget:
                break
    return wins


@njit(cache=True)
def _poisson_race_kernel(seed, trials, q, lead, step_cap, abandon, cdf):
    wins = 0
    for t in range(trials):
        base = _mix64(np.uint64(seed) + _GAMMA * np.uint64(t + 1))
        k = np.uint64(1)
        u = (_mix64(base + _GAMMA * k) >> np.uint64(11)) * _INV_2_53
        if u >= cdf[lead]:
            wins += 1
            continue
        mined = 0
        while u >= cdf[mined]:
            mined += 1
        pos = -(lead - mined)
        for _ in range(step_cap - 1):
            k += np.uint64(1)
            u2 = _mix64(base + _GAMMA * k)
            if (u2 >> np.uint64(11)) * _INV_2_53 < q:
                pos += 1
            else:
                pos -= 1
            if pos >= 1:
                wins += 1
                break
            if -pos >= abandon:
                break
    return wins


def simulate_race(config: SimConfig) -> SimResult:
    """Run the merchant race and return the empirical success fraction.

    Each trial flips Bernoulli(q) block producers.  The merchant accepts once
    the honest side has ``n_confirmations`` blocks; the attacker, starting
    with ``attacker_premine`` secret blocks, wins at the first step at or
    after acceptance where its chain is strictly longer.  Trials still
    unresolved at ``step_cap`` (or past the hopeless deficit, or having burnt
    the optional ``budget``) count as failures.
    """
    q = config.power.q
    budget = -1 if config.budget is None else config.budget
    wins = _race_kernel(
        np.uint64(config.seed),
        config.trials,
        q,
        config.n_confirmations,
        config.attacker_premine,
        config.step_cap,
        hopeless_deficit(config.power),
        budget,
    )
    return SimResult(successes=int(wins), trials=config.trials)


def simulate_catch_up(
    lead: int,
    power: AttackerPower,
    trials: int,
    seed: int,
    step_cap: int = DEFAULT_STEP_CAP,
    budget: int | None = None,
) -> SimResult:
    """Empirical probability that a walk ``lead`` blocks behind ever overtakes.

    The walk must close the gap of ``lead + 1`` net blocks (one more than the
    honest chain).  With ``budget`` set, the attacker abandons after that many
    further net losses, reproducing the finite-resource game.
    """
    if lead < 0:
        raise ValueError("lead must be non-negative")
    cfg = SimConfig(power=power, n_confirmations=0, trials=trials, seed=seed,
                    step_cap=step_cap, budget=budget)
    wins = _walk_kernel(
        np.uint64(cfg.seed), cfg.trials, power.q, lead, cfg.step_cap,
        hopeless_deficit(power), -1 if budget is None else budget,
    )
    return SimResult(successes=int(wins), trials=trials)


def simulate_poisson_race(
    lead: int,
    power: AttackerPower,
    trials: int,
    seed: int,
    step_cap: int = DEFAULT_STEP_CAP,
) -> SimResult:
    """Monte Carlo counterpart of the Poisson progress model.

    Per trial the attacker's secret progress while the honest lead formed is
    drawn from Poisson((lead + 1) * q / p) by inversion of one uniform (no
    premine credit); a draw beyond ``lead`` is an immediate win and any
    shortfall is resolved by the Bernoulli catch-up walk.
    """
    if lead < 0:
        raise ValueError("lead must be non-negative")
    q, p = power.q, power.p
    if q >= p:
        raise ValueError("the Poisson progress model requires q < p")
    cfg = SimConfig(power=power, n_confirmations=0, trials=trials, seed=seed,
                    step_cap=step_cap)
    lam = (lead + 1) * q / p
    pmf = [math.exp(-lam)]
    for k in range(1, lead + 1):
        pmf.append(pmf[-1] * lam / k)
    cdf = np.cumsum(np.asarray(pmf, dtype=np.float64))
    wins = _poisson_race_kernel(
        np.uint64(cfg.seed), cfg.trials, q, lead, cfg.step_cap,
        hopeless_deficit(power), cdf,
    )
    return SimResult(successes=int(wins), trials=trials)
