"""Closed-form success probabilities for the attacker-vs-honest block race.

The race between an attacker mining a secret fork and the honest network is a
binomial random walk: each new block belongs to the attacker with probability
``q`` and to the honest miners with probability ``p = 1 - q``.  This module
implements the three classical treatments of that walk:

* the gambler's-ruin chain (finite fortune / finite target),
* the Poisson model (attacker progress approximated by a Poisson draw while
  the merchant waits, then a catch-up race),
* the negative-binomial model (exact block-count law, attacker pre-mines one
  block before the merchant-paying transaction is broadcast).

All functions are pure and operate on plain integers plus an
:class:`AttackerPower`.  Results are probabilities clamped to ``[0, 1]``; the
clamp tolerates at most ``1e-9`` of accumulated floating-point drift and
raises if a formula strays further, since that would indicate a genuine bug
rather than rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "AttackerPower",
    "RaceState",
    "UnreachableRiskError",
    "gambler_ruin_probability",
    "finite_resource_success",
    "catch_up_probability",
    "poisson_success",
    "negbin_block_pmf",
    "negbin_success",
    "poisson_equivalent_success",
    "model_gap",
    "min_confirmations",
]

# Switch from exact integer binomials / iterative Poisson terms to lgamma-based
# log-space evaluation once block counts exceed this.
_LOG_SPACE_THRESHOLD = 50

# Accumulated rounding may push a probability slightly outside [0, 1]; anything
# beyond this is treated as a bug, not drift.
_CLAMP_TOLERANCE = 1e-9

_SCAN_CAP = 10_000


class UnreachableRiskError(ValueError):
    """No confirmation count can push the attack success below the ceiling."""


@dataclass(frozen=True)
class AttackerPower:
    """Share of total hash power controlled by the attacker.

    ``q`` is the attacker's fraction, ``p = 1 - q`` the honest remainder.
    """

    q: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"attacker share q must lie in [0, 1], got {self.q}")

    @property
    def p(self) -> float:
        return 1.0 - self.q


@dataclass(frozen=True)
class RaceState:
    """A snapshot of the block race in the gambler's-ruin framing.

    ``lead`` is the honest chain's lead in blocks and ``budget`` the number of
    blocks the attacker can afford to fall behind before giving up.  The
    equivalent gambler starts with fortune ``budget`` and wins upon reaching
    ``budget + lead + 1`` (one block more than the honest chain).
    """

    lead: int
    budget: int

    def __post_init__(self) -> None:
        if self.budget < 0:
            raise ValueError("budget must be non-negative")
        if self.lead < -1:
            raise ValueError("lead below -1 leaves no race to run")

    @property
    def fortune(self) -> int:
        return self.budget

    @property
    def goal(self) -> int:
        return self.budget + self.lead + 1

    def success_probability(self, power: AttackerPower) -> float:
        return finite_resource_success(self.budget, self.lead, power)


def _clamp01(value: float) -> float:
    if value < -_CLAMP_TOLERANCE or value > 1.0 + _CLAMP_TOLERANCE:
        raise ArithmeticError(
            f"probability {value!r} drifted more than {_CLAMP_TOLERANCE} outside [0, 1]"
        )
    return min(1.0, max(0.0, value))


def gambler_ruin_probability(fortune: int, goal: int, power: AttackerPower) -> float:
    """Probability that a gambler starting at ``fortune`` reaches ``goal``.

    Each round the gambler wins one unit with probability ``q`` (the attacker
    mines the next block) and loses one with probability ``p``, absorbing at 0
    (ruin) or at ``goal`` (success).  For the even game the source chain gives
    ``(fortune + 1) / goal``; the absorbing boundaries are pinned exactly.
    """
    if fortune < 0 or goal < 1:
        raise ValueError("fortune must be >= 0 and goal >= 1")
    if fortune > goal:
        raise ValueError(f"fortune {fortune} exceeds goal {goal}")
    if fortune == 0:
        return 0.0
    if fortune == goal:
        return 1.0
    q, p = power.q, power.p
    if p == q:
        return _clamp01((fortune + 1) / goal)
    ratio = p / q
    return _clamp01((1.0 - ratio**fortune) / (1.0 - ratio**goal))


def finite_resource_success(budget: int, lead: int, power: AttackerPower) -> float:
    """Success probability for an attacker with a bounded block budget.

    The attacker is ``lead`` blocks behind, wins on overtaking the honest
    chain by one, and abandons after falling ``budget`` further blocks behind.
    """
    if budget < 0 or lead < 0:
        raise ValueError("budget and lead must be non-negative")
    if budget == 0:
        return 0.0
    q, p = power.q, power.p
    if p == q:
        return _clamp01((budget + 1) / (budget + lead + 1))
    ratio = p / q
    if q == 0.0:
        return 0.0
    return _clamp01((1.0 - ratio**budget) / (1.0 - ratio ** (budget + lead + 1)))


def catch_up_probability(lead: int, power: AttackerPower) -> float:
    """Probability an attacker ``lead`` blocks behind ever overtakes.

    With unlimited resources the walk is transient only for ``q < p``: the
    attacker must gain ``lead + 1`` net blocks, each net gain succeeding with
    probability ``q/p``.  For ``q >= p`` (or a race already won, ``lead < 0``)
    the result is 1; the boundary ``q = p`` is the recurrent limit case.
    """
    q, p = power.q, power.p
    if lead < 0 or q >= p:
        return 1.0
    if q == 0.0:
        return 0.0
    return _clamp01((q / p) ** (lead + 1))


def _poisson_pmf_terms(lam: float, count: int) -> list[float]:
    """Poisson probabilities for k = 0 .. count-1 at rate ``lam``."""
    if count <= _LOG_SPACE_THRESHOLD:
        terms = [math.exp(-lam)]
        for k in range(1, count):
            terms.append(terms[-1] * lam / k)
        return terms
    log_lam = math.log(lam)
    return [math.exp(k * log_lam - lam - math.lgamma(k + 1)) for k in range(count)]


def poisson_success(lead: int, power: AttackerPower) -> float:
    """Attack success under the Poisson progress model.

    While the honest chain establishes its lead the attacker secretly mines a
    Poisson-distributed number of blocks with mean ``(lead + 1) * q / p``; each
    shortfall of ``k`` blocks must afterwards be closed by the catch-up race.
    Returns exactly 1 when the attacker holds at least half the power.
    """
    if lead < 0:
        raise ValueError("lead must be non-negative")
    q, p = power.q, power.p
    if q >= p:
        return 1.0
    if q == 0.0:
        return 0.0
    ratio = q / p
    lam = (lead + 1) * ratio
    poisson = _poisson_pmf_terms(lam, lead + 2)
    missed = 0.0
    for k in range(lead + 2):
        missed += poisson[k] * (1.0 - ratio ** (lead - k + 1))
    return _clamp01(1.0 - missed)


def negbin_block_pmf(attacker_blocks: int, honest_blocks: int, power: AttackerPower) -> float:
    """P(attacker mines exactly ``attacker_blocks`` before ``honest_blocks``).

    Negative-binomial law: C(m+n-1, m) * p^n * q^m with m attacker successes
    before the n-th honest block.
    """
    m, n = attacker_blocks, honest_blocks
    if n < 1:
        raise ValueError("honest block count must be at least 1")
    if m < 0:
        raise ValueError("attacker block count must be non-negative")
    q, p = power.q, power.p
    if q == 0.0:
        return 1.0 if m == 0 else 0.0
    if p == 0.0:
        return 0.0
    if m + n <= _LOG_SPACE_THRESHOLD:
        return _clamp01(math.comb(m + n - 1, m) * p**n * q**m)
    log_coeff = math.lgamma(m + n) - math.lgamma(m + 1) - math.lgamma(n)
    return _clamp01(math.exp(log_coeff + n * math.log(p) + m * math.log(q)))


def negbin_success(confirmations: int, power: AttackerPower) -> float:
    """Attack success under the negative-binomial model.

    The attacker pre-mines one block, the merchant waits ``confirmations``
    honest blocks, and the race is settled exactly by the negative-binomial
    block-count law.  Equals 1 at zero confirmations and whenever ``q >= p``.
    """
    n = confirmations
    if n < 0:
        raise ValueError("confirmations must be non-negative")
    q, p = power.q, power.p
    if n == 0 or q >= p:
        return 1.0
    if q == 0.0:
        return 0.0
    if 2 * n <= _LOG_SPACE_THRESHOLD:
        caught = sum(
            math.comb(m + n - 1, m) * (p**n * q**m - p**m * q**n) for m in range(n)
        )
        return _clamp01(1.0 - caught)
    log_p, log_q = math.log(p), math.log(q)
    caught = 0.0
    for m in range(n):
        log_coeff = math.lgamma(m + n) - math.lgamma(m + 1) - math.lgamma(n)
        caught += math.exp(log_coeff + n * log_p + m * log_q)
        caught -= math.exp(log_coeff + m * log_p + n * log_q)
    return _clamp01(1.0 - caught)


def poisson_equivalent_success(confirmations: int, power: AttackerPower) -> float:
    """Poisson-model success expressed per merchant confirmation count.

    The two models describe the same race once their bookkeeping is aligned:
    with one pre-mined attacker block and ``n`` honest confirmations the
    remaining honest lead is ``n - 1``.  Zero confirmations means the merchant
    accepted instantly and both models give 1.
    """
    if confirmations < 0:
        raise ValueError("confirmations must be non-negative")
    if confirmations == 0:
        return 1.0
    return poisson_success(confirmations - 1, power)


def model_gap(confirmations: int, power: AttackerPower) -> float:
    """Signed Poisson-minus-negative-binomial gap at a confirmation count."""
    return poisson_equivalent_success(confirmations, power) - negbin_success(
        confirmations, power
    )


def min_confirmations(power: AttackerPower, risk_ceiling: float) -> int:
    """Smallest confirmation count with attack success <= ``risk_ceiling``.

    Uses the strict monotone decrease of the negative-binomial success in the
    confirmation count for ``q < 0.5``.  A majority attacker always succeeds,
    so no ceiling below 1 is reachable there.
    """
    if not 0.0 < risk_ceiling <= 1.0:
        raise ValueError("risk ceiling must lie in (0, 1]")
    if power.q >= 0.5:
        raise UnreachableRiskError(
            "attack success is 1 for every confirmation count when q >= 0.5"
        )
    for n in range(_SCAN_CAP + 1):
        if negbin_success(n, power) <= risk_ceiling:
            return n
    raise UnreachableRiskError(
        f"risk ceiling {risk_ceiling} not reached within {_SCAN_CAP} confirmations"
    )
