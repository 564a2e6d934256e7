"""Compression-aware advantage shaping over recorded rollout groups.

Pure math on scalars: each rollout carries a full-context reward (teacher
branch), a compressed-context reward (student branch), and sequence-level
log-probabilities. Group advantages are computed from the compressed-branch
rewards; the teacher reward only enters through the degradation channel, so
shaping adds update mass exactly where a sample is beneficial AND harmed by
compression. No policy optimization happens here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from avpress.errors import InvalidInputError

ADVANTAGE_STD_EPS = 1e-8


@dataclass(frozen=True)
class RolloutRecord:
    reward_full: float
    reward_comp: float
    logprob_new: float
    logprob_old: float
    logprob_ref: float

    def __post_init__(self):
        for name in ("reward_full", "reward_comp", "logprob_new", "logprob_old", "logprob_ref"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"rollout field {name} must be finite")


@dataclass(frozen=True)
class RolloutGroup:
    """All rollouts sampled for one query; needs >= 2 for normalization."""

    rollouts: tuple[RolloutRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "rollouts", tuple(self.rollouts))
        if len(self.rollouts) < 2:
            raise InvalidInputError("a rollout group needs at least 2 rollouts")


@dataclass(frozen=True)
class ShapingConfig:
    tau: float = 1e-4
    lambda_shape: float = 1.0
    epsilon_clip: float = 0.2
    beta_kl: float = 0.04

    def __post_init__(self):
        if self.tau <= 0:
            raise InvalidInputError("tau must be positive")
        if self.lambda_shape < 0:
            raise InvalidInputError("lambda_shape must be >= 0")
        if not 0 < self.epsilon_clip < 1:
            raise InvalidInputError("epsilon_clip must be in (0, 1)")
        if self.beta_kl < 0:
            raise InvalidInputError("beta_kl must be >= 0")


@dataclass(frozen=True)
class RolloutDiagnostics:
    advantage: float
    degradation: float
    distill_weight: float
    shaped_advantage: float
    clipped_ratio: float
    kl: float


def degradation(reward_full: float, reward_comp: float, tau: float) -> float:
    """Relative reward drop caused by compression; 0 when nothing was lost."""
    if tau <= 0:
        raise InvalidInputError("tau must be positive")
    return max(0.0, reward_full - reward_comp) / (abs(reward_full) + tau)


def grpo_advantages(rewards) -> list[float]:
    """Group-normalized advantages: (r - mean) / (population std + 1e-8)."""
    rewards = [float(r) for r in rewards]
    count = len(rewards)
    if count < 2:
        raise InvalidInputError("advantage normalization needs >= 2 rewards")
    mean = sum(rewards) / count
    variance = sum((r - mean) ** 2 for r in rewards) / count
    std = math.sqrt(variance)
    return [(r - mean) / (std + ADVANTAGE_STD_EPS) for r in rewards]


def distill_weight(advantage: float, delta: float) -> float:
    """Large only when the rollout is beneficial AND degraded: ReLU(A) * delta."""
    if delta < 0:
        raise InvalidInputError("degradation must be >= 0")
    return max(0.0, advantage) * delta


def shaped_advantage(advantage: float, weight: float, lambda_shape: float) -> float:
    """A + lambda * w; never below the unshaped advantage."""
    if lambda_shape < 0 or weight < 0:
        raise InvalidInputError("lambda_shape and weight must be >= 0")
    return advantage + lambda_shape * weight


def clipped_ratio(logprob_new: float, logprob_old: float, epsilon_clip: float) -> float:
    """exp(new - old) clipped to [1 - eps, 1 + eps]."""
    if not 0 < epsilon_clip < 1:
        raise InvalidInputError("epsilon_clip must be in (0, 1)")
    ratio = math.exp(logprob_new - logprob_old)
    return min(max(ratio, 1.0 - epsilon_clip), 1.0 + epsilon_clip)


def kl_estimate(logprob_new: float, logprob_ref: float) -> float:
    """Non-negative estimator exp(r - n) - (r - n) - 1 with r = ref, n = new."""
    gap = logprob_ref - logprob_new
    return math.exp(gap) - gap - 1.0


def clipped_group_loss(
    group: RolloutGroup, config: ShapingConfig
) -> tuple[float, tuple[RolloutDiagnostics, ...]]:
    """Group objective value plus per-rollout diagnostics.

    (1/G) sum_i ratio_i * shaped_advantage_i - beta * mean KL, where the
    advantages are normalized over the compressed-branch rewards of the
    group (the optimized rollouts are the compressed ones).
    """
    rollouts = group.rollouts
    advantages = grpo_advantages([r.reward_comp for r in rollouts])

    diagnostics = []
    surrogate = 0.0
    kl_total = 0.0
    for record, advantage in zip(rollouts, advantages):
        delta = degradation(record.reward_full, record.reward_comp, config.tau)
        weight = distill_weight(advantage, delta)
        shaped = shaped_advantage(advantage, weight, config.lambda_shape)
        ratio = clipped_ratio(record.logprob_new, record.logprob_old, config.epsilon_clip)
        kl = kl_estimate(record.logprob_new, record.logprob_ref)
        surrogate += ratio * shaped
        kl_total += kl
        diagnostics.append(
            RolloutDiagnostics(
                advantage=advantage,
                degradation=delta,
                distill_weight=weight,
                shaped_advantage=shaped,
                clipped_ratio=ratio,
                kl=kl,
            )
        )

    count = len(rollouts)
    loss = surrogate / count - config.beta_kl * (kl_total / count)
    return loss, tuple(diagnostics)
