import math

import numpy as np
import pytest

from avpress.errors import InvalidInputError
from avpress.shaping import (
    RolloutGroup,
    RolloutRecord,
    ShapingConfig,
    clipped_group_loss,
    clipped_ratio,
    degradation,
    distill_weight,
    grpo_advantages,
    kl_estimate,
    shaped_advantage,
)
from oracles import o_advantages, o_group_loss


def record(full=1.0, comp=1.0, new=0.0, old=0.0, ref=0.0):
    return RolloutRecord(
        reward_full=full, reward_comp=comp, logprob_new=new, logprob_old=old, logprob_ref=ref
    )


def test_degradation_cases():
    assert degradation(1.0, 1.0, 0.1) == 0.0
    assert degradation(0.5, 0.9, 0.1) == 0.0
    assert abs(degradation(1.0, 0.4, 0.1) - 0.54545455) < 1e-8
    assert degradation(-1.0, -2.0, 0.5) == 1.0 / 1.5
    with pytest.raises(InvalidInputError):
        degradation(1.0, 0.5, 0.0)


def test_grpo_advantages_cases():
    assert grpo_advantages([2.0, 2.0, 2.0]) == [0.0, 0.0, 0.0]
    adv = grpo_advantages([1.0, 0.0])
    assert abs(adv[0] - 1.0) < 1e-7 and abs(adv[1] + 1.0) < 1e-7
    adv = grpo_advantages([2.0, 2.0, 2.0, 6.0])
    assert abs(adv[3] - 3.0 / math.sqrt(3.0)) < 1e-5
    for a in adv[:3]:
        assert abs(a + 0.57735) < 1e-5
    with pytest.raises(InvalidInputError):
        grpo_advantages([1.0])


def test_grpo_advantages_properties(rng):
    for _ in range(200):
        rewards = rng.standard_normal(int(rng.integers(2, 9))).tolist()
        adv = grpo_advantages(rewards)
        assert abs(sum(adv)) < 1e-9  # centered
        shifted = grpo_advantages([r + 3.7 for r in rewards])
        assert np.allclose(adv, shifted, atol=1e-6)
        negated = grpo_advantages([-r for r in rewards])
        assert np.allclose(adv, [-a for a in negated], atol=1e-9)
        assert adv == o_advantages(rewards)


def test_distill_weight_cases():
    assert distill_weight(-0.5, 0.4) == 0.0
    assert distill_weight(0.5, 0.0) == 0.0
    assert abs(distill_weight(0.5, 0.4) - 0.2) < 1e-12
    with pytest.raises(InvalidInputError):
        distill_weight(0.5, -0.1)


def test_shaped_advantage_cases():
    assert shaped_advantage(0.5, 0.0, 1.0) == 0.5
    assert shaped_advantage(0.5, 0.2, 0.0) == 0.5
    assert abs(shaped_advantage(0.5, 0.2, 1.0) - 0.7) < 1e-12
    assert shaped_advantage(-0.3, 0.2, 2.0) >= -0.3  # never below the input


def test_clipped_ratio_cases():
    assert clipped_ratio(0.0, 0.0, 0.2) == 1.0
    assert clipped_ratio(math.log(2.0), 0.0, 0.2) == 1.2
    assert clipped_ratio(math.log(0.5), 0.0, 0.2) == 0.8
    assert abs(clipped_ratio(0.1, 0.0, 0.3) - math.exp(0.1)) < 1e-12
    with pytest.raises(InvalidInputError):
        clipped_ratio(0.0, 0.0, 1.0)


def test_kl_estimate_cases():
    assert kl_estimate(0.0, 0.0) == 0.0
    assert abs(kl_estimate(0.0, math.log(2.0)) - (2.0 - math.log(2.0) - 1.0)) < 1e-9
    assert abs(kl_estimate(math.log(2.0), 0.0) - (0.5 + math.log(2.0) - 1.0)) < 1e-9


def test_kl_estimate_nonnegative(rng):
    for _ in range(200):
        new, ref = rng.standard_normal(2)
        assert kl_estimate(float(new), float(ref)) >= 0.0


def test_group_loss_degenerate_zero():
    group = RolloutGroup((record(), record(), record()))
    loss, diags = clipped_group_loss(group, ShapingConfig())
    assert loss == 0.0
    for diag in diags:
        assert diag.advantage == 0.0
        assert diag.degradation == 0.0
        assert diag.kl == 0.0


def test_group_loss_worked_example_g2():
    # rewards_comp [1, 0], rewards_full [1, 1], tau 0.1, lambda 1, beta 0
    group = RolloutGroup((record(full=1.0, comp=1.0), record(full=1.0, comp=0.0)))
    config = ShapingConfig(tau=0.1, lambda_shape=1.0, epsilon_clip=0.2, beta_kl=0.0)
    loss, diags = clipped_group_loss(group, config)
    assert abs(loss) < 1e-9
    assert abs(diags[0].advantage - 1.0) < 1e-7
    assert abs(diags[1].advantage + 1.0) < 1e-7
    assert diags[0].degradation == 0.0
    assert abs(diags[1].degradation - 1.0 / 1.1) < 1e-9
    assert diags[0].distill_weight == 0.0
    assert diags[1].distill_weight == 0.0  # negative advantage gates the weight
    assert diags[0].shaped_advantage == diags[0].advantage
    assert diags[1].shaped_advantage == diags[1].advantage


def test_group_loss_centered_when_unshaped(rng):
    rollouts = tuple(
        record(full=float(r), comp=float(r)) for r in rng.standard_normal(5)
    )
    config = ShapingConfig(lambda_shape=0.0, beta_kl=0.0)
    loss, _ = clipped_group_loss(RolloutGroup(rollouts), config)
    assert abs(loss) < 1e-9  # mean of centered advantages with unit ratios


def test_group_loss_matches_oracle(rng):
    for _ in range(200):
        size = int(rng.integers(2, 7))
        rows = []
        for _ in range(size):
            full, comp = rng.standard_normal(2)
            new, old, ref = 0.1 * rng.standard_normal(3)
            rows.append((float(full), float(comp), float(new), float(old), float(ref)))
        tau = float(rng.uniform(0.01, 1.0))
        lam = float(rng.uniform(0.0, 2.0))
        eps = float(rng.uniform(0.05, 0.5))
        beta = float(rng.uniform(0.0, 0.1))
        group = RolloutGroup(tuple(record(*row) for row in rows))
        config = ShapingConfig(tau=tau, lambda_shape=lam, epsilon_clip=eps, beta_kl=beta)
        loss, diags = clipped_group_loss(group, config)
        want_loss, want_rows = o_group_loss(rows, tau, lam, eps, beta)
        assert loss == want_loss
        for diag, want in zip(diags, want_rows):
            assert diag.advantage == want["advantage"]
            assert diag.degradation == want["degradation"]
            assert diag.distill_weight == want["distill_weight"]
            assert diag.shaped_advantage == want["shaped_advantage"]
            assert diag.clipped_ratio == want["clipped_ratio"]
            assert diag.kl == want["kl"]


def test_group_loss_invariants(rng):
    for _ in range(100):
        size = int(rng.integers(2, 7))
        rows = [
            (
                float(rng.standard_normal()),
                float(rng.standard_normal()),
                float(0.1 * rng.standard_normal()),
                float(0.1 * rng.standard_normal()),
                float(0.1 * rng.standard_normal()),
            )
            for _ in range(size)
        ]
        group = RolloutGroup(tuple(record(*row) for row in rows))
        config = ShapingConfig()
        _, diags = clipped_group_loss(group, config)
        assert abs(sum(d.advantage for d in diags)) < 1e-9
        for diag in diags:
            assert diag.degradation >= 0.0
            assert diag.distill_weight >= 0.0
            assert diag.shaped_advantage >= diag.advantage
            assert 1.0 - config.epsilon_clip <= diag.clipped_ratio <= 1.0 + config.epsilon_clip
            assert diag.kl >= 0.0


def test_record_and_config_validation():
    with pytest.raises(InvalidInputError):
        record(full=float("inf"))
    with pytest.raises(InvalidInputError):
        RolloutGroup((record(),))
    with pytest.raises(InvalidInputError):
        ShapingConfig(tau=0.0)
    with pytest.raises(InvalidInputError):
        ShapingConfig(lambda_shape=-1.0)
    with pytest.raises(InvalidInputError):
        ShapingConfig(epsilon_clip=1.0)
    with pytest.raises(InvalidInputError):
        ShapingConfig(beta_kl=-0.1)
