"""The objective and its exact degenerate case."""

import math

import pytest
import torch
import torch.nn.functional as F
from hypothesis import given, settings
from hypothesis import strategies as st

from entropy_lab.losses import entropy_per_position, per_position_loss, regularized_loss


def _random_batch(seed: int, b: int = 4, t: int = 16, v: int = 31):
    gen = torch.Generator().manual_seed(seed)
    logits = torch.randn(b, t, v, generator=gen)
    targets = torch.randint(v, (b, t), generator=gen)
    return logits, targets


def test_lambda_zero_matches_cross_entropy_per_position():
    logits, targets = _random_batch(0)
    ours = per_position_loss(logits, targets, 0.0)
    plain = F.cross_entropy(
        logits.reshape(-1, logits.shape[-1]), targets.reshape(-1), reduction="none"
    ).view(targets.shape)
    assert torch.equal(ours, plain)


def test_lambda_zero_matches_cross_entropy_scalar():
    logits, targets = _random_batch(1)
    loss, ce, _ = regularized_loss(logits, targets, 0.0)
    plain = F.cross_entropy(logits.reshape(-1, logits.shape[-1]), targets.reshape(-1))
    assert torch.equal(loss, plain)
    assert torch.equal(ce, plain)


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**31 - 1),
    b=st.integers(1, 5),
    t=st.integers(1, 24),
    v=st.integers(2, 60),
)
def test_lambda_zero_identity_property(seed, b, t, v):
    logits, targets = _random_batch(seed, b, t, v)
    plain = F.cross_entropy(
        logits.reshape(-1, v), targets.reshape(-1), reduction="none"
    ).view(targets.shape)
    assert torch.equal(per_position_loss(logits, targets, 0.0), plain)


def test_loss_is_ce_minus_lambda_entropy():
    logits, targets = _random_batch(2)
    for lam in (0.1, 1.0, 5.0):
        loss, ce, ent = regularized_loss(logits, targets, lam)
        assert torch.equal(loss, ce - lam * ent)
        assert float(loss) < float(ce)  # entropy of random logits is positive


def test_entropy_bounds():
    logits, _ = _random_batch(3, v=31)
    h = entropy_per_position(logits)
    assert torch.all(h >= 0)
    assert torch.all(h <= math.log(31) + 1e-6)


def test_entropy_extremes():
    v = 17
    uniform = torch.zeros(1, 1, v)
    assert float(entropy_per_position(uniform)) == pytest.approx(math.log(v), rel=1e-6)
    peaked = torch.full((1, 1, v), -100.0)
    peaked[0, 0, 3] = 100.0
    assert float(entropy_per_position(peaked)) == pytest.approx(0.0, abs=1e-6)


def test_positive_lambda_changes_per_position_values():
    logits, targets = _random_batch(4)
    assert not torch.equal(
        per_position_loss(logits, targets, 0.5),
        per_position_loss(logits, targets, 0.0),
    )


def test_negative_lambda_rejected():
    logits, targets = _random_batch(5)
    with pytest.raises(ValueError, match="nonnegative"):
        regularized_loss(logits, targets, -0.1)


def test_entropy_mean_reported_matches_direct_computation():
    logits, targets = _random_batch(6)
    _, _, ent = regularized_loss(logits, targets, 2.0)
    assert torch.equal(ent, entropy_per_position(logits).mean())
