import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import ConfigurationError, DegenerateDataError, InvalidInputError
from noise import NoiseModel, Seed, generate, oracle_lrv
from step_signal import StepSignal
from variance import (
    LrvMethod,
    block_diff_lrv,
    default_block_length,
    estimate_lrv,
    iid_diff_lrv,
    parse_lrv_spec,
)


@given(st.floats(-1e6, 1e6), st.integers(8, 200))
def test_constant_series_has_zero_lrv(c, n):
    y = np.full(n, c)
    assert block_diff_lrv(y).sigma_star_sq == 0.0
    assert iid_diff_lrv(y).sigma_star_sq == 0.0


def test_block_estimator_example():
    estimate = block_diff_lrv([0, 0, 0, 0, 1, 1, 1, 1], k=2)
    assert estimate.sigma_star_sq == pytest.approx(1 / 3)
    assert estimate.blocks_used == 4
    assert estimate.method is LrvMethod.BLOCK_DIFF


def test_trailing_partial_block_is_dropped():
    full = block_diff_lrv([0, 0, 0, 0, 1, 1, 1, 1], k=2)
    ragged = block_diff_lrv([0, 0, 0, 0, 1, 1, 1, 1, 50], k=2)
    assert ragged.sigma_star_sq == full.sigma_star_sq


def test_iid_estimator_example():
    assert iid_diff_lrv([0, 1, 0, 1]).sigma_star_sq == pytest.approx(0.5)


@pytest.mark.parametrize("n, k", [(1000, 10), (8, 2), (8000, 20)])
def test_default_block_length(n, k):
    assert default_block_length(n) == k


def test_block_estimator_on_white_noise():
    y = Seed(1).rng().standard_normal(100_000)
    assert block_diff_lrv(y).sigma_star_sq == pytest.approx(1.0, abs=0.1)


def test_iid_estimator_on_white_noise():
    y = 2.0 * Seed(2).rng().standard_normal(100_000)
    assert iid_diff_lrv(y).sigma_star_sq == pytest.approx(4.0, rel=0.03)


def test_block_estimator_tracks_long_run_variance():
    # MA(4) long-run variance is 16 while the marginal variance is 3.3
    noise = generate(NoiseModel(1.0, ma=(0.9, 0.8, 0.7, 0.6)), 100_000, Seed(5))
    estimate = block_diff_lrv(noise, k=50)
    assert estimate.sigma_star_sq == pytest.approx(16.0, rel=0.15)
    assert iid_diff_lrv(noise).sigma_star_sq < 3.3


def test_too_few_blocks():
    with pytest.raises(DegenerateDataError):
        block_diff_lrv(np.arange(10.0), k=6)
    with pytest.raises(ConfigurationError):
        block_diff_lrv(np.arange(10.0), k=0)
    with pytest.raises(InvalidInputError):
        block_diff_lrv(np.arange(5.0))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-1e4, 1e4, allow_nan=False))
def test_block_estimator_is_shift_invariant(seed, c):
    y = Seed(seed).rng().standard_normal(300)
    base = block_diff_lrv(y).sigma_star_sq
    assert block_diff_lrv(y + c).sigma_star_sq == pytest.approx(base, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3), st.booleans())
def test_block_estimator_scales_with_the_square(seed, a, negative):
    a = -a if negative else a
    y = Seed(seed).rng().standard_normal(300)
    base = block_diff_lrv(y).sigma_star_sq
    assert block_diff_lrv(a * y).sigma_star_sq == pytest.approx(a * a * base, rel=1e-10)


def _jump_bias(signal: StepSignal, n: int, k: int) -> float:
    """Contribution of block-aligned jumps to the block estimator."""
    m = n // k
    jumps = np.diff(signal.levels)
    return k / (2.0 * (m - 1)) * float(np.sum(jumps**2))


def test_block_estimator_on_noiseless_steps(ma1_signal):
    # Breaks at 101, 301, ... sit on block edges for k = 10
    estimate = block_diff_lrv(ma1_signal.sample(1000))
    assert estimate.sigma_star_sq == pytest.approx(
        _jump_bias(ma1_signal, 1000, 10), rel=1e-12
    )
    assert estimate.sigma_star_sq == pytest.approx(110 / 198, rel=1e-12)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("block", (LrvMethod.BLOCK_DIFF, None)),
        ("iid-diff", (LrvMethod.IID_DIFF, None)),
        ("fixed:2.5", (LrvMethod.FIXED, 2.5)),
    ],
)
def test_parse_lrv_spec(text, expected):
    assert parse_lrv_spec(text) == expected


@pytest.mark.parametrize("text", ["fixed:0", "fixed:-1", "fixed:abc", "lugsail", ""])
def test_parse_lrv_spec_rejects(text):
    with pytest.raises(ConfigurationError):
        parse_lrv_spec(text)


def test_estimate_dispatch():
    y = [0, 0, 0, 0, 1, 1, 1, 1]
    assert estimate_lrv(y, LrvMethod.BLOCK_DIFF, 2).sigma_star_sq == pytest.approx(1 / 3)
    assert estimate_lrv(y, LrvMethod.FIXED, fixed_sigma=3.0).sigma_star == 3.0
    with pytest.raises(ConfigurationError):
        estimate_lrv(y, LrvMethod.FIXED)


@pytest.mark.slow
def test_block_estimator_rate(ma1_signal):
    """RMSE of sigma_star shrinks like n^(-1/3) between n = 1000 and n = 8000."""
    model = NoiseModel(1.0, ma=(0.3,))
    truth = 1.3

    def rmse(n: int) -> float:
        signal = StepSignal.from_fractions(
            [b / 1000 for b in ma1_signal.breaks], ma1_signal.levels, n
        )
        errors = [
            block_diff_lrv(signal.sample(n) + generate(model, n, Seed(n, r))).sigma_star
            - truth
            for r in range(200)
        ]
        return float(np.sqrt(np.mean(np.square(errors))))

    assert 1.4 <= rmse(1000) / rmse(8000) <= 2.8


@pytest.mark.slow
def test_block_estimator_with_steps_and_white_noise(ma1_signal):
    """Mean over 500 replicates sits at the long-run variance plus the jump term."""
    model = NoiseModel.white()
    signal = ma1_signal.sample(1000)
    estimates = [
        block_diff_lrv(signal + generate(model, 1000, Seed(31, r))).sigma_star_sq
        for r in range(500)
    ]
    expected = oracle_lrv(model) + _jump_bias(ma1_signal, 1000, 10)
    assert np.mean(estimates) == pytest.approx(expected, abs=0.1 * oracle_lrv(model))
