import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import ConfigurationError, DegenerateDataError, InvalidInputError
from multiscale import ScaleConfig, v_stat
from noise import Seed
from segmentation import (
    DetectorConfig,
    brute_force_detect,
    detect,
    feasibility_sweep,
    segment,
)
from step_signal import StepSignal
from variance import LrvMethod


def random_instance(rng: np.random.Generator, n_range=(4, 12)):
    """Noisy step data with a random threshold and scale family."""
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    k = int(rng.integers(0, max(1, n // 3)))
    breaks = np.sort(rng.choice(np.arange(2, n + 1), size=k, replace=False))
    levels = rng.normal(0.0, 3.0, size=k + 1)
    y = StepSignal(breaks, levels).sample(n) + rng.standard_normal(n)
    cfg = ScaleConfig(
        n=n,
        min_len=int(rng.choice([1, 2, 3])),
        q=float(rng.uniform(0.0, 3.0)),
        sigma=1.0,
    )
    return y, cfg


def capture_sweep(y, cfg):
    snapshots = {}

    def visit(j, lo, hi):
        snapshots[j] = (lo.copy(), hi.copy())

    feasibility_sweep(y, cfg, visit)
    return snapshots


def test_two_level_example():
    fit = segment([0, 0, 0, 10, 10, 10], ScaleConfig(n=6, min_len=1, q=1.0, sigma=1.0))
    assert fit.k_hat == 1
    assert fit.breaks == (4,)
    np.testing.assert_allclose(fit.levels, (0.0, 10.0), atol=1e-6)


def test_constant_series_has_no_break():
    fit = segment(np.full(20, 3.25), ScaleConfig(n=20, min_len=3, q=0.5, sigma=1.0))
    assert fit.k_hat == 0
    assert fit.levels[0] == pytest.approx(3.25, abs=1e-12)
    assert fit.sse == pytest.approx(0.0, abs=1e-20)


def test_sweep_on_constant_series_contains_the_value():
    snapshots = capture_sweep(np.full(8, 2.0), ScaleConfig(n=8, min_len=2, q=0.0, sigma=1.0))
    for lo, hi in snapshots.values():
        assert np.all(lo <= 2.0) and np.all(hi >= 2.0)


def test_sweep_intervals_are_nested(rng):
    y = rng.standard_normal(40)
    snapshots = capture_sweep(y, ScaleConfig(n=40, min_len=3, q=0.8, sigma=1.0))
    for j in range(1, 40):
        lo, hi = snapshots[j]
        lo_next, hi_next = snapshots[j + 1]
        assert np.all(lo_next[:j] >= lo) and np.all(hi_next[:j] <= hi)


def test_sweep_empties_the_full_piece():
    # At q = -0.5 the pieces [1, 2] and [3, 4] admit no common level
    snapshots = capture_sweep([0, 0, 2, 2], ScaleConfig(n=4, min_len=2, q=-0.5, sigma=1.0))
    lo2, hi2 = snapshots[2]
    lo4, hi4 = snapshots[4]
    assert lo2[0] <= hi2[0]
    assert lo4[2] <= hi4[2]
    assert lo4[0] > hi4[0]


def test_sweep_leaves_short_pieces_unconstrained():
    snapshots = capture_sweep([0, 5, 0, 5, 0], ScaleConfig(n=5, min_len=3, q=0.0, sigma=1.0))
    lo, hi = snapshots[5]
    assert np.all(np.isinf(lo[3:])) and np.all(np.isinf(hi[3:]))


def test_brute_force_examples():
    cfg = ScaleConfig(n=6, min_len=2, q=1.0, sigma=1.0)
    assert brute_force_detect(np.full(6, -1.0), cfg).k_hat == 0
    assert brute_force_detect([0, 0, 2, 2], ScaleConfig(n=4, min_len=2, q=5.0, sigma=1.0)).k_hat == 0
    with pytest.raises(InvalidInputError):
        brute_force_detect(np.zeros(17), ScaleConfig(n=17, min_len=2, q=1.0, sigma=1.0))


@pytest.mark.parametrize("batch", range(10))
def test_dynamic_program_matches_enumeration(batch):
    rng = Seed(2024, batch).rng()
    for _ in range(100):
        y, cfg = random_instance(rng)
        fast = segment(y, cfg)
        slow = brute_force_detect(y, cfg)
        assert fast.k_hat == slow.k_hat
        assert fast.sse == pytest.approx(slow.sse, abs=1e-9)
        assert fast.breaks == slow.breaks
        np.testing.assert_allclose(fast.levels, slow.levels, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fit_passes_the_multiscale_test(seed):
    y, cfg = random_instance(Seed(seed).rng(), n_range=(4, 60))
    fit = segment(y, cfg)
    assert fit.v_value <= cfg.q + 1e-9
    assert v_stat(y, fit.signal, cfg) <= cfg.q + 1e-9
    assert len(fit.level_intervals) == fit.k_hat + 1
    for level, interval in zip(fit.levels, fit.level_intervals):
        assert interval.contains(level, tol=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_larger_threshold_never_needs_more_breaks(seed, q1, q2):
    y, cfg = random_instance(Seed(seed).rng(), n_range=(10, 80))
    q1, q2 = sorted((q1, q2))
    low = segment(y, ScaleConfig(cfg.n, cfg.min_len, q1, 1.0))
    high = segment(y, ScaleConfig(cfg.n, cfg.min_len, q2, 1.0))
    assert low.k_hat >= high.k_hat


@pytest.mark.parametrize("instance", range(100))
def test_affine_equivariance(instance):
    rng = Seed(99, instance).rng()
    y, _ = random_instance(rng, n_range=(40, 80))
    a = float(rng.uniform(0.1, 10.0))
    b = float(rng.uniform(-100.0, 100.0))
    config = DetectorConfig(q=float(rng.uniform(0.0, 2.0)), lrv_method=LrvMethod.BLOCK_DIFF)

    fit = detect(y, config)
    mapped = detect(a * y + b, config)
    assert mapped.k_hat == fit.k_hat
    assert mapped.breaks == fit.breaks
    np.testing.assert_allclose(
        mapped.levels, a * np.asarray(fit.levels) + b, rtol=1e-8, atol=1e-8 * (a + abs(b))
    )


def test_detect_with_fixed_sigma_on_constant_data():
    config = DetectorConfig(q=1.0, lrv_method=LrvMethod.FIXED, fixed_sigma=1.0)
    fit = detect(np.full(100, 3.5), config)
    assert fit.k_hat == 0
    assert fit.levels[0] == pytest.approx(3.5)
    assert fit.to_dict()["breaks"] == []


def test_detect_rejects_constant_data_with_estimated_sigma():
    with pytest.raises(DegenerateDataError):
        detect(np.full(100, 3.5), DetectorConfig(q=1.0))


def test_detect_calibrates_from_alpha():
    y = Seed(8).rng().standard_normal(120)
    y[60:] += 4.0
    config = DetectorConfig(alpha=0.1, mc_reps=200, seed=Seed(5))
    fit = detect(y, config)
    assert fit.alpha == 0.1
    assert fit.lrv is not None and fit.lrv.block_length == 5
    assert fit.q_used == detect(y, config).q_used
    assert fit.k_hat >= 1
    assert min(abs(b - 61) for b in fit.breaks) <= 3


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(),
        dict(alpha=0.5, q=1.0),
        dict(alpha=1.5),
        dict(q=1.0, min_len=0),
        dict(q=1.0, lrv_method=LrvMethod.FIXED),
        dict(alpha=0.5, mc_reps=50),
    ],
)
def test_detector_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        DetectorConfig(**kwargs)


def test_detect_rejects_oversized_min_len():
    with pytest.raises(ConfigurationError):
        detect(np.arange(10.0), DetectorConfig(q=1.0, min_len=11))


def test_fit_json_schema():
    fit = segment([0, 0, 0, 10, 10, 10], ScaleConfig(n=6, min_len=1, q=1.0, sigma=1.0))
    data = fit.to_dict()
    assert set(data) == {
        "k_hat", "breaks", "levels", "level_intervals", "q", "alpha",
        "sigma", "min_len", "sse", "v_value",
    }
    assert data["breaks"] == [4]
    assert len(data["level_intervals"]) == 2


@pytest.mark.slow
def test_detect_runtime_at_n_1000(ma1_signal):
    y = ma1_signal.sample() + Seed(1).rng().standard_normal(1000)
    config = DetectorConfig(q=0.5, min_len=10)
    start = time.perf_counter()
    fit = detect(y, config)
    assert time.perf_counter() - start < 1.0
    assert fit.k_hat >= 1


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0.1, 0.5])
def test_null_overestimation_is_controlled(alpha):
    config = DetectorConfig(
        alpha=alpha, min_len=10, lrv_method=LrvMethod.IID_DIFF, mc_reps=10000
    )
    seed = Seed(31337)
    false_alarms = sum(
        detect(seed.rng(r).standard_normal(1000), config).k_hat > 0 for r in range(500)
    )
    assert false_alarms / 500 <= alpha + 0.05
