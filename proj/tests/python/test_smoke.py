import numpy as np
import pytest

import bregpr

CFG = bregpr.StftConfig(256, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(5)


def test_round_trip(rng):
    x = rng.standard_normal(4000)
    y = bregpr.istft(bregpr.stft(x, CFG), x.size, CFG)
    assert np.max(np.abs(x - y)) < 1e-10
    assert bregpr.normalization_constant(CFG) == pytest.approx(1.5, abs=1e-12)


def test_bregman_matches_closed_forms():
    r = np.array([[1.0, 2.0], [0.5, 3.0]])
    z = np.array([[2.0, 1.0], [0.25, 3.5]])
    kl = np.sum(r * np.log(r / z) - r + z)
    is_ = np.sum(r / z - np.log(r / z) - 1)
    assert bregpr.bregman(1.0, r, z) == pytest.approx(kl, rel=1e-12)
    assert bregpr.bregman(0.0, r, z) == pytest.approx(is_, rel=1e-12)
    assert bregpr.bregman(2.0, r, z) == pytest.approx(0.5 * np.sum((r - z) ** 2), rel=1e-12)


def test_pgd_reproduces_misi(rng):
    sources = [rng.standard_normal(2048) for _ in range(2)]
    x = sources[0] + sources[1]
    targets = [bregpr.magnitude_power(bregpr.stft(rng.standard_normal(2048), CFG), 1)
               for _ in range(2)]
    a = bregpr.misi(targets, x, 5, CFG)
    spec = bregpr.DivergenceSpec(2.0, bregpr.Direction.right, 1)
    b, trace = bregpr.projected_gradient(targets, x, spec, 1.0, 5, CFG, True)
    for u, v in zip(a, b):
        assert np.max(np.abs(u - v)) < 1e-9
    assert np.max(np.abs(b[0] + b[1] - x)) < 1e-9
    assert len(trace) == 5 and len(trace[0]) == 2


def test_diverged_error_carries_iteration(rng):
    x = rng.standard_normal(1024)
    targets = [bregpr.magnitude_power(bregpr.stft(rng.standard_normal(1024), CFG), 2)
               for _ in range(2)]
    spec = bregpr.DivergenceSpec(2.0, bregpr.Direction.right, 2)
    with pytest.raises(bregpr.DivergedError, match="diverged at iteration"):
        bregpr.projected_gradient(targets, x, spec, 1e300, 5, CFG)


def test_invalid_input_raises_value_error():
    with pytest.raises(ValueError):
        bregpr.DivergenceSpec(3.0, bregpr.Direction.right, 1)
    # 50% Hann overlap is not constant under squared overlap-add.
    with pytest.raises(bregpr.Error, match="COLA"):
        bregpr.normalization_constant(bregpr.StftConfig(1024, 512))
    with pytest.raises(bregpr.Error):
        bregpr.sdr(np.zeros(4), np.ones(4))


def test_sdr_and_wav(tmp_path, rng):
    ref = rng.standard_normal(1600) * 0.1
    noisy = ref + 0.01 * rng.standard_normal(1600)
    assert bregpr.sdr(ref, noisy) == pytest.approx(20.0, abs=1.0)
    assert bregpr.sdri(ref, ref, noisy) > 0
    path = tmp_path / "a.wav"
    assert bregpr.write_wav(path, ref, 16000) == 0
    samples, rate = bregpr.load_wav(path)
    assert rate == 16000
    assert np.max(np.abs(samples - ref)) <= 0.5 / 32768 + 1e-12
