import numpy as np
import pytest

from beamalign import (
    ArrayGeometry,
    angle_to_spatial,
    make_rician,
    make_single_path,
    steering,
)

TX4 = ArrayGeometry(4)
RX2 = ArrayGeometry(2)
TX8 = ArrayGeometry(8)
RX4 = ArrayGeometry(4)


def test_single_path_boresight_is_all_ones():
    # hand evaluation: alpha = sqrt(8), a_r = ones/sqrt(2), a_t = ones/2
    ch = make_single_path(0.0, 0.0, 1.0, TX4, RX2)
    np.testing.assert_allclose(ch.matrix(), np.ones((2, 4)), atol=1e-14)


def test_single_path_frobenius_norm():
    rng = np.random.default_rng(0)
    for _ in range(20):
        g = complex(rng.standard_normal(), rng.standard_normal())
        ch = make_single_path(rng.uniform(-90, 90), rng.uniform(-90, 90), g, TX8, RX4)
        alpha = g * np.sqrt(8 * 4)
        assert np.linalg.norm(ch.matrix()) ** 2 == pytest.approx(abs(alpha) ** 2, rel=1e-12)


def test_single_path_rank_one():
    ch = make_single_path(33.0, -12.0, 0.7 + 0.2j, TX8, RX4)
    s = np.linalg.svd(ch.matrix(), compute_uv=False)
    assert s[1] < 1e-12 * s[0]


def test_single_path_angle_validation():
    with pytest.raises(ValueError):
        make_single_path(95.0, 0.0, 1.0, TX4, RX2)


def test_rician_requires_paths():
    with pytest.raises(ValueError):
        make_rician(10.0, 0, (-50, 50), (-90, 90), np.random.default_rng(0), TX8, RX4)


def test_rician_large_k_is_los():
    rng = np.random.default_rng(21)
    ch = make_rician(300.0, 4, (-50, 50), (-90, 90), rng, TX8, RX4)
    los = ch.paths[0]
    a_r = steering(angle_to_spatial(los.aoa_deg, RX4), RX4)
    a_t = steering(angle_to_spatial(los.aod_deg, TX8), TX8)
    h_los = los.gain * np.outer(a_r, a_t.conj())
    rel = np.linalg.norm(ch.matrix() - h_los) / np.linalg.norm(h_los)
    assert rel < 1e-6


def test_rician_deterministic_given_stream():
    a = make_rician(13.5, 4, (-50, 50), (-90, 90), np.random.default_rng(99), TX8, RX4)
    b = make_rician(13.5, 4, (-50, 50), (-90, 90), np.random.default_rng(99), TX8, RX4)
    assert a.paths == b.paths
    assert np.array_equal(a.matrix(), b.matrix())


def test_matrix_equals_independent_path_sum():
    rng = np.random.default_rng(4)
    ch = make_rician(13.5, 4, (-50, 50), (-90, 90), rng, TX8, RX4)
    k = 10 ** (13.5 / 10)
    ref = np.zeros((4, 8), dtype=complex)
    for i, p in enumerate(ch.paths):
        w = np.sqrt(k / (1 + k)) if i == 0 else np.sqrt(1 / (1 + k))
        a_r = np.exp(1j * np.arange(4) * np.pi * np.sin(np.radians(p.aoa_deg))) / 2.0
        a_t = np.exp(1j * np.arange(8) * np.pi * np.sin(np.radians(p.aod_deg))) / np.sqrt(8)
        ref += w * p.gain * np.outer(a_r, a_t.conj())
    assert np.max(np.abs(ch.matrix() - ref)) < 1e-12


def test_single_path_is_rician_special_case():
    rng = np.random.default_rng(7)
    rician = make_rician(300.0, 1, (-50, 50), (-90, 90), rng, TX8, RX4)
    los = rician.paths[0]
    g = los.gain / np.sqrt(8 * 4)
    direct = make_single_path(los.aod_deg, los.aoa_deg, g, TX8, RX4)
    assert np.max(np.abs(rician.matrix() - direct.matrix())) < 1e-12


def test_rician_mean_power():
    # Monte Carlo oracle: E ||H||_F^2 = N*M*(K + L - 1)/(K + 1) for CN(0,1) gains
    rng = np.random.default_rng(3)
    k_db, n_paths, trials = 13.5, 4, 100_000
    acc = 0.0
    for _ in range(trials):
        ch = make_rician(k_db, n_paths, (-50, 50), (-90, 90), rng, TX8, RX4)
        acc += np.linalg.norm(ch.matrix()) ** 2
    k = 10 ** (k_db / 10)
    predicted = 8 * 4 * (k + n_paths - 1) / (k + 1)
    assert acc / trials == pytest.approx(predicted, rel=0.02)


def test_nlos_normalization_option():
    rng = np.random.default_rng(12)
    ch = make_rician(13.5, 4, (-50, 50), (-90, 90), rng, TX8, RX4, nlos_normalized=True)
    w = ch.path_weights()
    k = 10 ** (13.5 / 10)
    assert w[0] == pytest.approx(np.sqrt(k / (1 + k)))
    assert w[1] == pytest.approx(np.sqrt(1 / (1 + k)) / np.sqrt(3))
