import numpy as np
import pytest

from conftest import bin_frequency, tone, white_noise
from mdat.bands import band_of_bin, table_for
from mdat.forward import (Analyzer, InsufficientHistory, PredictorState, band_energy,
                          band_snr, forward, perception, spread_convolve, spread_db,
                          spreading_matrix, tonality, unpredictability,
                          weighted_unpredictability)
from mdat.spectrum import SpectralFrame, dft, frames_of


def test_cold_start_is_unpredictable():
    spectrum = dft(frames_of(white_noise(16000))[0])
    state = PredictorState()
    assert np.all(unpredictability(spectrum, state) == 1.0)
    state.push(*np.zeros((2, 128)))
    assert np.all(unpredictability(spectrum, state) == 1.0)


def test_predictor_needs_two_frames():
    state = PredictorState()
    state.push(np.ones(128), np.zeros(128))
    with pytest.raises(InsufficientHistory):
        state.predict()
    state.push(np.full(128, 3.0), np.full(128, 0.5))
    r, f = state.predict(4)
    assert r == 5.0
    assert f == 1.0


def test_stationary_tone_is_predictable():
    table = table_for(16000)
    frames = frames_of(tone(16000, bin_frequency(16000, 10), seconds=0.1))
    results = list(forward(frames, table))
    _, side = results[3]
    assert side.c[10] < 1e-6
    vector, _ = results[0]
    # cold start: ec = e
    np.testing.assert_allclose(vector.ec, vector.e, rtol=1e-6)


def test_silence():
    table = table_for(16000)
    vector, side = list(forward(frames_of(np.zeros(1024)), table))[-1]
    assert np.all(vector.e == 0)
    assert np.all(side.c == 0)
    assert np.all(vector.cb == 0)
    assert np.all(vector.snr == 18.0)


def test_spread_at_zero():
    assert 0.999 < 10 ** (spread_db(0.0) / 10) < 1.0


def test_spreading_matrix(table):
    S = spreading_matrix(table)
    assert S.shape == (table.J, table.J)
    assert np.all(S > 0)
    # masking reaches further upward than downward
    assert S[0, 5] > S[5, 0]


def test_tonality_endpoints():
    assert tonality(1.0) == 0.0
    assert tonality(0.0) == 1.0
    assert tonality(np.exp(-1.299 / 0.43)) == pytest.approx(1.0)
    assert band_snr(np.array([0.0, 1.0, 0.5])) == pytest.approx([6.0, 18.0, 12.0])


def test_perception_shapes():
    table = table_for(44100)
    S = spreading_matrix(table)
    rng = np.random.default_rng(5)
    e = rng.uniform(0, 1, table.J + 1)
    ec = e * rng.uniform(0, 1, table.J + 1)
    vector = perception(e, ec, S)
    assert vector.cb.shape == (table.J,)
    assert vector.v_perc().shape == (2 * table.J,)
    np.testing.assert_array_equal(vector.v2()[0::2], e[1:])
    np.testing.assert_array_equal(vector.v2()[1::2], ec[1:])
    np.testing.assert_array_equal(vector.v1()[1::2], vector.cb)
    assert np.all((vector.snr >= 6) & (vector.snr <= 18))


def test_band_energy_is_single_sided_energy(rng):
    table = table_for(16000)
    spectrum = dft(frames_of(rng.standard_normal(256))[0])
    e = band_energy(spectrum, table)
    assert e.sum() == pytest.approx(np.sum(np.abs(spectrum.bins[:128]) ** 2), rel=1e-12)


def test_analyzer_rounds_c_before_ec(rng):
    table = table_for(16000)
    analyzer = Analyzer(table)
    for frame in frames_of(rng.standard_normal(1024)):
        spectrum = dft(frame)
        vector, side = analyzer.analyze(spectrum)
    assert side.c.dtype == np.float32
    power = np.abs(spectrum.bins[:128]) ** 2
    expected = np.add.reduceat(power * side.c.astype(float), table.low)
    np.testing.assert_allclose(vector.ec, expected, rtol=1e-12)
    assert side.dc == spectrum.bins[0]
    assert side.nyquist == spectrum.bins[128]


def test_snr_nonincreasing_in_cb():
    cb = np.linspace(0, 2, 201)
    assert np.all(np.diff(band_snr(tonality(cb))) <= 0)


def test_antipodal_prediction_is_unpredictable():
    state = PredictorState()
    state.push(np.ones(128), np.zeros(128))
    state.push(np.ones(128), np.zeros(128))
    spectrum = SpectralFrame(np.full(256, -1.0 + 0j), 0)
    np.testing.assert_allclose(unpredictability(spectrum, state), 1.0)


def test_weighted_unpredictability_hand_sum():
    table = table_for(16000)
    band = band_of_bin(table, 21)
    assert (band.low, band.high) == (21, 22)
    bins = np.zeros(256, dtype=complex)
    bins[21], bins[22] = 2.0, 1.0j
    c = np.zeros(128)
    c[21], c[22] = 0.5, 1.0
    ec = weighted_unpredictability(SpectralFrame(bins, 0), c, table)
    assert ec[band.index] == pytest.approx(3.0)
    assert ec.sum() == pytest.approx(3.0)


def test_spreading_tails_fall_off():
    assert np.all(np.diff(spread_db(np.linspace(0.5, 10, 40))) < 0)
    assert np.all(np.diff(spread_db(np.linspace(-10, -0.5, 40))) > 0)
    for sign in (1, -1):
        assert spread_db(sign * 10.0) < spread_db(sign * 1.0)


def test_spreading_reaches_further_upward(table):
    dz = np.arange(2.0, 9.0)
    assert np.all(spread_db(dz) > spread_db(-dz))
    S = spreading_matrix(table)
    bark = table.bark[1:]
    pairs = [(i, j) for i in range(table.J) for j in range(table.J) if bark[j] - bark[i] >= 2]
    assert pairs
    for i, j in pairs:
        assert S[i, j] > S[j, i]


def test_spread_convolve_unit_response(table, rng):
    S = spreading_matrix(table)
    for j in (0, table.J // 2, table.J - 1):
        e = np.zeros(table.J)
        e[j] = 1.0
        ecb, ct = spread_convolve(e, np.zeros(table.J), S)
        np.testing.assert_allclose(ecb, S[j], rtol=1e-14)
        assert np.all(ct == 0)
    e = rng.uniform(0, 1, table.J)
    ecb, ct = spread_convolve(e, e * rng.uniform(0, 1, table.J), S)
    assert np.all(ct <= ecb)
