import numpy as np
import pytest

from mdat.bands import table_for
from mdat.constants import FRAME_SIZE
from mdat.wav import AudioBuffer


def tone(rate, freq, seconds=0.5, amplitude=0.5, phase=0.0):
    t = np.arange(round(rate * seconds)) / rate
    return amplitude * np.sin(2 * np.pi * freq * t + phase)


def bin_frequency(rate, k):
    return k * rate / FRAME_SIZE


def white_noise(rate, seconds=0.5, amplitude=0.1, seed=0):
    rng = np.random.default_rng(seed)
    return amplitude * rng.standard_normal(round(rate * seconds))


def add_noise(signal, level_db, seed):
    rng = np.random.default_rng(seed)
    rms = np.sqrt(np.mean(signal ** 2))
    return signal + rms * 10 ** (level_db / 20) * rng.standard_normal(signal.size)


def speech_like(rate=16000, seconds=1.0, seed=1):
    """150 Hz harmonics up to 4 kHz under three formant bumps, plus noise at -20 dB."""
    rng = np.random.default_rng(seed)
    t = np.arange(round(rate * seconds)) / rate
    signal = np.zeros(t.size)
    for h in range(1, int(4000 / 150) + 1):
        f = 150.0 * h
        envelope = 0.05 + sum(np.exp(-((f - fc) / 200.0) ** 2) for fc in (500, 1500, 2500))
        signal += envelope * np.sin(2 * np.pi * f * t + rng.uniform(-np.pi, np.pi))
    signal *= 0.5 / np.max(np.abs(signal))
    return add_noise(signal, -20, seed + 100)


def music_like(rate=44100, seconds=1.0, seed=2):
    """Dense partials on bin centres below 2.5 kHz, plus noise at -40 dB."""
    rng = np.random.default_rng(seed)
    n = np.arange(round(rate * seconds))
    signal = np.zeros(n.size)
    for k in range(1, 15):
        signal += np.cos(2 * np.pi * k * n / FRAME_SIZE + rng.uniform(-np.pi, np.pi)) / k
    signal *= 0.5 / np.max(np.abs(signal))
    return add_noise(signal, -40, seed + 100)


def corpus(rate, seconds=1.0):
    """Named test signals at one sample rate."""
    table = table_for(rate)
    signals = {'noise': white_noise(rate, seconds)}
    for band in (table[5], table[table.J // 2], table[table.J]):
        centre = (band.low + band.high) // 2
        signals[f'centre{band.index}'] = tone(rate, bin_frequency(rate, centre), seconds)
        signals[f'edge{band.index}'] = tone(rate, bin_frequency(rate, band.low), seconds)
    if rate == 16000:
        signals['speech'] = speech_like(rate, seconds)
    else:
        signals['music'] = music_like(rate, seconds)
    return signals


@pytest.fixture(params=[16000, 44100])
def rate(request):
    return request.param


@pytest.fixture
def table(rate):
    return table_for(rate)


@pytest.fixture
def speech():
    return AudioBuffer(16000, speech_like())


@pytest.fixture
def music():
    return AudioBuffer(44100, music_like())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
