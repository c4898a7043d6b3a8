# Copyright 2026 The mdat authors
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

__doc__ = """
The forward transform: from DFT frames to band energies and band SNRs.

Per frame t, with r(k) and f(k) the amplitude and phase of bin k:

    e(b)   = sum over B(b) of r(k)^2
    c(k)   = |s(k) - s_pred(k)| / (|s(k)| + |s_pred(k)|)
    ec(b)  = sum over B(b) of r(k)^2 c(k)
    ecb    = S^T e,  ct = S^T ec          (AC bands only)
    cb     = ct / ecb
    tb     = clamp(-0.299 - 0.43 ln cb, 0, 1)
    snr    = 18 tb + 6 (1 - tb)  dB

s_pred extrapolates amplitude and phase linearly from the two previous
frames, so the transform carries a small amount of state per channel.
"""

from collections import namedtuple

import numpy as np

from .constants import (HALF_SIZE, NMT, NYQUIST_BIN, SPREAD_A, SPREAD_B,
                        SPREAD_C, SPREAD_D, TMN, TONALITY_OFFSET, TONALITY_SLOPE)
from .spectrum import amplitudes_phases, dft


class InsufficientHistory(ValueError):
    pass


SideInfo = namedtuple('SideInfo', ['phases', 'c', 'dc', 'nyquist'])
SideInfo.__doc__ = """\
What the inverse needs besides the perception payload: the phases and the
unpredictability c(k) of bins 0..127 (32 bit floats, as stored), and the DC
and Nyquist bins verbatim."""


class PerceptionVector(namedtuple('PerceptionVector',
                                  ['e', 'ec', 'ecb', 'ct', 'cb', 'tb', 'snr'])):
    """
    Perception variables of one frame.  e and ec cover bands 0..J; the spread
    quantities ecb, ct, cb, tb and snr cover the AC bands 1..J only.
    """
    __slots__ = ()

    @staticmethod
    def _interleave(first, second):
        out = np.empty(2 * len(first))
        out[0::2] = first
        out[1::2] = second
        return out

    def v_perc(self):
        return self._interleave(self.e[1:], self.snr)

    def v1(self):
        return self._interleave(self.e[1:], self.cb)

    def v2(self):
        return self._interleave(self.e[1:], self.ec[1:])


class PredictorState:
    """
    Amplitude and phase history of the two previous frames, bins 0..127.
    """

    def __init__(self, n_bins=HALF_SIZE):
        self.r1 = np.zeros(n_bins)
        self.r2 = np.zeros(n_bins)
        self.f1 = np.zeros(n_bins)
        self.f2 = np.zeros(n_bins)
        self.frames_seen = 0

    def push(self, r, f):
        self.r2, self.f2 = self.r1, self.f1
        self.r1 = np.array(r, dtype=float)
        self.f1 = np.array(f, dtype=float)
        self.frames_seen += 1

    def predict(self, k=None):
        """
        Linear extrapolation (r_pred, f_pred) of bin k, or of all bins when k
        is None.
        """
        if self.frames_seen < 2:
            raise InsufficientHistory(f"Prediction needs two frames, have {self.frames_seen}")
        idx = slice(None) if k is None else k
        r_pred = 2 * self.r1[idx] - self.r2[idx]
        f_pred = 2 * self.f1[idx] - self.f2[idx]
        return r_pred, f_pred


def band_sum(values, table):
    return np.add.reduceat(np.asarray(values)[:HALF_SIZE], table.low)


def band_energy(spectrum, table):
    return band_sum(np.abs(spectrum.bins[:HALF_SIZE]) ** 2, table)


def unpredictability(spectrum, state):
    """
    c(k) for bins 0..127.  Without two frames of history every bin counts
    as fully unpredictable.
    """
    bins = np.asarray(spectrum.bins[:HALF_SIZE])
    if state.frames_seen < 2:
        return np.ones(bins.size)

    r_pred, f_pred = state.predict()
    predicted = r_pred * np.exp(1j * f_pred)
    num = np.abs(bins - predicted)
    den = np.abs(bins) + np.abs(r_pred)
    c = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return np.clip(c, 0.0, 1.0)


def weighted_unpredictability(spectrum, c, table):
    return band_sum(np.abs(spectrum.bins[:HALF_SIZE]) ** 2 * np.asarray(c)[:HALF_SIZE], table)


def spread_db(dz):
    """Schroeder spreading in dB, dz = bark(maskee) - bark(masker)."""
    x = np.asarray(dz, dtype=float) + SPREAD_C
    return SPREAD_A + SPREAD_B * x - SPREAD_D * np.sqrt(1.0 + x * x)


def spreading_matrix(table):
    """
    J x J matrix over the AC bands with S[b', b] = spread(bark(b'), bark(b)),
    rows indexing the masker b'.
    """
    bark = table.bark[1:]
    dz = bark[np.newaxis, :] - bark[:, np.newaxis]
    return 10.0 ** (spread_db(dz) / 10.0)


def spread_convolve(e, ec, S):
    return S.T @ e, S.T @ ec


def noise_to_signal(ecb, ct):
    ecb = np.asarray(ecb, dtype=float)
    ct = np.asarray(ct, dtype=float)
    return np.divide(ct, ecb, out=np.zeros_like(ct), where=ecb > 0)


def tonality(cb):
    cb = np.asarray(cb, dtype=float)
    with np.errstate(divide='ignore'):
        # ln(0) = -inf clamps to 1
        raw = TONALITY_OFFSET + TONALITY_SLOPE * np.log(cb)
    return np.clip(raw, 0.0, 1.0)


def band_snr(tb):
    tb = np.asarray(tb, dtype=float)
    return TMN * tb + NMT * (1.0 - tb)


def perception(e, ec, S):
    """
    Full PerceptionVector from band energies and weighted unpredictabilities
    over bands 0..J.
    """
    e = np.asarray(e, dtype=float)
    ec = np.asarray(ec, dtype=float)
    ecb, ct = spread_convolve(e[1:], ec[1:], S)
    cb = noise_to_signal(ecb, ct)
    tb = tonality(cb)
    return PerceptionVector(e, ec, ecb, ct, cb, tb, band_snr(tb))


class Analyzer:
    # Forward transform of a single channel; frames must arrive in order.

    def __init__(self, table):
        self.table = table
        self.S = spreading_matrix(table)
        self.state = PredictorState()

    def analyze(self, spectrum):
        bins = np.asarray(spectrum.bins)
        r, f = amplitudes_phases(bins[:HALF_SIZE])

        # Round to the stored precision first so that the payload agrees
        # with its own side info.
        c = unpredictability(spectrum, self.state).astype(np.float32)
        e = band_energy(spectrum, self.table)
        ec = weighted_unpredictability(spectrum, c.astype(float), self.table)
        self.state.push(r, f)

        side = SideInfo(f.astype(np.float32), c, complex(bins[0]), complex(bins[NYQUIST_BIN]))
        return perception(e, ec, self.S), side


def forward(frames, table):
    """
    Forward transform of a sequence of Frames (or SpectralFrames) in
    temporal order.  Yields (PerceptionVector, SideInfo) per frame.
    """
    analyzer = Analyzer(table)
    for frame in frames:
        spectrum = frame if hasattr(frame, 'bins') else dft(frame)
        yield analyzer.analyze(spectrum)
