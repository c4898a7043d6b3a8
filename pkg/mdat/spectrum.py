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

from collections import namedtuple
import math

import numpy as np

from .constants import FRAME_SIZE

Frame = namedtuple('Frame', ['samples', 'index'])
SpectralFrame = namedtuple('SpectralFrame', ['bins', 'index'])

SYMMETRY_TOL = 1e-6
IMAG_TOL = 1e-9


class EmptySignal(ValueError):
    pass


class SymmetryError(ValueError):
    pass


def frames_of(signal):
    """
    Split a signal into consecutive, non-overlapping frames of FRAME_SIZE
    samples.  The last frame is zero-padded.
    """
    signal = np.asarray(signal, dtype=float)
    if signal.ndim != 1 or signal.size == 0:
        raise EmptySignal("Cannot frame an empty signal")
    n_frames = math.ceil(signal.size / FRAME_SIZE)
    padded = np.zeros(n_frames * FRAME_SIZE)
    padded[:signal.size] = signal
    return [Frame(samples, t) for t, samples in enumerate(padded.reshape(n_frames, FRAME_SIZE))]


def dft(frame):
    # No 1/N on the forward transform
    return SpectralFrame(np.fft.fft(frame.samples), frame.index)


def idft(spectrum):
    """
    Inverse of dft().  The spectrum must be conjugate symmetric, so that the
    time samples are real.
    """
    bins = np.asarray(spectrum.bins)
    mirrored = np.conj(bins[-np.arange(bins.size) % bins.size])
    scale = max(np.max(np.abs(bins)), 1.0)
    if np.max(np.abs(bins - mirrored)) > SYMMETRY_TOL * scale:
        raise SymmetryError(f"Spectrum of frame {spectrum.index} is not conjugate symmetric")

    samples = np.fft.ifft(bins)
    residue = np.max(np.abs(samples.imag), initial=0.0)
    assert residue < IMAG_TOL * scale, f"imaginary residue {residue} in frame {spectrum.index}"
    return Frame(samples.real.copy(), spectrum.index)


def amp_phase(spectrum, k):
    """
    Amplitude and phase of bin k.  The phase lies in (-pi, pi]; a zero bin
    has phase 0.
    """
    value = complex(spectrum.bins[k])
    r = abs(value)
    if r == 0:
        return 0.0, 0.0
    f = math.atan2(value.imag, value.real)
    if f == -math.pi:
        f = math.pi
    return r, f


def amplitudes_phases(bins):
    """Vectorized amp_phase() over an array of bins."""
    bins = np.asarray(bins)
    r = np.abs(bins)
    f = np.angle(bins)
    f[f == -np.pi] = np.pi
    f[r == 0] = 0.0
    return r, f
