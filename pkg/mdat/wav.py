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
import io
import logging
import struct

import numpy as np
from scipy.io import wavfile

from .bands import SUPPORTED_RATES
from .sources import open_input, open_output

log = logging.getLogger(__name__)

S_RIFF = struct.Struct('<4sI4s')
S_CHUNK = struct.Struct('<4sI')

PCM16_SCALE = 32768.0


class AudioBuffer(namedtuple('AudioBuffer', ['sample_rate', 'samples'])):
    __slots__ = ()

    @property
    def supported(self):
        return self.sample_rate in SUPPORTED_RATES


class WavFormatError(ValueError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedCodec(WavFormatError):
    pass


def check_chunks(data):
    """
    Walk the RIFF chunk list of a WAV file held in `data`, raising
    WavFormatError at the first header or chunk that does not fit.
    """
    if len(data) < S_RIFF.size:
        raise WavFormatError("Truncated RIFF header", len(data))
    riff, _, wave = S_RIFF.unpack_from(data, 0)
    if riff != b'RIFF' or wave != b'WAVE':
        raise WavFormatError("Not a RIFF/WAVE file", 0)

    offset = S_RIFF.size
    seen = set()
    while offset < len(data):
        if offset + S_CHUNK.size > len(data):
            raise WavFormatError("Truncated chunk header", offset)
        name, size = S_CHUNK.unpack_from(data, offset)
        body = offset + S_CHUNK.size
        if body + size > len(data):
            raise WavFormatError(f"Chunk {name!r} runs past the end of the file", body)
        seen.add(name)
        # Chunks are word aligned
        offset = body + size + (size & 1)
    for name in (b'fmt ', b'data'):
        if name not in seen:
            raise WavFormatError(f"Missing {name.decode().strip()!r} chunk", len(data))


def read_wav(source):
    """
    Read a 16 bit PCM or 32 bit float WAV file as mono samples in [-1, 1].
    Stereo is averaged.  Any sample rate is accepted here; processing refuses
    unsupported ones.
    """
    with open_input(source) as f:
        data = f.read()
    check_chunks(data)
    try:
        rate, samples = wavfile.read(io.BytesIO(data))
    except ValueError as err:
        raise WavFormatError(str(err)) from None

    if samples.dtype == np.int16:
        samples = samples / PCM16_SCALE
    elif samples.dtype == np.float32:
        samples = samples.astype(float)
    else:
        raise UnsupportedCodec(f"Unsupported sample format {samples.dtype}; "
                               "expected 16 bit PCM or 32 bit float")
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if not np.all(np.isfinite(samples)):
        raise WavFormatError("Non-finite samples")

    buffer = AudioBuffer(int(rate), samples)
    if not buffer.supported:
        log.warning("Sample rate %d Hz is not supported for processing", rate)
    return buffer


def write_wav(target, buffer):
    """
    Write 16 bit PCM, clipping to [-1, 1].  Returns the number of clipped
    samples.
    """
    samples = np.asarray(buffer.samples, dtype=float)
    if samples.size == 0:
        raise ValueError("Cannot write an empty buffer")
    if not np.all(np.isfinite(samples)):
        raise ValueError("Cannot write non-finite samples")

    clip_count = int(np.count_nonzero(np.abs(samples) > 1.0))
    if clip_count:
        log.warning("Clipped %d samples", clip_count)
    pcm = np.clip(np.round(samples * PCM16_SCALE), -PCM16_SCALE, PCM16_SCALE - 1).astype(np.int16)

    stream = io.BytesIO()
    wavfile.write(stream, int(buffer.sample_rate), pcm)
    with open_output(target) as f:
        f.write(stream.getvalue())
    return clip_count
