# container.py
# Reading and writing the MDAT payload file.
#
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
Byte layout, little-endian throughout, no padding:

  header (24 bytes)
    4s  magic 'MDAT'
    H   version
    I   sample rate, Hz
    Q   original length, samples
    I   frame count = ceil(original length / 256)
    H   J, the highest band index

  frame record (16 (J + 1) + 1056 bytes), frame count times
    (J + 1) d   e(b),  b = 0..J
    (J + 1) d   ec(b), b = 0..J
    128 f       c(k),  k = 0..127
    128 f       phase(k), k = 0..127
    2 d         DC bin (real, imag)
    2 d         Nyquist bin (real, imag)

File size = 24 + frame count * record size.
"""

from collections import namedtuple
import math
import struct

import numpy as np

from .bands import UnsupportedSampleRate, table_for
from .constants import FRAME_SIZE, HALF_SIZE, MDAT_MAGIC, MDAT_VERSION
from .forward import SideInfo
from .sources import open_input, open_output

FrameRecord = namedtuple('FrameRecord', ['e', 'ec', 'side'])


class MdatFile(namedtuple('MdatFile', ['sample_rate', 'original_length', 'frames', 'version'],
                          defaults=(MDAT_VERSION,))):
    __slots__ = ()

    @property
    def frame_count(self):
        return len(self.frames)

    @property
    def table(self):
        return table_for(self.sample_rate)

    @property
    def J(self):
        return self.table.J


S_HEADER = struct.Struct('<4sHIQIH')
HEADER_SIZE = S_HEADER.size


class InvalidFormat(ValueError):
    pass


class UnsupportedVersion(InvalidFormat):
    pass


def frame_struct(J):
    n = J + 1
    return struct.Struct(f'<{n}d{n}d{HALF_SIZE}f{HALF_SIZE}f4d')


def record_size(J):
    return frame_struct(J).size


def expected_frames(original_length):
    return math.ceil(original_length / FRAME_SIZE)


def check_payload(mdat):
    if mdat.frame_count != expected_frames(mdat.original_length):
        raise InvalidFormat(f"{mdat.frame_count} frames do not match "
                            f"{mdat.original_length} samples")
    n = mdat.J + 1
    for t, (e, ec, side) in enumerate(mdat.frames):
        if len(e) != n or len(ec) != n:
            raise InvalidFormat(f"Frame {t} does not have {n} bands")
        if len(side.c) != HALF_SIZE or len(side.phases) != HALF_SIZE:
            raise InvalidFormat(f"Frame {t} side info does not have {HALF_SIZE} bins")
        if np.any(np.asarray(e) < 0) or np.any(np.asarray(ec) < 0):
            raise InvalidFormat(f"Negative energy in frame {t}")


def write_mdat(target, mdat):
    try:
        table = mdat.table
    except UnsupportedSampleRate as err:
        raise InvalidFormat(str(err)) from None
    check_payload(mdat)

    fmt = frame_struct(table.J)
    with open_output(target) as f:
        f.write(S_HEADER.pack(MDAT_MAGIC, MDAT_VERSION, mdat.sample_rate,
                              mdat.original_length, mdat.frame_count, table.J))
        for e, ec, side in mdat.frames:
            dc = complex(side.dc)
            nyquist = complex(side.nyquist)
            f.write(fmt.pack(*np.asarray(e, dtype=float).tolist(),
                             *np.asarray(ec, dtype=float).tolist(),
                             *np.asarray(side.c, dtype=np.float32).tolist(),
                             *np.asarray(side.phases, dtype=np.float32).tolist(),
                             dc.real, dc.imag, nyquist.real, nyquist.imag))


def readStruct(fmt, data, offset):
    return fmt.unpack_from(data, offset)


def read_mdat(source):
    with open_input(source) as f:
        data = f.read()

    try:
        magic, version, sample_rate, original_length, frame_count, J = \
            readStruct(S_HEADER, data, 0)
    except struct.error:
        raise InvalidFormat("Truncated header") from None
    if magic != MDAT_MAGIC:
        raise InvalidFormat("Header is invalid")
    if version != MDAT_VERSION:
        raise UnsupportedVersion(f"mdat reads version {MDAT_VERSION} files only, not {version}")
    try:
        table = table_for(sample_rate)
    except UnsupportedSampleRate as err:
        raise InvalidFormat(str(err)) from None
    if J != table.J:
        raise InvalidFormat(f"J = {J} does not match the {sample_rate} Hz table (J = {table.J})")
    if frame_count != expected_frames(original_length):
        raise InvalidFormat(f"{frame_count} frames do not match {original_length} samples")

    fmt = frame_struct(J)
    if len(data) != HEADER_SIZE + frame_count * fmt.size:
        raise InvalidFormat(f"File is {len(data)} bytes, expected "
                            f"{HEADER_SIZE + frame_count * fmt.size}")

    n = J + 1
    frames = []
    for t in range(frame_count):
        values = readStruct(fmt, data, HEADER_SIZE + t * fmt.size)
        e = np.array(values[:n])
        ec = np.array(values[n:2 * n])
        c = np.array(values[2 * n:2 * n + HALF_SIZE], dtype=np.float32)
        phases = np.array(values[2 * n + HALF_SIZE:2 * n + 2 * HALF_SIZE], dtype=np.float32)
        dc_re, dc_im, ny_re, ny_im = values[-4:]
        if np.any(e < 0) or np.any(ec < 0):
            raise InvalidFormat(f"Negative energy in frame {t}")
        frames.append(FrameRecord(e, ec, SideInfo(phases, c, complex(dc_re, dc_im),
                                                  complex(ny_re, ny_im))))

    return MdatFile(sample_rate, original_length, frames, version)
