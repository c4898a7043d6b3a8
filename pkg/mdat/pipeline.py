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

import logging

import numpy as np

from .bands import table_for
from .constants import DEFAULTS
from .container import FrameRecord, MdatFile
from .forward import forward, perception, spreading_matrix
from .inverse import invert
from .spectrum import frames_of

log = logging.getLogger(__name__)


class FrameRangeError(IndexError):
    """A requested frame range reaches outside the file."""


def analyze(buffer, *, progress_cb=lambda x: None):
    """
    Run the forward transform over a whole signal.

    buffer: An AudioBuffer (sample_rate, samples) with mono samples.  The
            sample rate must be one with a band table.
    progress_cb: A function which will be called with a progress percentage
                 between 0 and 100 after every frame.  If this callback
                 raises an error, analysis stops and the error propagates.

    Returns an MdatFile holding (e, ec, side info) for every frame.
    """
    table = table_for(buffer.sample_rate)
    frames = frames_of(buffer.samples)

    records = []
    for t, (vector, side) in enumerate(forward(frames, table)):
        records.append(FrameRecord(vector.e, vector.ec, side))
        progress_cb((t + 1) / len(frames) * 100)

    log.info("Analysed %d frames at %d Hz (J = %d)", len(records), table.sample_rate, table.J)
    return MdatFile(table.sample_rate, len(buffer.samples), records)


def synthesize(mdat, *,
               tau=DEFAULTS['tau'],
               mode=DEFAULTS['mode'],
               solver=DEFAULTS['solver'],
               jobs=DEFAULTS['jobs'],
               progress_cb=lambda x: None):
    """
    Rebuild the time signal of an MdatFile.

    tau: Smoothing flow time.  0 gives the two-constraint weights unchanged.
    mode: 'v2', 'v1' or 'direct'; how the per-band theta is obtained.
    solver: Bounded least-squares solver for mode 'v1'.
    jobs: Number of frames inverted in parallel.
    progress_cb: As for analyze().

    Returns the samples, trimmed to the original length, and the list of
    FrameDiagnostics.
    """
    samples, diagnostics = invert(mdat.frames, mdat.table, mdat.original_length,
                                  mode=mode, tau=tau, solver=solver, jobs=jobs,
                                  progress_cb=progress_cb)
    log.info("Synthesised %d samples (mode %s, tau %g)", samples.size, mode, tau)
    return samples, diagnostics


def roundtrip(buffer, *, progress_cb=lambda x: None, **options):
    """
    analyze() followed by synthesize().  Progress runs 0-50 through the
    analysis and 50-100 through the synthesis.

    Returns (mdat, samples, diagnostics).
    """
    mdat = analyze(buffer, progress_cb=lambda x: progress_cb(x / 2))
    samples, diagnostics = synthesize(mdat, progress_cb=lambda x: progress_cb(50 + x / 2),
                                      **options)
    return mdat, samples, diagnostics


def dump_values(mdat, what, frames):
    """
    Per-frame values of one quantity for the dump command.

    what: One of 'c', 'e', 'ec', 'cb', 'tb', 'snr'.
    frames: range of frame indices.

    Returns (index, columns): the row index values and one array per frame.
    """
    if not frames or frames.start < 0 or frames.stop > mdat.frame_count:
        raise FrameRangeError(f"Frame range {frames.start}..{frames.stop - 1} outside "
                         f"0..{mdat.frame_count - 1}")
    table = mdat.table
    if what == 'c':
        index = range(len(mdat.frames[0].side.c))
        columns = [np.asarray(mdat.frames[t].side.c, dtype=float) for t in frames]
    elif what in ('e', 'ec'):
        index = range(table.J + 1)
        columns = [np.asarray(getattr(mdat.frames[t], what)) for t in frames]
    elif what in ('cb', 'tb', 'snr'):
        S = spreading_matrix(table)
        index = range(1, table.J + 1)
        columns = [getattr(perception(mdat.frames[t].e, mdat.frames[t].ec, S), what)
                   for t in frames]
    else:
        raise ValueError(f"Cannot dump {what!r}")
    return index, columns
