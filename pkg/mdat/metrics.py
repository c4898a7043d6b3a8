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
import csv

import numpy as np

from .constants import HALF_SIZE
from .forward import band_energy
from .spectrum import dft, frames_of

# Relative band errors are taken against max(e, ENERGY_FLOOR * sum e)
ENERGY_FLOOR = 1e-12

ComparisonReport = namedtuple('ComparisonReport', [
    'relative_l2',
    'band_energy_max_rel_error',
    'theta_max_abs_error',
    'clip_count',
    'clamped_fraction',
    'csv_paths',
], defaults=(0.0, 0, 0.0, ()))


def relative_l2(original, reconstructed):
    """||s - s'|| / ||s||, defined as 0 for a silent original."""
    original = np.asarray(original, dtype=float)
    reconstructed = np.asarray(reconstructed, dtype=float)
    if original.shape != reconstructed.shape:
        raise ValueError(f"Length mismatch: {original.size} vs {reconstructed.size} samples")
    norm = np.linalg.norm(original)
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(original - reconstructed) / norm)


def band_energies(signal, table):
    return np.array([band_energy(dft(frame), table) for frame in frames_of(signal)])


def band_energy_errors(original, reconstructed, table):
    """
    Largest relative band energy error of every frame, comparing the forward
    analysis of both signals.
    """
    e = band_energies(original, table)
    e_rec = band_energies(reconstructed, table)
    floor = ENERGY_FLOOR * e.sum(axis=1, keepdims=True)
    denom = np.maximum(e, floor)
    err = np.divide(np.abs(e_rec - e), denom, out=np.zeros_like(e), where=denom > 0)
    return err.max(axis=1)


def theta_error(records, diagnostics):
    """Largest |sum c rho - ec/e| over the active bands of all frames."""
    worst = 0.0
    for (e, ec, _), diag in zip(records, diagnostics):
        e = np.asarray(e, dtype=float)
        active = e > 0
        active[0] = False
        if not active.any():
            continue
        reference = np.asarray(ec, dtype=float)[active] / e[active]
        worst = max(worst, float(np.max(np.abs(diag.achieved[active] - reference))))
    return worst


def clamped_fraction(records, diagnostics):
    n_active = sum(int(np.count_nonzero(np.asarray(e)[1:] > 0)) for e, _, _ in records)
    n_clamped = sum(len(d.clamped) for d in diagnostics)
    return n_clamped / n_active if n_active else 0.0


def compare(original, reconstructed, table, *, records=None, diagnostics=None,
            clip_count=0, csv_paths=()):
    original = np.asarray(original, dtype=float)
    reconstructed = np.asarray(reconstructed, dtype=float)
    rel = relative_l2(original, reconstructed)
    if original.size:
        band_err = float(np.max(band_energy_errors(original, reconstructed, table)))
    else:
        band_err = 0.0
    theta_err = 0.0
    clamped = 0.0
    if records is not None and diagnostics is not None:
        theta_err = theta_error(records, diagnostics)
        clamped = clamped_fraction(records, diagnostics)
    return ComparisonReport(rel, band_err, theta_err, clip_count, clamped, tuple(csv_paths))


def format_value(value):
    # Shortest representation that reads back to the same float
    return repr(float(value))


def write_spectrum_csv(f, original, reconstructed):
    """
    Amplitude spectra, bins 0..128, of every frame of both signals:
    columns frame, k, original, reconstructed.
    """
    writer = csv.writer(f, lineterminator='\n')
    writer.writerow(['frame', 'k', 'original', 'reconstructed'])
    for frame, frame_rec in zip(frames_of(original), frames_of(reconstructed)):
        amp = np.abs(dft(frame).bins[:HALF_SIZE + 1])
        amp_rec = np.abs(dft(frame_rec).bins[:HALF_SIZE + 1])
        for k in range(HALF_SIZE + 1):
            writer.writerow([frame.index, k, format_value(amp[k]), format_value(amp_rec[k])])


def write_waveform_csv(f, original, reconstructed):
    writer = csv.writer(f, lineterminator='\n')
    writer.writerow(['n', 'original', 'reconstructed'])
    for n, (x, y) in enumerate(zip(original, reconstructed)):
        writer.writerow([n, format_value(x), format_value(y)])


def write_columns_csv(f, index, columns, names):
    """One row per index value, one column per named series."""
    writer = csv.writer(f, lineterminator='\n')
    writer.writerow(['index', *names])
    for i, row in zip(index, zip(*columns)):
        writer.writerow([i, *(format_value(v) for v in row)])
