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
Critical-band partitions of the 256 point FFT.

Each table splits the single-sided bins 0..127 into bands.  Band 0 is the DC
bin; bands 1..J are the AC bands.  A row is (low bin, high bin, bark value),
with both bins inclusive.  The conjugate-symmetric half of the spectrum and
the Nyquist bin are not part of any band.
"""

import csv
from collections import namedtuple

import numpy as np

from .constants import HALF_SIZE

Band = namedtuple('Band', ['index', 'low', 'high', 'width', 'bark'])


class UnsupportedSampleRate(ValueError):
    pass


class InvalidTable(ValueError):
    pass


# (low, high, bark) per band, band index implied by position
ROWS_16000 = [
    (0, 0, 0.00), (1, 1, 0.63), (2, 2, 1.26), (3, 3, 1.88),
    (4, 4, 2.50), (5, 5, 3.11), (6, 6, 3.70), (7, 7, 4.28),
    (8, 8, 4.85), (9, 9, 5.39), (10, 10, 5.92), (11, 11, 6.43),
    (12, 12, 6.93), (13, 13, 7.40), (14, 14, 7.85), (15, 15, 8.29),
    (16, 16, 8.70), (17, 17, 9.10), (18, 18, 9.49), (19, 19, 9.85),
    (20, 20, 10.20), (21, 22, 10.85), (23, 24, 11.44), (25, 26, 11.99),
    (27, 28, 12.50), (29, 30, 12.96), (31, 32, 13.39), (33, 34, 13.78),
    (35, 36, 14.15), (37, 39, 14.57), (40, 42, 15.03), (43, 45, 15.45),
    (46, 48, 15.84), (49, 51, 16.19), (52, 55, 16.57), (56, 59, 16.97),
    (60, 63, 17.33), (64, 68, 17.71), (69, 73, 18.09), (74, 78, 18.44),
    (79, 84, 18.80), (85, 90, 19.17), (91, 97, 19.53), (98, 104, 19.89),
    (105, 112, 20.25), (113, 120, 20.61), (121, 127, 20.92),
]

# Bands 38-41 share the bark value 24.00
ROWS_44100 = [
    (0, 0, 0.00), (1, 1, 1.73), (2, 2, 3.41), (3, 3, 4.99),
    (4, 4, 6.45), (5, 5, 7.75), (6, 6, 8.92), (7, 7, 9.96),
    (8, 8, 10.87), (9, 9, 11.68), (10, 10, 12.39), (11, 11, 13.03),
    (12, 12, 13.61), (13, 13, 14.12), (14, 14, 14.59), (15, 15, 15.01),
    (16, 16, 15.40), (17, 17, 15.76), (18, 19, 16.39), (20, 21, 16.95),
    (22, 23, 17.45), (24, 25, 17.89), (26, 27, 18.30), (28, 29, 18.67),
    (30, 31, 19.02), (32, 34, 19.41), (35, 37, 19.85), (38, 40, 20.25),
    (41, 43, 20.62), (44, 47, 21.01), (48, 51, 21.43), (52, 55, 21.81),
    (56, 59, 22.15), (60, 64, 22.51), (65, 69, 22.87), (70, 75, 23.23),
    (76, 81, 23.59), (82, 88, 23.93), (89, 96, 24.00), (97, 105, 24.00),
    (106, 115, 24.00), (116, 127, 24.00),
]

ROWS = {
    16000: ROWS_16000,
    44100: ROWS_44100,
}

SUPPORTED_RATES = tuple(sorted(ROWS))


class BandTable:
    """
    An immutable partition of bins 0..HALF_SIZE-1 into critical bands.

    sample_rate: The sampling frequency (Hz) the table was designed for.
    bands: Tuple of Band, ordered by index.
    J: Number of AC bands, which is also the highest band index.
    """

    def __init__(self, sample_rate, rows):
        self.sample_rate = sample_rate
        self.bands = tuple(Band(b, low, high, high - low + 1, bark)
                           for b, (low, high, bark) in enumerate(rows))
        self.validate()

        self.J = len(self.bands) - 1
        self.low = np.array([band.low for band in self.bands])
        self.high = np.array([band.high for band in self.bands])
        self.widths = np.array([band.width for band in self.bands])
        self.bark = np.array([band.bark for band in self.bands], dtype=float)
        # Band index of every bin
        self.bin_band = np.repeat(np.arange(len(self.bands)), self.widths)
        for arr in (self.low, self.high, self.widths, self.bark, self.bin_band):
            arr.setflags(write=False)

    def validate(self):
        bands = self.bands
        if not bands or bands[0].low != 0 or bands[0].high != 0:
            raise InvalidTable("Band 0 must be exactly the DC bin")
        for prev, band in zip(bands, bands[1:]):
            if band.low != prev.high + 1:
                raise InvalidTable(f"Band {band.index} does not start after band {prev.index}")
            if band.bark < prev.bark:
                raise InvalidTable(f"Bark value decreases at band {band.index}")
        for band in bands:
            if band.width < 1:
                raise InvalidTable(f"Band {band.index} is empty")
        if bands[-1].high != HALF_SIZE - 1:
            raise InvalidTable(f"Bands must end at bin {HALF_SIZE - 1}")
        if sum(band.width for band in bands) != HALF_SIZE:
            raise InvalidTable(f"Band widths must sum to {HALF_SIZE}")

        # The smoother needs every band with three or more bins in a single
        # run reaching the top of the spectrum.
        first = self.first_wide_band(bands)
        if first is not None and any(band.width < 3 for band in bands[first:]):
            raise InvalidTable("Bands with width >= 3 are not contiguous")

    @staticmethod
    def first_wide_band(bands):
        for band in bands:
            if band.width >= 3:
                return band.index
        return None

    def __len__(self):
        return len(self.bands)

    def __iter__(self):
        return iter(self.bands)

    def __getitem__(self, b):
        return self.bands[b]

    def __repr__(self):
        return f'<BandTable {self.sample_rate} Hz, J={self.J}>'

    def band_slice(self, b):
        band = self.bands[b]
        return slice(band.low, band.high + 1)

    @property
    def ac_bands(self):
        return self.bands[1:]

    @property
    def smoothing_bands(self):
        """The contiguous run of bands holding three or more bins."""
        first = self.first_wide_band(self.bands)
        if first is None:
            return ()
        return self.bands[first:]

    def to_csv(self, fileobj):
        writer = csv.writer(fileobj, lineterminator='\n')
        writer.writerow(['band', 'low', 'high', 'width', 'bark'])
        for band in self.bands:
            writer.writerow([band.index, band.low, band.high, band.width, f'{band.bark:.2f}'])


_TABLES = {}


def table_for(sample_rate):
    """Return the band table for a supported sampling frequency (Hz)."""
    try:
        rows = ROWS[int(sample_rate)]
    except (KeyError, TypeError, ValueError):
        rates = ', '.join(str(r) for r in SUPPORTED_RATES)
        raise UnsupportedSampleRate(
            f"Unsupported sample rate {sample_rate!r}; supported rates are {rates} Hz") from None
    rate = int(sample_rate)
    if rate not in _TABLES:
        _TABLES[rate] = BandTable(rate, rows)
    return _TABLES[rate]


def band_of_bin(table, k):
    """Return the band of `table` containing bin `k`."""
    if not 0 <= k < HALF_SIZE:
        raise IndexError(f"Bin {k} outside 0..{HALF_SIZE - 1}")
    return table.bands[table.bin_band[k]]
