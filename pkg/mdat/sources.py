# Copyright 2021 Robert Schroll
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

import contextlib
from pathlib import Path
import sys

__doc__ = """
Readers and writers in mdat accept any of

 - a filename or pathlib.Path,
 - '-' for stdin or stdout,
 - an object with a read() method (for input) or write() method (for
   output), opened in binary mode.

File objects passed in are not closed; files opened here are.
"""


@contextlib.contextmanager
def open_input(source):
    # Pass through objects that implement read()
    if hasattr(source, 'read'):
        yield source
        return
    if source == '-':
        yield sys.stdin.buffer
        return

    try:
        path = Path(source)
    except TypeError:
        raise FileNotFoundError(f"Could not open {source!r} for reading") from None
    with path.open('rb') as f:
        yield f


@contextlib.contextmanager
def open_output(target):
    if hasattr(target, 'write'):
        yield target
        return
    if target == '-':
        yield sys.stdout.buffer
        return

    try:
        path = Path(target)
    except TypeError:
        raise FileNotFoundError(f"Could not open {target!r} for writing") from None
    with path.open('wb') as f:
        yield f
