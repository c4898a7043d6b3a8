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

import argparse
import contextlib
import logging
from pathlib import Path
import sys

import numpy as np

from . import metrics, pipeline
from .bands import SUPPORTED_RATES, table_for
from .constants import VERSION, load_defaults
from .container import read_mdat, write_mdat
from .inverse import SOLVERS, THETA_METHODS
from .wav import AudioBuffer, read_wav, write_wav

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_FORMAT = 4
EXIT_NUMERICAL = 5

DUMP_CHOICES = ('c', 'e', 'ec', 'cb', 'tb', 'snr')


def nonnegative(value):
    x = float(value)
    if not x >= 0:
        raise argparse.ArgumentTypeError(f"must be a nonnegative number, not {value}")
    return x


def positive_int(value):
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, not {value}")
    return n


def frame_range(value):
    """'T' for one frame, 'A:B' for frames A..B-1."""
    try:
        if ':' in value:
            start, stop = value.split(':', 1)
            return range(int(start), int(stop))
        t = int(value)
        return range(t, t + 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a frame or range: {value}") from None


@contextlib.contextmanager
def text_output(target):
    if target is None or target == '-':
        yield sys.stdout
        return
    with open(target, 'w', newline='', encoding='utf-8') as f:
        yield f


def report(args, *lines):
    if not args.quiet:
        for line in lines:
            print(line)


def diagnostics_summary(diagnostics):
    clamped = sum(len(d.clamped) for d in diagnostics)
    deviation = max((float(np.max(np.abs(d.deviation))) for d in diagnostics), default=0.0)
    lines = [f"clamped bands: {clamped}",
             f"max theta deviation: {deviation:.3g}"]
    residuals = [d.residual for d in diagnostics if d.residual is not None]
    if residuals:
        lines.append(f"max lsq residual: {max(residuals):.3g}")
    negative = sum(d.negative for d in diagnostics)
    if negative:
        lines.append(f"negative theta components: {negative}")
    return lines


def synthesis_options(args):
    return dict(tau=args.tau, mode=args.mode, solver=args.solver, jobs=args.jobs)


def cmd_analyze(args):
    buffer = read_wav(args.input)
    mdat = pipeline.analyze(buffer)
    write_mdat(args.output, mdat)
    energy = np.array([record.e for record in mdat.frames])
    report(args,
           f"frames: {mdat.frame_count}",
           f"J: {mdat.J}",
           f"sample rate: {mdat.sample_rate}",
           f"total band energy: {energy.sum():.6g}",
           f"max band energy: {energy.max():.6g}")


def cmd_invert(args):
    mdat = read_mdat(args.input)
    samples, diagnostics = pipeline.synthesize(mdat, **synthesis_options(args))
    clip_count = write_wav(args.output, AudioBuffer(mdat.sample_rate, samples))
    report(args, f"clipped samples: {clip_count}", *diagnostics_summary(diagnostics))


def cmd_roundtrip(args):
    buffer = read_wav(args.input)
    mdat, samples, diagnostics = pipeline.roundtrip(buffer, **synthesis_options(args))

    out = Path(args.out or '.')
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem if args.input != '-' else 'stdin'
    wav_path = out / f'{stem}.reconstructed.wav'
    spectrum_path = out / f'{stem}.spectrum.csv'
    waveform_path = out / f'{stem}.waveform.csv'

    clip_count = write_wav(wav_path, AudioBuffer(mdat.sample_rate, samples))
    with text_output(spectrum_path) as f:
        metrics.write_spectrum_csv(f, buffer.samples, samples)
    with text_output(waveform_path) as f:
        metrics.write_waveform_csv(f, buffer.samples, samples)

    result = metrics.compare(buffer.samples, samples, mdat.table,
                             records=mdat.frames, diagnostics=diagnostics,
                             clip_count=clip_count,
                             csv_paths=(str(spectrum_path), str(waveform_path)))
    report(args,
           f"relative l2: {result.relative_l2:.6g}",
           f"max band energy error: {result.band_energy_max_rel_error:.3g}",
           f"max theta error: {result.theta_max_abs_error:.3g}",
           f"clamped fraction: {result.clamped_fraction:.3g}",
           f"clipped samples: {result.clip_count}",
           *(f"wrote {path}" for path in (wav_path, *result.csv_paths)))
    return result


def cmd_compare(args):
    original = read_wav(args.original)
    reconstructed = read_wav(args.reconstructed)
    if original.sample_rate != reconstructed.sample_rate:
        raise ValueError(f"Sample rates differ: {original.sample_rate} vs "
                         f"{reconstructed.sample_rate} Hz")
    result = metrics.compare(original.samples, reconstructed.samples,
                             table_for(original.sample_rate))
    report(args,
           f"relative l2: {result.relative_l2:.6g}",
           f"max band energy error: {result.band_energy_max_rel_error:.3g}")


def cmd_dump(args):
    mdat = read_mdat(args.input)
    frames = args.frames if args.frames is not None else range(mdat.frame_count)
    index, columns = pipeline.dump_values(mdat, args.what, frames)
    with text_output(args.out) as f:
        metrics.write_columns_csv(f, index, columns, [f'frame{t}' for t in frames])


def cmd_tables(args):
    with text_output(args.out) as f:
        table_for(args.rate).to_csv(f)


def build_parser(defaults):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose', action='store_true', help="Log per-frame diagnostics.")
    common.add_argument('-q', '--quiet', action='store_true', help="Do not print the summary.")

    synthesis = argparse.ArgumentParser(add_help=False)
    synthesis.add_argument('--tau', type=nonnegative, default=defaults['tau'],
                           help="Smoothing flow time (0 for none).  Default %(default)s.")
    synthesis.add_argument('--mode', choices=sorted(THETA_METHODS), default=defaults['mode'],
                           help="How band theta is obtained.  Default %(default)s.")
    synthesis.add_argument('--solver', choices=sorted(SOLVERS), default=defaults['solver'],
                           help="Least-squares solver for --mode v1.  Default %(default)s.")
    synthesis.add_argument('--jobs', type=positive_int, default=defaults['jobs'],
                           help="Frames inverted in parallel.  Default %(default)s.")

    parser = argparse.ArgumentParser(
        prog='mdat', description="Many-to-one discrete auditory transform of WAV files.")
    parser.add_argument('--version', action='version', version=VERSION)
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('analyze', parents=[common], help="WAV to MDAT.")
    p.add_argument('input', help="WAV file.  Use '-' for stdin.")
    p.add_argument('output', help="MDAT file.  Use '-' for stdout.")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser('invert', parents=[common, synthesis], help="MDAT to WAV.")
    p.add_argument('input', help="MDAT file.  Use '-' for stdin.")
    p.add_argument('output', help="WAV file.  Use '-' for stdout.")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser('roundtrip', parents=[common, synthesis],
                       help="Analyze, invert and compare, writing WAV and CSV files.")
    p.add_argument('input', help="WAV file.")
    p.add_argument('--out', help="Directory for the output files.  Default: current directory.")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser('compare', parents=[common], help="Compare two WAV files.")
    p.add_argument('original')
    p.add_argument('reconstructed')
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser('dump', parents=[common], help="Write one quantity of an MDAT file as CSV.")
    p.add_argument('input', help="MDAT file.")
    p.add_argument('what', choices=DUMP_CHOICES)
    p.add_argument('--frames', type=frame_range,
                   help="Frame T or range A:B (B excluded).  Default: all frames.")
    p.add_argument('--out', help="CSV file.  Omit to write to stdout.")
    p.set_defaults(func=cmd_dump)

    p = sub.add_parser('tables', parents=[common], help="Write a band table as CSV.")
    p.add_argument('--rate', type=int, choices=SUPPORTED_RATES, required=True)
    p.add_argument('--out', help="CSV file.  Omit to write to stdout.")
    p.set_defaults(func=cmd_tables)

    return parser


def main(argv=None):
    parser = build_parser(load_defaults())
    args = parser.parse_args(argv)
    if getattr(args, 'output', None) == '-':
        args.quiet = True
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')

    try:
        args.func(args)
    except OSError as err:
        print(f"mdat: {err}", file=sys.stderr)
        return EXIT_IO
    except pipeline.FrameRangeError as err:
        print(f"mdat: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as err:
        print(f"mdat: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as err:
        print(f"mdat: {err}", file=sys.stderr)
        return EXIT_FORMAT
    return EXIT_OK


if __name__ == '__main__':
    if __package__ is None:
        __package__ = "mdat"
    sys.exit(main())
