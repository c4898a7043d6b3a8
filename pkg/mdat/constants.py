import json
import logging
from importlib.metadata import PackageNotFoundError, version

from xdg import xdg_config_home

log = logging.getLogger(__name__)

# 256 point FFT on non-overlapping frames
FRAME_SIZE = 256
HALF_SIZE = FRAME_SIZE // 2
NYQUIST_BIN = HALF_SIZE

# Band SNR end points, dB
TMN = 18.0  # tone masking noise
NMT = 6.0   # noise masking tone

# tb = TONALITY_OFFSET + TONALITY_SLOPE * ln(cb)
TONALITY_OFFSET = -0.299
TONALITY_SLOPE = -0.43

# Schroeder spreading, dB: a + b (dz + c) - d sqrt(1 + (dz + c)^2)
SPREAD_A = 15.81
SPREAD_B = 7.5
SPREAD_C = 0.474
SPREAD_D = 17.5

# Box-constrained least squares
LSQ_TOL = 1e-8
LSQ_MAX_ITER = 10000

MDAT_MAGIC = b'MDAT'
MDAT_VERSION = 1

CONFIG_PATH = xdg_config_home() / 'mdat' / 'defaults.json'

DEFAULTS = {
    'tau': 2.0,
    'mode': 'v2',
    'jobs': 1,
    'solver': 'bvls',
}

INVERSION_MODES = ('v1', 'v2', 'direct')
SOLVER_NAMES = ('bvls', 'projected-gradient')

# Accepted values of each defaults entry, after conversion
DEFAULT_CHECKS = {
    'tau': lambda value: value >= 0,
    'mode': lambda value: value in INVERSION_MODES,
    'jobs': lambda value: value >= 1,
    'solver': lambda value: value in SOLVER_NAMES,
}


def load_defaults(path=None):
    """
    Return DEFAULTS updated with the user's defaults file, if there is one.
    Entries that are unknown or out of range are ignored with a warning.
    """
    if path is None:
        path = CONFIG_PATH
    defaults = dict(DEFAULTS)
    try:
        with open(path, 'r') as f:
            user = json.load(f)
    except FileNotFoundError:
        return defaults
    except (OSError, ValueError) as err:
        log.warning("Ignoring defaults file %s: %s", path, err)
        return defaults

    if not isinstance(user, dict):
        log.warning("Ignoring defaults file %s: not a JSON object", path)
        return defaults
    for key, value in user.items():
        if key not in DEFAULTS:
            log.warning("Unknown key %r in %s", key, path)
            continue
        try:
            value = type(DEFAULTS[key])(value)
        except (TypeError, ValueError):
            log.warning("Ignoring %s = %r in %s: not a %s", key, value, path,
                        type(DEFAULTS[key]).__name__)
            continue
        if not DEFAULT_CHECKS[key](value):
            log.warning("Ignoring %s = %r in %s: out of range", key, value, path)
            continue
        defaults[key] = value
    return defaults


try:
    VERSION = version('mdat')
    # without installing this as a package finding the version is broken
except PackageNotFoundError:
    VERSION = '0.0'
