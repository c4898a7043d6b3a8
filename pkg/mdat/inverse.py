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
Perceptual inversion: from band energies and unpredictabilities back to a
DFT frame.

Every AC bin k of band b is rebuilt as

    a(k) = sqrt(rho(k) e(b)) exp(i phi(k))

with the phases phi taken from the side info and the squared weights rho
solving, per band,

    sum rho = 1                  (band energy)
    sum c(k) rho(k) = theta_b    (weighted unpredictability)

theta_b = ec(b) / e(b) is read directly from a (e, ec) payload, or recovered
from (e, cb) by box-constrained least squares.
"""

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
import logging

import numpy as np
from scipy.optimize import lsq_linear

from .constants import FRAME_SIZE, HALF_SIZE, LSQ_MAX_ITER, LSQ_TOL, NYQUIST_BIN
from .forward import perception, spreading_matrix
from .smoother import smooth_weights
from .spectrum import SpectralFrame, idft

log = logging.getLogger(__name__)

BandWeightProblem = namedtuple('BandWeightProblem', ['band', 'psi', 'theta', 'width'])
WeightVector = namedtuple('WeightVector', ['rho', 'w'])
ThetaRecovery = namedtuple('ThetaRecovery', ['y', 'residual', 'method'])

# Relative spread of psi below which it counts as parallel to (1, ..., 1)
PARALLEL_TOL = 1e-12


class FrameDiagnostics(namedtuple('FrameDiagnostics',
                                  ['index', 'theta', 'achieved', 'clamped', 'residual', 'negative'])):
    """
    theta: Target theta per band 0..J (NaN for inactive bands).
    achieved: sum c rho actually reached per band after clamping.
    clamped: Indices of bands whose weights had to be clamped.
    residual: Least-squares residual of the theta recovery, or None.
    negative: Number of negative theta components (direct solve only).
    """
    __slots__ = ()

    @property
    def deviation(self):
        return np.nan_to_num(self.achieved - self.theta)


class ConvergenceError(ArithmeticError):
    def __init__(self, message, best, residual):
        super().__init__(message)
        self.best = best
        self.residual = residual


class SingularSystem(ArithmeticError):
    pass


class MissingSideInfo(ValueError):
    pass


def theta_from_v2(e, ec):
    """
    theta = ec / e per band.  Bands without energy are inactive; their theta
    is 0 and they rebuild to silence.
    """
    e = np.asarray(e, dtype=float)
    ec = np.asarray(ec, dtype=float)
    active = e > 0
    theta = np.divide(ec, e, out=np.zeros_like(e), where=active)
    return theta, active


def q_matrix(e, S):
    """
    q_ij = e(j) S[j, i] / sum_j e(j) S[j, i], over the AC bands.  Rows
    without any spread energy are left zero.
    """
    e = np.asarray(e, dtype=float)
    weighted = S.T * e[np.newaxis, :]
    denom = weighted.sum(axis=1)
    return np.divide(weighted, denom[:, np.newaxis],
                     out=np.zeros_like(weighted), where=denom[:, np.newaxis] > 0)


def projected_gradient(Q, b, lower, upper, *, tol=LSQ_TOL, max_iter=LSQ_MAX_ITER):
    """
    Minimize ||b - Q y|| over lower <= y <= upper by projected gradient
    descent with step 1 / ||Q||_2^2.
    """
    step = 1.0 / max(np.linalg.norm(Q, 2) ** 2, np.finfo(float).tiny)
    y = np.clip(0.5 * (lower + upper), lower, upper)
    best, best_norm = y, np.inf
    for _ in range(max_iter):
        grad = Q.T @ (Q @ y - b)
        pg_norm = np.linalg.norm(np.clip(y - grad, lower, upper) - y)
        if pg_norm < best_norm:
            best, best_norm = y, pg_norm
        if pg_norm < tol:
            return y
        y = np.clip(y - step * grad, lower, upper)
    raise ConvergenceError(
        f"Projected gradient did not converge in {max_iter} iterations "
        f"(projected gradient norm {best_norm:.3g})",
        best, np.linalg.norm(b - Q @ best))


def bounded_lsq(Q, b, lower, upper, *, tol=LSQ_TOL, max_iter=LSQ_MAX_ITER):
    result = lsq_linear(Q, b, bounds=(lower, upper), method='bvls',
                        tol=tol * 1e-4, max_iter=max_iter)
    if result.status <= 0:
        raise ConvergenceError(f"Bounded least squares failed: {result.message}",
                               result.x, np.linalg.norm(b - Q @ result.x))
    return np.clip(result.x, lower, upper)


SOLVERS = {
    'bvls': bounded_lsq,
    'projected-gradient': projected_gradient,
}


def theta_from_v1(e, cb, lower, upper, S, *, solver='bvls', tol=LSQ_TOL, max_iter=LSQ_MAX_ITER):
    """
    Recover theta over the AC bands from (e, cb): minimize ||cb - Q y|| with
    lower <= y <= upper, the band-wise extremes of c.  Bands without energy
    are left out and come back as 0.
    """
    e = np.asarray(e, dtype=float)
    cb = np.asarray(cb, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    y = np.zeros_like(e)

    Q = q_matrix(e, S)
    rows = Q.sum(axis=1) > 0
    cols = e > 0
    if not rows.any() or not cols.any():
        return ThetaRecovery(y, 0.0, solver)

    # Bands whose box is a single point are not unknowns; lsq_linear needs
    # lower < upper strictly.
    fixed = cols & (upper - lower <= 0)
    free = cols & ~fixed
    y[fixed] = lower[fixed]
    rhs = cb[rows] - Q[np.ix_(rows, fixed)] @ y[fixed]
    if free.any():
        y[free] = SOLVERS[solver](Q[np.ix_(rows, free)], rhs, lower[free], upper[free],
                                  tol=tol, max_iter=max_iter)
    residual = np.linalg.norm(cb[rows] - Q[rows] @ y)
    return ThetaRecovery(y, residual, solver)


def theta_direct(cb, S, e):
    """
    Solve S^T x = z, x(b) = e(b) theta_b, z(b) = cb(b) sum_b' e(b') S[b', b],
    with no bounds.  The inverse of a spreading matrix is not nonnegative, so
    theta may come out negative or above one.
    """
    e = np.asarray(e, dtype=float)
    cb = np.asarray(cb, dtype=float)
    if np.linalg.matrix_rank(S) < S.shape[0]:
        raise SingularSystem("Spreading matrix is singular")
    z = cb * (S.T @ e)
    try:
        x = np.linalg.solve(S.T, z)
    except np.linalg.LinAlgError as err:
        raise SingularSystem(str(err)) from None
    theta = np.divide(x, e, out=np.zeros_like(x), where=e > 0)
    n_negative = int(np.count_nonzero(theta < 0))
    if n_negative:
        log.warning("Direct solve produced %d negative theta components", n_negative)
    return theta


def simple_weights(problem):
    """
    The two-dimensional solution rho of sum rho = 1, psi . rho = theta,
    with no component outside span{(1, ..., 1), psi}.  rho is not clamped
    and may hold negative entries when theta is near the ends of the range
    of psi.
    """
    psi = np.asarray(problem.psi, dtype=float)
    n = problem.width
    ones = np.ones(n)
    total = psi.sum()
    if n == 1 or total <= 0 or np.ptp(psi) <= PARALLEL_TOL * psi.max():
        rho = ones / n
    else:
        gamma = n / total
        v = ones - gamma * psi
        coeff = (1.0 - gamma * problem.theta) / (v @ v)
        rho = (1.0 / n + coeff) * ones - gamma * coeff * psi
    return WeightVector(rho, np.sqrt(np.clip(rho, 0.0, None)))


def clamp_weights(rho, psi):
    """
    Zero the negative entries of rho and renormalize to sum 1.  Returns the
    clamped rho, the theta it reaches, and whether anything changed.
    """
    if np.all(rho >= 0):
        return rho, psi @ rho, False
    rho = np.clip(rho, 0.0, None)
    rho = rho / rho.sum()
    return rho, psi @ rho, True


def band_weights(theta, active, c, table):
    """rho over bins 0..127, band by band, unclamped."""
    rho = np.zeros(HALF_SIZE)
    rho[0] = 1.0
    for band in table.ac_bands:
        sl = table.band_slice(band.index)
        if not active[band.index]:
            rho[sl] = 1.0 / band.width
            continue
        problem = BandWeightProblem(band.index, c[sl], theta[band.index], band.width)
        rho[sl] = simple_weights(problem).rho
    return rho


def reconstruct_spectrum(e, theta, side, table, *, tau=0.0, index=0, active=None):
    """
    Rebuild a full 256 bin spectrum from band energies e (bands 0..J), target
    theta and the side info.  DC and Nyquist are copied, bins 129..255 are
    the mirror image of bins 127..1.

    Returns the SpectralFrame and its FrameDiagnostics.
    """
    if side is None or side.phases is None or side.c is None:
        raise MissingSideInfo(f"Frame {index} has no side info")
    e = np.asarray(e, dtype=float)
    theta = np.asarray(theta, dtype=float)
    c = np.asarray(side.c, dtype=float)
    phases = np.asarray(side.phases, dtype=float)
    if active is None:
        active = e > 0

    # Inactive bands take the theta their uniform weights reach, which keeps
    # the smoothing constraints consistent.
    theta = theta.copy()
    for band in table.ac_bands:
        if not active[band.index]:
            theta[band.index] = c[table.band_slice(band.index)].mean()

    rho = band_weights(theta, active, c, table)
    rho = smooth_weights(rho, c, theta, table, tau)

    achieved = np.full(len(table), np.nan)
    clamped = []
    amplitude = np.zeros(HALF_SIZE)
    for band in table.ac_bands:
        b = band.index
        if not active[b]:
            continue
        sl = table.band_slice(b)
        rho[sl], achieved[b], was_clamped = clamp_weights(rho[sl], c[sl])
        if was_clamped:
            clamped.append(b)
        amplitude[sl] = np.sqrt(rho[sl] * e[b])

    bins = np.zeros(FRAME_SIZE, dtype=complex)
    bins[1:HALF_SIZE] = amplitude[1:] * np.exp(1j * phases[1:HALF_SIZE])
    bins[0] = side.dc
    bins[NYQUIST_BIN] = side.nyquist
    bins[NYQUIST_BIN + 1:] = np.conj(bins[HALF_SIZE - 1:0:-1])

    if clamped:
        log.debug("Frame %d: clamped weights in bands %s", index, clamped)
    target = np.where(active, theta, np.nan)
    target[0] = np.nan
    diagnostics = FrameDiagnostics(index, target, achieved, tuple(clamped), None, 0)
    return SpectralFrame(bins, index), diagnostics


def _theta_v2(e, ec, side, table, S, solver):
    theta, _ = theta_from_v2(e, ec)
    return theta, None, 0


def _theta_v1(e, ec, side, table, S, solver):
    cb = perception(e, ec, S).cb
    c = np.asarray(side.c, dtype=float)
    lower = np.minimum.reduceat(c, table.low)[1:]
    upper = np.maximum.reduceat(c, table.low)[1:]
    recovery = theta_from_v1(e[1:], cb, lower, upper, S, solver=solver)
    return np.concatenate([[0.0], recovery.y]), recovery.residual, 0


def _theta_direct(e, ec, side, table, S, solver):
    cb = perception(e, ec, S).cb
    theta = theta_direct(cb, S, e[1:])
    return np.concatenate([[0.0], theta]), None, int(np.count_nonzero(theta < 0))


# How theta is obtained for each inversion mode
THETA_METHODS = {
    'v1': _theta_v1,
    'v2': _theta_v2,
    'direct': _theta_direct,
}


def invert_frame(record, table, S, *, index=0, mode='v2', tau=0.0, solver='bvls'):
    e, ec, side = record
    e = np.asarray(e, dtype=float)
    active = e > 0
    theta, residual, negative = THETA_METHODS[mode](e, np.asarray(ec, dtype=float),
                                                    side, table, S, solver)
    spectrum, diagnostics = reconstruct_spectrum(e, theta, side, table,
                                                 tau=tau, index=index, active=active)
    return idft(spectrum), diagnostics._replace(residual=residual, negative=negative)


def invert(records, table, original_length, *,
           mode='v2', tau=0.0, solver='bvls', jobs=1, progress_cb=lambda x: None):
    """
    Rebuild a time signal from per-frame (e, ec, side) records.

    records: Sequence of (e, ec, SideInfo), one per frame, in order.
    table: The BandTable the records were produced with.
    original_length: Number of samples to keep from the concatenated frames.
    mode: 'v2' reads theta from (e, ec); 'v1' recovers it from (e, cb) by
          bounded least squares; 'direct' solves the spreading system.
    tau: Smoothing flow time; 0 keeps the two-constraint solution.
    solver: Least-squares solver used in 'v1' mode.
    jobs: Number of worker threads.  Frames are independent.
    progress_cb: Called with a percentage after each frame.

    Returns the samples and a list of FrameDiagnostics.
    """
    if mode not in THETA_METHODS:
        raise ValueError(f"Unknown inversion mode {mode!r}")
    if solver not in SOLVERS:
        raise ValueError(f"Unknown solver {solver!r}")
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    records = list(records)
    S = spreading_matrix(table)

    def work(item):
        t, record = item
        return invert_frame(record, table, S, index=t, mode=mode, tau=tau, solver=solver)

    frames = []
    diagnostics = []
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        for t, (frame, diag) in enumerate(pool.map(work, enumerate(records))):
            frames.append(frame.samples)
            diagnostics.append(diag)
            progress_cb((t + 1) / len(records) * 100)

    if not frames:
        return np.zeros(0), diagnostics
    signal = np.concatenate(frames)[:original_length]
    n_clamped = sum(len(d.clamped) for d in diagnostics)
    if n_clamped:
        log.warning("Clamped weights in %d bands over %d frames", n_clamped, len(diagnostics))
    return signal, diagnostics
