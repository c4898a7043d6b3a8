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
Constraint-preserving smoothing of the squared reconstruction weights.

Over the bins of the bands holding three or more bins, u = rho is moved along

    u_tau = (I - R) A u

where A is the second-difference matrix (so -A u is the gradient of the
roughness f = 1/2 sum (u[k+1] - u[k])^2) and R projects, band by band, onto
the gradients of the two constraints sum rho = 1 and sum c rho = theta.  The
flow is linear and is solved as u(tau) = expm((I - R) A tau) u0.

With A as defined here the gradient of f is -A u, so the flow is projected
descent on f.
"""

from collections import namedtuple

import numpy as np
from scipy.linalg import expm

SmoothingProblem = namedtuple('SmoothingProblem', ['u0', 'psi', 'theta', 'tau', 'layout'])
FlowOperators = namedtuple('FlowOperators', ['A', 'R', 'G'])

# layout entries: (band index, offset into u, width)
BandSpan = namedtuple('BandSpan', ['band', 'offset', 'width'])

# Relative spread of c below which a band counts as constant
PARALLEL_TOL = 1e-12


def tilde_c(psi):
    """
    c~(k) = 1 - c(k) N_b / sum c over one band.  Identically zero when the
    band has no unpredictability at all, in which case the second constraint
    is redundant.
    """
    psi = np.asarray(psi, dtype=float)
    total = psi.sum()
    if total <= 0 or np.ptp(psi) <= PARALLEL_TOL * psi.max():
        return np.zeros_like(psi)
    ct = 1.0 - psi * psi.size / total
    # Remove rounding so that sum c~ = 0 holds to machine precision
    return ct - ct.mean()


def second_difference(n):
    A = np.diag(np.full(n, -2.0)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    A[0, 0] = A[-1, -1] = -1.0
    return A


def build_operators(problem):
    n = len(problem.u0)
    A = second_difference(n)
    R = np.zeros((n, n))
    for span in problem.layout:
        sl = slice(span.offset, span.offset + span.width)
        block = np.full((span.width, span.width), 1.0 / span.width)
        ct = tilde_c(problem.psi[sl])
        norm2 = ct @ ct
        if norm2 > 0:
            block += np.outer(ct, ct) / norm2
        R[sl, sl] = block
    G = (np.eye(n) - R) @ A
    return FlowOperators(A, R, G)


def flow(problem, operators=None):
    """u(tau) = expm((I - R) A tau) u0"""
    if problem.tau < 0:
        raise ValueError(f"Flow time must be nonnegative, got {problem.tau}")
    u0 = np.asarray(problem.u0, dtype=float)
    if problem.tau == 0:
        return u0.copy()
    if operators is None:
        operators = build_operators(problem)
    return expm(operators.G * problem.tau) @ u0


def objective(u):
    d = np.diff(u)
    return 0.5 * (d @ d)


def constraint_residuals(problem, u):
    """
    (g, h~) per band of the layout: g_b = sum rho - 1 and
    h~_b = sum c~ rho - 1 + N_b theta_b / sum c.
    """
    g = np.zeros(len(problem.layout))
    h = np.zeros(len(problem.layout))
    for i, span in enumerate(problem.layout):
        sl = slice(span.offset, span.offset + span.width)
        g[i] = u[sl].sum() - 1.0
        total = problem.psi[sl].sum()
        if total > 0:
            h[i] = tilde_c(problem.psi[sl]) @ u[sl] - 1.0 + span.width * problem.theta[i] / total
    return g, h


def smoothing_problem(rho, c, theta, table, tau):
    """
    Cut the smoothing region of a per-bin rho out into a SmoothingProblem.
    theta is per band, 0..J.
    """
    bands = table.smoothing_bands
    k0 = bands[0].low
    layout = tuple(BandSpan(band.index, band.low - k0, band.width) for band in bands)
    return SmoothingProblem(
        u0=np.array(rho[k0:], dtype=float),
        psi=np.array(c[k0:len(rho)], dtype=float),
        theta=np.array([theta[band.index] for band in bands], dtype=float),
        tau=float(tau),
        layout=layout)


def smooth_weights(rho, c, theta, table, tau):
    """
    Smooth rho (bins 0..127, straight from the two-constraint solution) over
    the bands of width three or more.  Narrower bands are left alone.
    Negative weights are not clamped here.
    """
    rho = np.array(rho, dtype=float)
    if tau == 0 or not table.smoothing_bands:
        return rho
    problem = smoothing_problem(rho, c, theta, table, tau)
    k0 = table.smoothing_bands[0].low
    rho[k0:] = flow(problem)
    return rho
