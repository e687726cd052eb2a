#!/usr/bin/env python3

# sun-prop - semiclassical propagator for SU(n) coherent states
# Copyright (C) 2021  sun-prop contributors
#
# This file is part of sun-prop.
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

# pylint: disable=invalid-name,too-many-locals,too-many-arguments
# pylint: disable=too-few-public-methods,too-many-instance-attributes

"""
The complexified classical layer: the Ξ/Θ/Q matrices, equations of motion,
tangent dynamics, the second variation matrices and an initial value
integrator carrying the action, the correction integral and the monodromy
"""

import cmath

from logging import getLogger
from types import SimpleNamespace

import numpy as np

from scipy import linalg
from scipy.integrate import solve_ivp

from .coherent import (DEFAULT_SINGULARITY_THRESHOLD, DoubledPoint,
                       effective_hamiltonian)
from ..errors import IntegrationError, PreconditionError, SingularityError
from ..tools.utils import continue_sqrt


LOG = getLogger(__name__)

SERIES_THRESHOLD = 1e-8


def default_integrator_options():
    """ Returns the default options of integrate_ivp """
    return SimpleNamespace(
        method="DOP853",
        rtol=1e-10,
        atol=1e-10,
        samples=33,
        energy_tolerance=1e-8,
        caustic_threshold=1e-12,
        singularity_threshold=DEFAULT_SINGULARITY_THRESHOLD,
        singularity_warning=1e-6,
    )


class PhaseSpaceMatrices():
    """ Ξ, Θ = Ξ⁻¹ and Q = √Θ at a point, with their barred transposes """

    def __init__(self, Xi, Theta, Q, Qinv, sqrt_denominator):
        self.Xi = Xi
        self.Xibar = Xi.T
        self.Theta = Theta
        self.Thetabar = Theta.T
        self.Q = Q
        self.Qbar = Q.T
        self.Qinv = Qinv
        self.Qbarinv = Qinv.T
        self.sqrt_denominator = sqrt_denominator


class TangentBlocks():
    """ Blocks of the Jacobian of the equations of motion """

    def __init__(self, R11, R12, R21, R22):
        self.R11 = R11
        self.R12 = R12
        self.R21 = R21
        self.R22 = R22

    @property
    def matrix(self):
        """ Returns the assembled 2(n-1) square Jacobian """
        return np.block([[self.R11, self.R12], [self.R21, self.R22]])


class QuadraticFormMatrices():
    """ A, B, C of the second variation and their Q-transformed forms """

    def __init__(self, A, B, C, Atil, Btil, Ctil, Qbar_rate):
        self.A = A
        self.B = B
        self.C = C
        self.Atil = Atil
        self.Btil = Btil
        self.Ctil = Ctil
        self.Qbar_rate = Qbar_rate


def xi_matrix(p, N):
    """ Returns Ξ = (1/N)(1 + w̄w)(𝟙 + w⊗w̄) """
    D = p.denominator
    return (D / N) * (np.eye(p.m) + np.outer(p.w, p.wbar))


def theta_matrix(p, N):
    """ Returns Θ = N[(1 + w̄w)𝟙 - w⊗w̄] / (1 + w̄w)² """
    D = p.denominator
    return N * (D * np.eye(p.m) - np.outer(p.w, p.wbar)) / D ** 2


def phase_space_matrices(p, N, sqrt_hint=None,
                         threshold=DEFAULT_SINGULARITY_THRESHOLD,
                         series_threshold=SERIES_THRESHOLD):
    """
    Builds Ξ, Θ, Q and Q⁻¹ at p. The closed forms of Q have a removable
    1/(w̄w) singularity, so below series_threshold the principal matrix
    square root of Θ is used instead. sqrt_hint selects the sign of
    √(1 + w̄w) closest to a previous value along a trajectory
    """
    D = p.check(threshold)
    m = p.m
    s = p.wbar @ p.w
    r = continue_sqrt(D, sqrt_hint)
    eye = np.eye(m)

    Xi = xi_matrix(p, N)
    Theta = theta_matrix(p, N)

    if abs(s) >= series_threshold:
        outer = np.outer(p.w, p.wbar)
        Q = np.sqrt(N) * (outer + r * (s * eye - outer)) / (s * D)
        Qinv = D / (np.sqrt(N) * s) * (outer + (s * eye - outer) / r)
    else:
        if r.real < 0:
            LOG.warning("negative √(1 + w̄w) branch at w̄w ≈ 0, using the "
                        "principal square root of Θ")
        Q = linalg.sqrtm(Theta)
        Qinv = linalg.inv(Q)

    return PhaseSpaceMatrices(Xi, Theta, Q, Qinv, r)


def qbar_rate(p, pdot, N, sqrt_denominator=None):
    """
    Returns dQ̄/dt along the flow, from the regular form
        Q̄ = √N [𝟙/r - w̄⊗w / (r²(1 + r))],  r = √(1 + w̄w)
    """
    wdot, wbardot = pdot
    r = continue_sqrt(p.denominator, sqrt_denominator)
    if abs(1 + r) < SERIES_THRESHOLD:
        raise SingularityError("dQ̄/dt is undefined on the r = -1 branch")

    sdot = wbardot @ p.w + p.wbar @ wdot
    rdot = sdot / (2 * r)
    g = 1 / (r ** 2 * (1 + r))
    gprime = -(3 * r + 2) / (r ** 3 * (1 + r) ** 2)

    return np.sqrt(N) * (
        -(rdot / r ** 2) * np.eye(p.m)
        - gprime * rdot * np.outer(p.wbar, p.w)
        - g * (np.outer(wbardot, p.w) + np.outer(p.wbar, wdot))
    )


def equations_of_motion(model, p, N, jet=None,
                        threshold=DEFAULT_SINGULARITY_THRESHOLD):
    """ Returns (ẇ, dw̄/dt) = (-iΞ ∂ℋ/∂w̄, iΞ̄ ∂ℋ/∂w) """
    if jet is None:
        jet = effective_hamiltonian(model, p, N, threshold)
    Xi = xi_matrix(p, N)
    return -1j * (Xi @ jet.grad_wbar), 1j * (Xi.T @ jet.grad_w)


def tangent_blocks(model, p, N, jet=None,
                   threshold=DEFAULT_SINGULARITY_THRESHOLD):
    """ Returns the analytic Jacobian blocks R11, R12, R21, R22 """
    if jet is None:
        jet = effective_hamiltonian(model, p, N, threshold)

    w, wbar = p.w, p.wbar
    D = p.denominator
    eye = np.eye(p.m)
    Xi = xi_matrix(p, N)
    Xibar = Xi.T

    gbar = jet.grad_wbar
    g = jet.grad_w
    a = wbar @ gbar
    b = w @ g
    left = gbar + w * a
    right = g + wbar * b

    R11 = -1j * ((np.outer(left, wbar) + D * a * eye) / N
                 + Xi @ jet.hess_wbarw)
    R12 = -1j * ((np.outer(left, w) + D * np.outer(w, gbar)) / N
                 + Xi @ jet.hess_wbarwbar)
    R21 = 1j * ((np.outer(right, wbar) + D * np.outer(wbar, g)) / N
                + Xibar @ jet.hess_ww)
    R22 = 1j * ((np.outer(right, w) + D * b * eye) / N
                + Xibar @ jet.hess_wwbar)

    return TangentBlocks(R11, R12, R21, R22)


def quadratic_forms(model, p, pdot, N, jet=None, matrices=None):
    """
    Returns A, B, C of the second variation and Ã, B̃, C̃ after the change of
    variables ν = Qη. The velocity terms carry the same factor N as Θ
    """
    if jet is None:
        jet = effective_hamiltonian(model, p, N)
    if matrices is None:
        matrices = phase_space_matrices(p, N)

    w, wbar = p.w, p.wbar
    wdot, wbardot = pdot
    D = p.denominator
    eye = np.eye(p.m)
    kappa = wbardot @ w - wbar @ wdot

    D3 = D ** 3

    A = N * (2 * (wbardot @ w) * np.outer(wbar, wbar)
             - D * (np.outer(wbar, wbardot) + np.outer(wbardot, wbar))) / D3
    A = A - 1j * jet.hess_ww

    B = 0.5 * N * (kappa * (2 * np.outer(wbar, w) - D * eye)
                   + D * (np.outer(wbar, wdot) - np.outer(wbardot, w))) / D3
    B = B - 1j * jet.hess_wwbar

    C = N * (D * (np.outer(w, wdot) + np.outer(wdot, w))
             - 2 * (wbar @ wdot) * np.outer(w, w)) / D3
    C = C - 1j * jet.hess_wbarwbar

    Qinv, Qbarinv = matrices.Qinv, matrices.Qbarinv
    Qbar_rate = qbar_rate(p, pdot, N, matrices.sqrt_denominator)

    Atil = Qbarinv @ A @ Qinv
    Btil = (Qbarinv @ B @ Qbarinv
            - 0.5 * (Qbar_rate @ Qbarinv - Qbarinv @ Qbar_rate))
    Ctil = Qinv @ C @ Qbarinv

    return QuadraticFormMatrices(A, B, C, Atil, Btil, Ctil, Qbar_rate)


class TrajectorySolution():
    """ A solved classical trajectory with its accumulated integrals """

    def __init__(self, N, grid, points, energies, action_integral,
                 correction_integral, trace_integral, monodromy, options):
        self.N = N
        self.grid = np.asarray(grid, dtype=float)
        self.points = tuple(points)
        self.energies = np.asarray(energies, dtype=complex)
        self.action_integral = complex(action_integral)
        self.correction_integral = complex(correction_integral)
        self.trace_integral = complex(trace_integral)
        self.monodromy = np.array(monodromy, dtype=complex)

        for arr in (self.grid, self.energies, self.monodromy):
            arr.setflags(write=False)

        denominators = np.array([p.denominator for p in self.points])
        self.min_denominator = float(np.min(np.abs(denominators)))
        self.sqrt_flips = _count_sqrt_flips(denominators)
        self.energy_drift = float(np.max(np.abs(self.energies
                                                - self.energies[0])))

        self.energy_tolerance = options.energy_tolerance * max(
            1.0, abs(self.energies[0]))
        self.singularity_flag = (self.min_denominator
                                 < options.singularity_warning)
        self.caustic_flag = self.caustic_distance < options.caustic_threshold

    @property
    def tau(self):
        """ Returns the final time """
        return float(self.grid[-1])

    @property
    def m(self):
        """ Returns the number of coordinates, n - 1 """
        return self.points[0].m

    @property
    def initial(self):
        """ Returns the point at t = 0 """
        return self.points[0]

    @property
    def final(self):
        """ Returns the point at t = τ """
        return self.points[-1]

    def block(self, row, col):
        """ Returns monodromy block M_{row col}, with rows/cols in {1, 2} """
        m = self.m
        return self.monodromy[(row - 1) * m:row * m, (col - 1) * m:col * m]

    @property
    def M22(self):
        """ Returns ∂w̄(τ)/∂w̄(0) """
        return self.block(2, 2)

    @property
    def det_m22(self):
        """ Returns det M22 """
        return complex(np.linalg.det(self.M22))

    @property
    def caustic_distance(self):
        """ Returns |det M22| relative to the Hadamard bound of M22 """
        scale = float(np.prod(np.linalg.norm(self.M22, axis=0)))
        return abs(self.det_m22) / scale if scale else 0.0

    @property
    def energy_accepted(self):
        """ True when the energy drift is within the configured tolerance """
        return self.energy_drift <= self.energy_tolerance

    def liouville_defect(self):
        """
        Returns |det M - exp ∫Tr(R11 + R22)| relative to the exponential, the
        Abel-Jacobi-Liouville consistency of the monodromy
        """
        expected = cmath.exp(self.trace_integral)
        return abs(np.linalg.det(self.monodromy) - expected) / abs(expected)


def _count_sqrt_flips(denominators):
    """
    Counts the samples where the principal √(1 + w̄w) changes sign relative
    to the root continued along the trajectory
    """
    flips = 0
    previous = None
    flipped = False
    for D in denominators:
        root = continue_sqrt(D, previous)
        now = abs(root - cmath.sqrt(D)) > abs(root)
        if now != flipped:
            flips += 1
        flipped = now
        previous = root
    return flips


def _unpack(y, m):
    """ Splits an ODE state into its point, monodromy and integrals """
    size = 2 * m
    p = DoubledPoint.from_state(y, m)
    M = y[size:size + size * size].reshape(size, size)
    return p, M, y[size + size * size:]


def integrate_ivp(model, N, w0, wbar0, tau, opts=None):
    """
    Integrates the equations of motion from (w0, w̄0) over [0, τ] together
    with the monodromy Ṁ = RM, the action integrand
        (N/2)(dw̄/dt·w - w̄·ẇ)/(1 + w̄w) - iℋ,
    the correction integrand -¼Tr(R11 - R22) and Tr(R11 + R22), all as
    components of one state under the same error control
    """
    if opts is None:
        opts = default_integrator_options()
    if tau < 0 or not np.isfinite(tau):
        raise PreconditionError(f"propagation time must be >= 0: {tau}")

    p0 = DoubledPoint(w0, wbar0)
    p0.check(opts.singularity_threshold)
    m = p0.m
    size = 2 * m
    threshold = opts.singularity_threshold

    def energy(p):
        return effective_hamiltonian(model, p, N, threshold).value

    if tau == 0:
        return TrajectorySolution(N, [0.0], [p0], [energy(p0)], 0, 0, 0,
                                  np.eye(size), opts)

    state = SimpleNamespace(time=0.0, evaluations=0)

    def rhs(t, y):
        state.time = t
        state.evaluations += 1
        p, M, _ = _unpack(y, m)
        jet = effective_hamiltonian(model, p, N, threshold)
        wdot, wbardot = equations_of_motion(model, p, N, jet=jet)
        R = tangent_blocks(model, p, N, jet=jet)

        action = (0.5 * N * (wbardot @ p.w - p.wbar @ wdot) / p.denominator
                  - 1j * jet.value)
        correction = -0.25 * np.trace(R.R11 - R.R22)
        trace = np.trace(R.R11) + np.trace(R.R22)

        return np.concatenate([wdot, wbardot, (R.matrix @ M).reshape(-1),
                               [action, correction, trace]])

    y0 = np.concatenate([p0.w, p0.wbar, np.eye(size, dtype=complex).ravel(),
                         np.zeros(3, dtype=complex)])
    grid = np.linspace(0.0, tau, max(int(opts.samples), 2))

    try:
        sol = solve_ivp(rhs, (0.0, tau), y0, method=opts.method, t_eval=grid,
                        rtol=opts.rtol, atol=opts.atol)
    except SingularityError as e:
        msg = f"trajectory hit a phase space singularity at t={state.time:.6g}"
        raise IntegrationError(msg, time=state.time, wbar0=p0.wbar) from e

    if not sol.success:
        blowup = float(sol.t[-1]) if sol.t.size else state.time
        msg = f"integration failed at t={blowup:.6g}: {sol.message}"
        raise IntegrationError(msg, time=blowup, wbar0=p0.wbar)

    LOG.debug("integrated τ=%.6g with %d rhs evaluations", tau,
              state.evaluations)

    points = [DoubledPoint.from_state(y, m) for y in sol.y.T]
    _, M, integrals = _unpack(sol.y[:, -1], m)
    energies = [energy(p) for p in points]

    solution = TrajectorySolution(N, sol.t, points, energies, integrals[0],
                                  integrals[1], integrals[2], M, opts)

    if not solution.energy_accepted:
        LOG.warning("energy drift %.3e exceeds tolerance %.3e",
                    solution.energy_drift, solution.energy_tolerance)
    if solution.sqrt_flips:
        LOG.warning("√(1 + w̄w) changed branch %d time(s) along the "
                    "trajectory", solution.sqrt_flips)
    if solution.singularity_flag:
        LOG.warning("trajectory passed within %.3e of 1 + w̄w = 0",
                    solution.min_denominator)

    return solution
