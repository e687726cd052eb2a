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

# pylint: disable=invalid-name,too-few-public-methods,too-many-arguments

"""
Glauber coherent states of n - 1 harmonic modes and the semiclassical
propagator of a quadratic Hamiltonian H = Σ h[j][k] a†ⱼaₖ, whose symbol
ℋ(z̄, z) = z̄·h·z gives linear flows known in closed form
"""

import math

from logging import getLogger

import numpy as np

from scipy import linalg
from scipy.integrate import simpson

from ..errors import DimensionError, ModelError
from ..tools.utils import as_vector, continue_log


LOG = getLogger(__name__)

DEFAULT_SAMPLES = 33
HERMITIAN_TOLERANCE = 1e-12


class GlauberPoint():
    """ A point (z, z̄) of the doubled flat phase space """

    def __init__(self, z, zbar):
        self.z = as_vector(z)
        self.zbar = as_vector(zbar, self.z.size)

    def __repr__(self):
        return f"GlauberPoint(z={self.z!r}, zbar={self.zbar!r})"


class GlauberTrajectory():
    """ The closed form flow of a quadratic symbol sampled on [0, τ] """

    def __init__(self, h, grid, points, action_integral, trace_integral):
        self.h = h
        self.grid = grid
        self.points = tuple(points)
        self.action_integral = action_integral
        self.trace_integral = trace_integral
        m = h.shape[0]
        self.R11 = -1j * h
        self.R12 = np.zeros((m, m), dtype=complex)
        self.R21 = np.zeros((m, m), dtype=complex)
        self.R22 = 1j * h.T

    @property
    def tau(self):
        """ Returns the final time """
        return float(self.grid[-1])

    @property
    def initial(self):
        """ Returns the point at t = 0 """
        return self.points[0]

    @property
    def final(self):
        """ Returns the point at t = τ """
        return self.points[-1]

    @property
    def monodromy(self):
        """ Returns blockdiag(exp(-ihτ), exp(ihᵀτ)) """
        return self.monodromy_at(self.tau)

    def monodromy_at(self, t):
        """ Returns the monodromy of the flow from 0 to t """
        return linalg.block_diag(linalg.expm(-1j * self.h * t),
                                 linalg.expm(1j * self.h.T * t))

    def log_det_inverse_m22(self):
        """
        Returns Log det ∂z̄(0)/∂z̄(τ) = Log det M22⁻¹, continued along [0, τ]
        from 0 at the identity. The ladder keeps every phase step under π/2
        """
        m = self.h.shape[0]
        rate = float(np.sum(np.abs(linalg.eigvalsh(self.h))))
        steps = max(self.grid.size - 1,
                    math.ceil(2 * abs(self.tau) * rate / math.pi), 1)

        log = 0j
        for t in np.linspace(0.0, self.tau, steps + 1)[1:]:
            inverse = linalg.inv(self.monodromy_at(t)[m:, m:])
            sign, logabs = np.linalg.slogdet(inverse)
            log = continue_log(sign, log) + logabs
        return log


def _check_h(h, m=None):
    h = np.asarray(h, dtype=complex)
    if h.ndim == 0:
        h = h.reshape(1, 1)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionError(f"h must be square, got shape {h.shape}")
    if m is not None and h.shape[0] != m:
        msg = f"h acts on {h.shape[0]} modes, boundary data has {m}"
        raise DimensionError(msg)
    if np.max(np.abs(h - h.conj().T), initial=0.0) > HERMITIAN_TOLERANCE:
        raise ModelError("h is not Hermitian")
    return h


def glauber_overlap(z_prime, z):
    """ Returns ⟨z'|z⟩ = exp(z'*·z - |z'|²/2 - |z|²/2) """
    z_prime = as_vector(z_prime)
    z = as_vector(z, z_prime.size)
    return np.exp(np.vdot(z_prime, z) - 0.5 * np.vdot(z_prime, z_prime).real
                  - 0.5 * np.vdot(z, z).real)


def glauber_classical_flow(h, z0, zbar0, tau, samples=DEFAULT_SAMPLES):
    """
    Solves ż = -ihz, dz̄/dt = ihᵀz̄ by matrix exponentials, with the action
    integral of ½(dz̄/dt·z - z̄·ż) - iℋ and ∫Tr R22 dt = iτ Tr h
    """
    start = GlauberPoint(z0, zbar0)
    h = _check_h(h, start.z.size)

    grid = np.linspace(0.0, tau, max(int(samples), 2) if tau else 1)
    points = [GlauberPoint(linalg.expm(-1j * h * t) @ start.z,
                           linalg.expm(1j * h.T * t) @ start.zbar)
              for t in grid]

    integrand = []
    for p in points:
        zdot = -1j * h @ p.z
        zbardot = 1j * h.T @ p.zbar
        integrand.append(0.5 * (zbardot @ p.z - p.zbar @ zdot)
                         - 1j * (p.zbar @ h @ p.z))
    action = simpson(integrand, x=grid) if grid.size > 1 else 0j

    return GlauberTrajectory(h, grid, points, complex(action),
                             1j * tau * np.trace(h))


def glauber_action(h, z_i, zbar_f, tau):
    """
    Returns iS_c as a function of the boundary data (z_i, z̄_f), the two
    treated as independent
    """
    h = _check_h(h)
    z_i = as_vector(z_i, h.shape[0])
    zbar_f = as_vector(zbar_f, h.shape[0])

    zbar0 = linalg.expm(-1j * h.T * tau) @ zbar_f
    flow = glauber_classical_flow(h, z_i, zbar0, tau)
    return flow.action_integral + 0.5 * (zbar_f @ flow.final.z
                                         + flow.initial.zbar @ z_i)


def glauber_semiclassical_propagator(h, z_i, z_f, tau):
    """
    Returns exp{iS_c - (|z_i|² + |z_f|²)/2} exp{½∫Tr R22 dt}
    √det[∂z̄(0)/∂z̄(τ)] on the trajectory z(0) = z_i, z̄(τ) = z_f*
    """
    h = _check_h(h)
    z_i = as_vector(z_i, h.shape[0])
    z_f = as_vector(z_f, h.shape[0])

    zbar0 = linalg.expm(-1j * h.T * tau) @ z_f.conj()
    flow = glauber_classical_flow(h, z_i, zbar0, tau)

    iS = flow.action_integral + 0.5 * (z_f.conj() @ flow.final.z
                                       + flow.initial.zbar @ z_i)
    norm = -0.5 * (np.vdot(z_i, z_i).real + np.vdot(z_f, z_f).real)

    half_log_det = 0.5 * flow.log_det_inverse_m22()

    return np.exp(iS + norm + 0.5 * flow.trace_integral + half_log_det)


def glauber_exact_propagator(h, z_i, z_f, tau):
    """ Returns exp(z_f*·exp(-ihτ)·z_i - |z_i|²/2 - |z_f|²/2) """
    h = _check_h(h)
    z_i = as_vector(z_i, h.shape[0])
    z_f = as_vector(z_f, h.shape[0])
    evolved = linalg.expm(-1j * h * tau) @ z_i
    return np.exp(z_f.conj() @ evolved - 0.5 * np.vdot(z_i, z_i).real
                  - 0.5 * np.vdot(z_f, z_f).real)
