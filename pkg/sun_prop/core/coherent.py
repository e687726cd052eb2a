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
# pylint: disable=too-few-public-methods

"""
Closed form SU(n) coherent state algebra: overlaps, the invariant measure and
the effective classical Hamiltonian with its derivatives in the doubled
variables (w, w̄)
"""

import cmath
import math

from logging import getLogger

import numpy as np

from .fock import basis_dimension, build_basis, coherent_vectors
from ..errors import DimensionError, PreconditionError, SingularityError


LOG = getLogger(__name__)

DEFAULT_SINGULARITY_THRESHOLD = 1e-12
MIN_IDENTITY_SAMPLES = 10000


class DoubledPoint():
    """
    A point (w, w̄) of the complexified phase space, w̄ independent of w.
    Internally the homogeneous coordinates u = (w, 1), ū = (w̄, 1) are used
    """

    def __init__(self, w, wbar):
        self._w = np.array(w, dtype=complex).reshape(-1)
        self._wbar = np.array(wbar, dtype=complex).reshape(-1)
        if self._w.shape != self._wbar.shape:
            msg = (f"w and w̄ must have the same length, got "
                   f"{self._w.size} and {self._wbar.size}")
            raise DimensionError(msg)

    def __repr__(self):
        return f"DoubledPoint(w={self._w!r}, wbar={self._wbar!r})"

    @staticmethod
    def physical(w):
        """ Returns the point on the physical submanifold w̄ = w* """
        w = np.asarray(w, dtype=complex)
        return DoubledPoint(w, w.conj())

    @staticmethod
    def from_state(y, m):
        """ Rebuilds a point from the first 2m entries of an ODE state """
        return DoubledPoint(y[:m], y[m:2 * m])

    @property
    def w(self):
        """ Returns w """
        return self._w

    @property
    def wbar(self):
        """ Returns w̄ """
        return self._wbar

    @property
    def m(self):
        """ Returns the number of complex coordinates, n - 1 """
        return self._w.size

    @property
    def u(self):
        """ Returns the homogeneous coordinates (w, 1) """
        return np.append(self._w, 1.0)

    @property
    def ubar(self):
        """ Returns the homogeneous coordinates (w̄, 1) """
        return np.append(self._wbar, 1.0)

    @property
    def denominator(self):
        """ Returns D = 1 + w̄·w """
        return 1 + self._wbar @ self._w

    def is_physical(self, tol=1e-12):
        """ True when w̄ is the complex conjugate of w """
        scale = max(1.0, float(np.max(np.abs(self._w), initial=0.0)))
        return bool(np.all(np.abs(self._wbar - self._w.conj()) <= tol * scale))

    def check(self, threshold=DEFAULT_SINGULARITY_THRESHOLD):
        """ Raises SingularityError when |1 + w̄·w| is below threshold """
        D = self.denominator
        if abs(D) <= threshold:
            msg = f"phase space singularity: |1 + w̄·w| = {abs(D):.3e}"
            raise SingularityError(msg)
        return D


class EffectiveHamiltonianJet():
    """ ℋ(w̄, w) with its gradients and Hessian blocks """

    def __init__(self, value, grad_w, grad_wbar, hess_ww, hess_wwbar,
                 hess_wbarwbar):
        self.value = value
        self.grad_w = grad_w
        self.grad_wbar = grad_wbar
        self.hess_ww = hess_ww
        self.hess_wwbar = hess_wwbar
        self.hess_wbarwbar = hess_wbarwbar

    @property
    def hess_wbarw(self):
        """ Returns ∂²ℋ/∂w̄∂w, the transpose of hess_wwbar """
        return self.hess_wwbar.T


def overlap(w_prime, w, N):
    """ Returns ⟨w'|w⟩ from its closed form """
    w_prime = np.asarray(w_prime, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if w_prime.shape != w.shape:
        raise DimensionError("overlap of vectors with different lengths")

    norm = (1 + np.vdot(w_prime, w_prime).real) * (1 + np.vdot(w, w).real)
    if norm <= 0:
        raise SingularityError("singular overlap denominator")
    return (1 + np.vdot(w_prime, w)) ** N / norm ** (N / 2)


def log_overlap(w_prime, w, N):
    """
    Returns Log⟨w'|w⟩ = N Log(1 + w'*·w) - (N/2) Log[(1+|w'|²)(1+|w|²)],
    which stays finite and continuous where the power would overflow
    """
    w_prime = np.asarray(w_prime, dtype=complex)
    w = np.asarray(w, dtype=complex)
    D = 1 + np.vdot(w_prime, w)
    if D == 0:
        raise SingularityError("orthogonal coherent states have no logarithm")

    norm = np.log1p(np.vdot(w_prime, w_prime).real)
    norm += np.log1p(np.vdot(w, w).real)
    return N * cmath.log(D) - 0.5 * N * norm


def _quotient_jet(F, gF, HF, D, gD, HD, p):
    """ Value, gradient and Hessian of F / D^p by the quotient rule """
    Dp = D ** (-p)
    Dp1 = D ** (-p - 1)
    value = F * Dp
    grad = gF * Dp - p * F * Dp1 * gD
    hess = (HF * Dp
            - p * Dp1 * (np.outer(gF, gD) + np.outer(gD, gF))
            + p * (p + 1) * F * D ** (-p - 2) * np.outer(gD, gD)
            - p * F * Dp1 * HD)
    return value, grad, hess


def effective_hamiltonian(model, p, N,
                          threshold=DEFAULT_SINGULARITY_THRESHOLD):
    """
    Returns the jet of
        ℋ = N (ū h u)/D + N(N-1)/2 · Σ V[j][k][l][m] ūⱼūₖuₗuₘ / D²
    with u = (w, 1), ū = (w̄, 1), D = 1 + w̄·w, from analytic derivatives
    """
    if model.n != p.m + 1:
        msg = f"model has {model.n} modes but the point has {p.m} coordinates"
        raise DimensionError(msg)

    D = p.check(threshold)
    m = p.m
    u, ubar = p.u, p.ubar
    h, V = model.h, model.V

    # Gradients and Hessians below are with respect to z = (w, w̄)
    hu = h @ u
    uh = ubar @ h
    F1 = ubar @ hu
    g1 = np.concatenate([uh[:m], hu[:m]])
    H1 = np.zeros((2 * m, 2 * m), dtype=complex)
    H1[:m, m:] = h[:m, :m].T
    H1[m:, :m] = h[:m, :m]

    gD = np.concatenate([p.wbar, p.w])
    HD = np.zeros((2 * m, 2 * m), dtype=complex)
    HD[:m, m:] = np.eye(m)
    HD[m:, :m] = np.eye(m)

    value, grad, hess = _quotient_jet(F1, g1, H1, D, gD, HD, 1)
    value, grad, hess = N * value, N * grad, N * hess

    if N > 1 and np.any(V):
        Vu = np.einsum("jklm,l,m->jk", V, u, u)
        Vubar = np.einsum("jklm,j,k->lm", V, ubar, ubar)
        mixed = 4 * np.einsum("bkam,k,m->ab", V, ubar, u)

        F2 = ubar @ Vu @ ubar
        g2 = np.concatenate([2 * (Vubar @ u)[:m], 2 * (Vu @ ubar)[:m]])
        H2 = np.empty((2 * m, 2 * m), dtype=complex)
        H2[:m, :m] = 2 * Vubar[:m, :m]
        H2[m:, m:] = 2 * Vu[:m, :m]
        H2[:m, m:] = mixed[:m, :m]
        H2[m:, :m] = mixed[:m, :m].T

        c = 0.5 * N * (N - 1)
        v2, g2, H2 = _quotient_jet(F2, g2, H2, D, gD, HD, 2)
        value, grad, hess = value + c * v2, grad + c * g2, hess + c * H2

    return EffectiveHamiltonianJet(value, grad[:m], grad[m:], hess[:m, :m],
                                   hess[:m, m:], hess[m:, m:])


def measure_weight(p, n, N):
    """ Returns the density σ(n) dim / (1 + |w|²)ⁿ of the invariant measure """
    if not p.is_physical():
        raise PreconditionError("the measure is defined for w̄ = w* only")

    sigma = math.factorial(n - 1) / math.pi ** (n - 1)
    norm = 1 + np.vdot(p.w, p.w).real
    return sigma * basis_dimension(n, N) / norm ** n


def sample_coherent_parameters(rng, size, n):
    """
    Draws w distributed as the normalised invariant measure: u uniform on
    the unit sphere of Cⁿ, then wⱼ = uⱼ / uₙ
    """
    g = rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))
    g /= np.linalg.norm(g, axis=1)[:, None]
    return g[:, :-1] / g[:, -1:]


def identity_resolution_mc(n, N, sample_count, seed, chunk_size=None):
    """
    Monte Carlo estimate of ∫ dμ |w⟩⟨w| with its per-entry standard error.
    Each chunk draws from its own Philox stream spawned from the seed, so the
    result does not depend on how chunks are scheduled
    """
    if (int(sample_count) != sample_count
            or sample_count < MIN_IDENTITY_SAMPLES):
        msg = (f"sample count must be an integer >= {MIN_IDENTITY_SAMPLES}: "
               f"{sample_count}")
        raise PreconditionError(msg)
    if int(seed) != seed or seed < 0:
        raise PreconditionError(f"seed must be a non-negative integer: {seed}")

    basis = build_basis(n, N)
    dim = basis.dim
    sample_count = int(sample_count)
    if chunk_size is None:
        chunk_size = max(1000, 2000000 // (dim * dim))

    num_chunks = -(-sample_count // chunk_size)
    streams = np.random.SeedSequence(int(seed)).spawn(num_chunks)

    total = np.zeros((dim, dim), dtype=complex)
    total_sq = np.zeros((dim, dim))
    remaining = sample_count

    for stream in streams:
        size = min(chunk_size, remaining)
        remaining -= size

        rng = np.random.Generator(np.random.Philox(stream))
        W = sample_coherent_parameters(rng, size, n)
        vecs = coherent_vectors(W, basis)
        proj = np.einsum("si,sj->sij", vecs, vecs.conj())
        total += proj.sum(axis=0)
        total_sq += (np.abs(proj) ** 2).sum(axis=0)

    mean = total / sample_count
    var = np.maximum(total_sq / sample_count - np.abs(mean) ** 2, 0.0)
    stderr = dim * np.sqrt(var / max(sample_count - 1, 1))

    LOG.debug("identity MC n=%d N=%d with %d samples in %d chunks",
              n, N, sample_count, num_chunks)
    return dim * mean, stderr


def identity_deviation(estimate, stderr, floor=1e-12):
    """
    Returns the largest |estimate - 𝟙| in units of the standard error, with
    exactly matching zero-variance entries counting as zero
    """
    dev = np.abs(estimate - np.eye(estimate.shape[0]))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(stderr > 0, dev / stderr,
                         np.where(dev <= floor, 0.0, np.inf))
    return float(np.max(ratio))
