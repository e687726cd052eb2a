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

# pylint: disable=invalid-name,too-many-locals

"""
Exact quantum mechanics of N bosons in n modes: the occupation number basis,
number conserving Hamiltonians, SU(n) coherent state vectors and the exact
coherent state propagator used as the reference for everything else
"""

import math

from logging import getLogger

import numpy as np

from scipy import linalg, sparse
from scipy.special import gammaln

from ..errors import (CapacityError, DimensionError, ModelError,
                      NumericalError, PreconditionError, SingularityError)


LOG = getLogger(__name__)

DEFAULT_DIMENSION_CAP = 20000
MODEL_TOLERANCE = 1e-12
SINGULAR_OVERLAP_THRESHOLD = 1e-12


class HamiltonianModel():
    """
    H = Σ h[j][k] a†ⱼaₖ + ½ Σ V[j][k][l][m] a†ⱼa†ₖaₗaₘ with ħ = 1
    """

    def __init__(self, h, V=None, validate=True):
        self._h = np.array(h, dtype=complex)
        if self._h.ndim != 2 or self._h.shape[0] != self._h.shape[1]:
            msg = f"h must be square, got shape {self._h.shape}"
            raise DimensionError(msg)

        n = self._h.shape[0]
        if V is None:
            self._V = np.zeros((n,) * 4, dtype=complex)
        else:
            self._V = np.array(V, dtype=complex)

        if self._V.shape != (n,) * 4:
            msg = f"V must have shape {(n,) * 4}, got {self._V.shape}"
            raise DimensionError(msg)

        self._h.setflags(write=False)
        self._V.setflags(write=False)

        if validate:
            self.validate()

    def __repr__(self):
        return (f"HamiltonianModel(n={self.n}, "
                f"one_body_only={self.is_one_body})")

    @property
    def n(self):
        """ Returns the number of modes """
        return self._h.shape[0]

    @property
    def h(self):
        """ Returns the one-body coefficient matrix """
        return self._h

    @property
    def V(self):
        """ Returns the two-body coefficient tensor """
        return self._V

    @property
    def is_one_body(self):
        """ True when the two-body tensor vanishes """
        return not np.any(self._V)

    def validate(self, tol=MODEL_TOLERANCE):
        """ Raises ModelError unless the Hermiticity and symmetries hold """
        scale = max(1.0, float(np.max(np.abs(self._h), initial=0.0)),
                    float(np.max(np.abs(self._V), initial=0.0)))
        h, V = self._h, self._V

        checks = (
            ("h is not Hermitian", h - h.conj().T),
            ("V is not symmetric in its first index pair",
             V - V.transpose(1, 0, 2, 3)),
            ("V is not symmetric in its last index pair",
             V - V.transpose(0, 1, 3, 2)),
            ("V is not Hermitian", V.conj() - V.transpose(3, 2, 1, 0)),
        )

        for msg, defect in checks:
            err = float(np.max(np.abs(defect), initial=0.0))
            if err > tol * scale:
                raise ModelError(f"{msg} (max defect {err:.3e})")

    def scaled(self, one_body=1.0, two_body=1.0):
        """ Returns a copy with the one- and two-body parts rescaled """
        return HamiltonianModel(self._h * one_body, self._V * two_body,
                                validate=False)

    @staticmethod
    def from_sparse(n, h_entries=(), v_entries=()):
        """
        Builds a model from (j, k, value) and (j, k, l, m, value) entries,
        filling in the index-symmetric and Hermitian partners of each entry.
        An entry may not touch a slot an earlier entry already set, and an
        entry that is its own Hermitian partner must be real.
        """
        h = np.zeros((n, n), dtype=complex)
        V = np.zeros((n,) * 4, dtype=complex)
        seen = set()

        def claim(slots, entry):
            if seen & slots:
                raise ModelError(f"duplicate entry {entry}")
            seen.update(slots)

        for entry in h_entries:
            j, k, value = entry
            _check_indices(n, (j, k))
            if j == k and abs(np.imag(value)) > 0.0:
                raise ModelError(f"diagonal entry {entry} is not real")
            claim({("h", j, k), ("h", k, j)}, entry)
            h[j, k] = value
            h[k, j] = np.conj(value)

        for entry in v_entries:
            j, k, l, m, value = entry
            _check_indices(n, (j, k, l, m))
            orbit = {(a, b, c, d) for a, b in {(j, k), (k, j)}
                     for c, d in {(l, m), (m, l)}}
            partners = {(d, c, b, a) for a, b, c, d in orbit}
            if orbit == partners and abs(np.imag(value)) > 0.0:
                raise ModelError(f"self-adjoint entry {entry} is not real")
            claim({("V",) + slot for slot in orbit | partners}, entry)
            for a, b, c, d in orbit:
                V[a, b, c, d] = value
                V[d, c, b, a] = np.conj(value)

        return HamiltonianModel(h, V)


def _check_indices(n, indices):
    if any(not 0 <= i < n for i in indices):
        raise DimensionError(f"entry index out of range for n={n}")


def bose_hubbard(n, J, U, periodic=False):
    """ Open (or periodic) Bose-Hubbard chain with hopping -J and on-site U """
    h_entries = [(j, j + 1, -J) for j in range(n - 1)]
    if periodic and n > 2:
        h_entries.append((n - 1, 0, -J))
    v_entries = [(j, j, j, j, U) for j in range(n)]
    return HamiltonianModel.from_sparse(n, h_entries, v_entries)


def random_model(n, rng, one_body=False, scale=1.0):
    """ Draws a random Hermitian model with the required V symmetries """
    def gaussian(shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    h = gaussian((n, n))
    h = 0.5 * scale * (h + h.conj().T)

    if one_body:
        return HamiltonianModel(h)

    V = gaussian((n,) * 4)
    V = V + V.transpose(1, 0, 2, 3)
    V = V + V.transpose(0, 1, 3, 2)
    V = 0.125 * scale * (V + V.transpose(3, 2, 1, 0).conj())
    return HamiltonianModel(h, V)


class FockBasis():
    """ Occupation number basis of the N-particle, n-mode symmetric space """

    def __init__(self, n, N, states):
        self._n = n
        self._N = N
        self._states = tuple(states)
        self._index = {s: i for i, s in enumerate(self._states)}
        self._occupations = np.array(self._states, dtype=int).reshape(-1, n)
        self._occupations.setflags(write=False)

    def __len__(self):
        return len(self._states)

    def __repr__(self):
        return f"FockBasis(n={self.n}, N={self.N}, dim={self.dim})"

    @property
    def n(self):
        """ Returns the number of modes """
        return self._n

    @property
    def N(self):
        """ Returns the number of particles """
        return self._N

    @property
    def dim(self):
        """ Returns the number of basis states """
        return len(self._states)

    @property
    def states(self):
        """ Returns the occupation vectors in basis order """
        return self._states

    @property
    def index(self):
        """ Returns the map from occupation vector to basis position """
        return self._index

    @property
    def occupations(self):
        """ Returns the states as a (dim, n) integer array """
        return self._occupations


def basis_dimension(n, N):
    """ Returns (N+n-1)! / (N! (n-1)!) """
    return math.comb(N + n - 1, N)


def _compositions(n, N):
    """ Yields occupation vectors of N particles in n modes, descending """
    if n == 1:
        yield (N,)
        return

    for first in range(N, -1, -1):
        for rest in _compositions(n - 1, N - first):
            yield (first,) + rest


def build_basis(n, N, cap=DEFAULT_DIMENSION_CAP):
    """ Enumerates the Fock basis in lexicographically descending order """
    if int(n) != n or n < 2:
        raise PreconditionError(f"mode count must be an integer >= 2: {n}")
    if int(N) != N or N < 0:
        raise PreconditionError(f"particle number must be >= 0: {N}")

    n, N = int(n), int(N)
    dim = basis_dimension(n, N)
    if dim > cap:
        msg = (f"Fock space of {N} particles in {n} modes needs dimension "
               f"{dim}, above the cap of {cap}")
        raise CapacityError(msg, dim)

    LOG.debug("building Fock basis n=%d, N=%d, dim=%d", n, N, dim)
    return FockBasis(n, N, _compositions(n, N))


def _ladder(state, creations, annihilations):
    """
    Applies annihilations then creations (each applied last-to-first) to a
    basis state, returning the image and its amplitude or None
    """
    occ = list(state)
    amp = 1.0

    for mode in reversed(annihilations):
        if occ[mode] == 0:
            return None, 0.0
        amp *= math.sqrt(occ[mode])
        occ[mode] -= 1

    for mode in reversed(creations):
        occ[mode] += 1
        amp *= math.sqrt(occ[mode])

    return tuple(occ), amp


def hamiltonian_matrix(model, basis):
    """ Returns the dense Hermitian matrix of the model within the basis """
    if model.n != basis.n:
        msg = f"model has {model.n} modes but the basis has {basis.n}"
        raise DimensionError(msg)

    rows, cols, vals = list(), list(), list()
    one_body = list(zip(*np.nonzero(model.h)))
    two_body = list(zip(*np.nonzero(model.V)))

    for col, state in enumerate(basis.states):
        for j, k in one_body:
            image, amp = _ladder(state, (j,), (k,))
            if image is not None:
                rows.append(basis.index[image])
                cols.append(col)
                vals.append(model.h[j, k] * amp)

        for j, k, l, m in two_body:
            image, amp = _ladder(state, (j, k), (l, m))
            if image is not None:
                rows.append(basis.index[image])
                cols.append(col)
                vals.append(0.5 * model.V[j, k, l, m] * amp)

    dim = basis.dim
    mat = sparse.coo_matrix((np.array(vals, dtype=complex), (rows, cols)),
                            shape=(dim, dim))
    return mat.toarray()


def coherent_vectors(W, basis):
    """
    Evaluates the SU(n) coherent states for each row of W, returning a
    (samples, dim) array; multinomials go through log-gamma and 0⁰ = 1
    """
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    if W.shape[1] != basis.n - 1:
        msg = f"w must have {basis.n - 1} components, got {W.shape[1]}"
        raise DimensionError(msg)

    N = basis.N
    occ = basis.occupations
    reduced = occ[None, :, :-1]
    log_multinomial = 0.5 * (gammaln(N + 1) - gammaln(occ + 1).sum(axis=1))

    with np.errstate(divide="ignore", invalid="ignore"):
        log_modulus = np.log(np.abs(W))[:, None, :]
        phase = np.angle(W)[:, None, :]
        log_re = np.where(reduced > 0, reduced * log_modulus, 0.0).sum(-1)
        log_im = np.where(reduced > 0, reduced * phase, 0.0).sum(-1)

    norm = -0.5 * N * np.log1p(np.sum(np.abs(W) ** 2, axis=1))
    log_re = log_re + log_multinomial[None, :] + norm[:, None]
    return np.exp(log_re) * np.exp(1j * log_im)


def coherent_vector(w, basis):
    """ Returns the components of |w⟩ in the Fock basis """
    return coherent_vectors(np.asarray(w, dtype=complex)[None, :], basis)[0]


def overlap_exact(w_prime, w, basis):
    """ Returns ⟨w'|w⟩ as an inner product of Fock vectors """
    return np.vdot(coherent_vector(w_prime, basis), coherent_vector(w, basis))


class FockPropagator():
    """
    Exact propagation by dense Hermitian eigendecomposition, computed once per
    (model, basis) and reused for every time and boundary pair
    """

    def __init__(self, model, basis):
        self.model = model
        self.basis = basis
        self.matrix = hamiltonian_matrix(model, basis)

        try:
            self.energies, self.eigenvectors = linalg.eigh(self.matrix)
        except (linalg.LinAlgError, ValueError) as e:
            defect = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
            norm = float(np.linalg.norm(self.matrix))
            msg = (f"eigendecomposition failed (dim={basis.dim}, "
                   f"|H|={norm:.3e}, hermiticity defect={defect:.3e}): {e}")
            raise NumericalError(msg) from e

        LOG.debug("diagonalised H of dim %d, spectrum [%.6g, %.6g]",
                  basis.dim, self.energies[0], self.energies[-1])

    def evolve(self, psi, tau):
        """ Returns exp(-iHτ)|ψ⟩ """
        coeffs = self.eigenvectors.conj().T @ np.asarray(psi, dtype=complex)
        return self.eigenvectors @ (np.exp(-1j * self.energies * tau) * coeffs)

    def amplitude(self, w_i, w_f, tau):
        """ Returns ⟨w_f|exp(-iHτ)|w_i⟩ """
        ket = self.evolve(coherent_vector(w_i, self.basis), tau)
        return np.vdot(coherent_vector(w_f, self.basis), ket)

    def amplitudes(self, w_i, w_f, taus):
        """ Returns the propagator on a whole grid of times """
        bra = self.eigenvectors.conj().T @ coherent_vector(w_f, self.basis)
        ket = self.eigenvectors.conj().T @ coherent_vector(w_i, self.basis)
        phases = np.exp(-1j * np.outer(np.asarray(taus, float), self.energies))
        return phases @ (bra.conj() * ket)


def exact_propagator(model, basis, w_i, w_f, tau):
    """ Returns ⟨w_f|exp(-iHτ)|w_i⟩ by exact diagonalisation """
    if not np.isfinite(tau):
        raise PreconditionError(f"propagation time must be finite: {tau}")
    return FockPropagator(model, basis).amplitude(w_i, w_f, tau)


def effective_hamiltonian_oracle(model, basis, wbar, w, matrix=None,
                                 threshold=SINGULAR_OVERLAP_THRESHOLD):
    """
    Returns ⟨w̄*|H|w⟩ / ⟨w̄*|w⟩ by brute force in the Fock basis, the reference
    for the closed form effective Hamiltonian
    """
    wbar = np.asarray(wbar, dtype=complex)
    w = np.asarray(w, dtype=complex)
    denominator = 1 + wbar @ w
    if abs(denominator) < threshold:
        msg = f"near-singular overlap: |1 + w̄·w| = {abs(denominator):.3e}"
        raise SingularityError(msg)

    if matrix is None:
        matrix = hamiltonian_matrix(model, basis)

    bra = coherent_vector(wbar.conj(), basis).conj()
    ket = coherent_vector(w, basis)
    return (bra @ matrix @ ket) / (bra @ ket)
