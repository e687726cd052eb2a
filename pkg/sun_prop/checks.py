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

# pylint: disable=invalid-name,too-many-locals,too-few-public-methods

"""
Invariant suites run by the check command. Every suite returns one
CheckResult per invariant with the largest deviation it observed
"""

import math

from logging import getLogger

import numpy as np

from scipy import linalg

from .core.classical import (equations_of_motion, phase_space_matrices,
                             quadratic_forms, tangent_blocks)
from .core.coherent import DoubledPoint, effective_hamiltonian, overlap
from .core.fock import (build_basis, effective_hamiltonian_oracle,
                        hamiltonian_matrix, overlap_exact, random_model)
from .core.glauber import (glauber_classical_flow, glauber_exact_propagator,
                           glauber_semiclassical_propagator)
from .core.semiclassics import propagator_vs_exact
from .tools.numdiff import complex_step_jacobian


LOG = getLogger(__name__)


class CheckResult():
    """
    One invariant of a suite. Most invariants pass when the deviation is at
    most the tolerance; violations that must be detected pass when it is
    above
    """

    def __init__(self, suite, invariant, deviation, tolerance, above=False):
        self.suite = suite
        self.invariant = invariant
        self.deviation = float(deviation)
        self.tolerance = tolerance
        self.above = above

    def __repr__(self):
        return (f"CheckResult({self.suite}.{self.invariant}: "
                f"{self.deviation:.3e}, passed={self.passed})")

    @property
    def passed(self):
        """ True when the deviation is on the right side of the tolerance """
        if self.above:
            return self.deviation > self.tolerance
        return self.deviation <= self.tolerance


def _rng(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _gaussian(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape)
                    + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def _random_point(rng, m, scale=0.5):
    return DoubledPoint(_gaussian(rng, m, scale), _gaussian(rng, m, scale))


def _deviation(value, reference):
    value = np.asarray(value)
    reference = np.asarray(reference)
    scale = max(1.0, float(np.max(np.abs(reference), initial=0.0)))
    return float(np.max(np.abs(value - reference), initial=0.0)) / scale


def check_overlap(seed=0, count=50):
    """ Closed form overlaps against Fock inner products """
    rng = _rng(seed)
    worst = 0.0
    for n in (2, 3, 4):
        for N in range(1, 7):
            basis = build_basis(n, N)
            for _ in range(count):
                w_prime = _gaussian(rng, n - 1)
                w = _gaussian(rng, n - 1)
                worst = max(worst, abs(overlap(w_prime, w, N)
                                       - overlap_exact(w_prime, w, basis)))
    return [CheckResult("overlap", "closed_form_vs_fock", worst, 1e-12)]


def check_oracle(seed=0, models=20, points=5):
    """ The effective Hamiltonian against ⟨w̄*|H|w⟩ / ⟨w̄*|w⟩ in Fock space """
    rng = _rng(seed)
    worst = 0.0
    for k in range(models):
        n = 2 + k % 3
        N = 1 + k % 6
        model = random_model(n, rng)
        basis = build_basis(n, N)
        matrix = hamiltonian_matrix(model, basis)
        for _ in range(points):
            p = _random_point(rng, n - 1)
            value = effective_hamiltonian(model, p, N).value
            oracle = effective_hamiltonian_oracle(model, basis, p.wbar, p.w,
                                                  matrix=matrix)
            worst = max(worst, abs(value - oracle) / max(1.0, abs(oracle)))
    return [CheckResult("oracle", "symbol_vs_fock", worst, 1e-10)]


def _doubled_map(f, m):
    def mapped(z):
        return f(DoubledPoint(z[:m], z[m:]))
    return mapped


def check_gradients(seed=0, models=20):
    """ Analytic derivatives against complex-step differentiation """
    rng = _rng(seed)
    grad_dev = hess_dev = tangent_dev = 0.0

    for k in range(models):
        n = 2 + k % 3
        N = 2 + k % 9
        m = n - 1
        model = random_model(n, rng)
        p = _random_point(rng, m)
        z = np.concatenate([p.w, p.wbar])
        jet = effective_hamiltonian(model, p, N)

        def value(q, model=model, N=N):
            return effective_hamiltonian(model, q, N).value

        def gradient(q, model=model, N=N):
            jet = effective_hamiltonian(model, q, N)
            return np.concatenate([jet.grad_w, jet.grad_wbar])

        def flow(q, model=model, N=N):
            return np.concatenate(equations_of_motion(model, q, N))

        grad = np.concatenate([jet.grad_w, jet.grad_wbar])
        hess = np.block([[jet.hess_ww, jet.hess_wwbar],
                         [jet.hess_wbarw, jet.hess_wbarwbar]])

        grad_dev = max(grad_dev, _deviation(
            complex_step_jacobian(_doubled_map(value, m), z), grad))
        hess_dev = max(hess_dev, _deviation(
            complex_step_jacobian(_doubled_map(gradient, m), z), hess))
        tangent_dev = max(tangent_dev, _deviation(
            complex_step_jacobian(_doubled_map(flow, m), z),
            tangent_blocks(model, p, N).matrix))

    return [
        CheckResult("gradients", "gradient", grad_dev, 1e-9),
        CheckResult("gradients", "hessian", hess_dev, 1e-9),
        CheckResult("gradients", "tangent_blocks", tangent_dev, 1e-9),
    ]


def check_matrices(seed=0, count=100, N=10):
    """ Algebraic identities of Ξ, Θ and Q """
    rng = _rng(seed)
    inverse = sqrt = sqrt_inverse = det_identity = det_theta = 0.0

    for k in range(count):
        n = 2 + k % 3
        m = n - 1
        p = _random_point(rng, m)
        mat = phase_space_matrices(p, N)
        D = p.denominator
        eye = np.eye(m)

        inverse = max(inverse, _deviation(mat.Theta @ mat.Xi, eye))
        sqrt = max(sqrt, _deviation(mat.Q @ mat.Q, mat.Theta))
        sqrt_inverse = max(sqrt_inverse, _deviation(mat.Q @ mat.Qinv, eye))

        det = np.linalg.det(D * eye - np.outer(p.w, p.wbar))
        det_identity = max(det_identity, abs(det / D ** (n - 2) - 1))
        det_theta = max(det_theta, abs(np.linalg.det(mat.Theta)
                                       * D ** n / N ** m - 1))

    return [
        CheckResult("matrices", "theta_xi_identity", inverse, 1e-10),
        CheckResult("matrices", "q_squared_theta", sqrt, 1e-10),
        CheckResult("matrices", "q_qinv_identity", sqrt_inverse, 1e-10),
        CheckResult("matrices", "det_identity", det_identity, 1e-10),
        CheckResult("matrices", "det_theta", det_theta, 1e-10),
    ]


def check_trace(seed=0, count=50, N=10):
    """
    The trace relation Tr B̃ = ½Tr(R11 - R22), the vanishing trace of the
    commutator term, and the R22ᵀ = -R11 identity which holds for Glauber
    flows and fails for generic SU(n) points
    """
    rng = _rng(seed)
    relation = commutator = 0.0
    violation = math.inf

    for k in range(count):
        n = 2 + k % 3
        model = random_model(n, rng)
        p = _random_point(rng, n - 1)
        pdot = equations_of_motion(model, p, N)
        forms = quadratic_forms(model, p, pdot, N)
        R = tangent_blocks(model, p, N)
        mat = phase_space_matrices(p, N)

        target = 0.5 * np.trace(R.R11 - R.R22)
        scale = max(1.0, abs(target))
        relation = max(relation, abs(np.trace(forms.Btil) - target) / scale)
        relation = max(relation, abs(np.trace(mat.Qbarinv @ mat.Qbarinv
                                              @ forms.B) - target) / scale)

        rate = forms.Qbar_rate
        commutator = max(commutator, abs(np.trace(
            rate @ mat.Qbarinv - mat.Qbarinv @ rate)))
        violation = min(violation, _deviation(R.R22.T, -R.R11))

    h = _gaussian(rng, (3, 3))
    h = 0.5 * (h + h.conj().T)
    flow = glauber_classical_flow(h, _gaussian(rng, 3), _gaussian(rng, 3), 1.0)
    glauber = _deviation(flow.R22.T, -flow.R11)

    return [
        CheckResult("trace", "trace_relation", relation, 1e-9),
        CheckResult("trace", "commutator_traceless", commutator, 1e-12),
        CheckResult("trace", "sun_r_identity_violated", violation, 1e-6,
                    above=True),
        CheckResult("trace", "glauber_r_identity", glauber, 0.0),
    ]


def check_glauber(seed=0, count=20):
    """ Semiclassical Glauber propagators of quadratic H are exact """
    rng = _rng(seed)
    worst = 0.0
    for k in range(count):
        m = 1 + k % 3
        h = _gaussian(rng, (m, m))
        h = 0.5 * (h + h.conj().T)
        z_i = _gaussian(rng, m)
        z_f = _gaussian(rng, m)
        tau = 5.0 * (1.0 - rng.random())
        worst = max(worst, abs(glauber_semiclassical_propagator(h, z_i, z_f,
                                                                tau)
                               - glauber_exact_propagator(h, z_i, z_f, tau)))

    # Monodromy against the flow of a displaced start
    h = np.diag([0.7, -0.3])
    z0 = np.array([0.3, 0.1j])
    zbar0 = np.array([0.2, -0.4])
    flow = glauber_classical_flow(h, z0, zbar0, 2.0)
    expected = linalg.block_diag(linalg.expm(-2j * h), linalg.expm(2j * h.T))
    monodromy = _deviation(flow.monodromy, expected)

    return [
        CheckResult("glauber", "exactness", worst, 1e-10),
        CheckResult("glauber", "monodromy", monodromy, 1e-12),
    ]


def check_onebody(seed=0, models=2):
    """ SU(n) semiclassics reproduce exact propagators of one-body models """
    rng = _rng(seed)
    worst = 0.0
    taus = [0.25, 0.5, 1.0]
    for n in (2, 3):
        for N in (5, 10):
            for _ in range(models):
                model = random_model(n, rng, one_body=True)
                w_i = _gaussian(rng, n - 1, 0.5)
                w_f = _gaussian(rng, n - 1, 0.5)
                for row in propagator_vs_exact(model, N, w_i, w_f, taus):
                    if row.exact_underflow:
                        continue
                    err = math.inf if row.rel_err is None else row.rel_err
                    worst = max(worst, err)
    return [CheckResult("onebody", "exactness", worst, 1e-6)]


SUITES = {
    "overlap": check_overlap,
    "oracle": check_oracle,
    "gradients": check_gradients,
    "matrices": check_matrices,
    "trace": check_trace,
    "glauber": check_glauber,
    "onebody": check_onebody,
}


def run_suites(names=None, seed=0):
    """ Runs the named suites, or all of them, in a fixed order """
    results = []
    for name in SUITES if not names else names:
        LOG.debug("running check suite '%s'", name)
        results.extend(SUITES[name](seed=seed))
    return results
