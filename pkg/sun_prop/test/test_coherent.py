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

import cmath
import math
import unittest

import numpy as np

from ..core.coherent import (DoubledPoint, effective_hamiltonian,
                             identity_deviation, identity_resolution_mc,
                             log_overlap, measure_weight, overlap,
                             sample_coherent_parameters)
from ..core.fock import (HamiltonianModel, bose_hubbard, build_basis,
                         effective_hamiltonian_oracle, hamiltonian_matrix,
                         random_model)
from ..errors import DimensionError, PreconditionError, SingularityError
from ..tools.numdiff import complex_step_jacobian


def _rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def _point(rng, m, scale=0.5):
    def gaussian():
        return scale * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
    return DoubledPoint(gaussian(), gaussian())


class TestDoubledPoint(unittest.TestCase):

    def test__point_homogeneous(self):
        p = DoubledPoint([1j, 2.0], [0.5, -1j])
        self.assertTrue(np.array_equal(p.u, [1j, 2.0, 1.0]))
        self.assertTrue(np.array_equal(p.ubar, [0.5, -1j, 1.0]))
        self.assertEqual(p.denominator, 1 + 0.5j - 2j)
        self.assertEqual(p.m, 2)

    def test__point_physical(self):
        self.assertTrue(DoubledPoint.physical([0.3 + 0.1j]).is_physical())
        self.assertFalse(DoubledPoint([0.3], [0.2]).is_physical())

    def test__point_mismatch(self):
        with self.assertRaises(DimensionError):
            DoubledPoint([0.1, 0.2], [0.1])

    def test__point_singular(self):
        with self.assertRaises(SingularityError):
            DoubledPoint([1.0], [-1.0]).check()


class TestOverlap(unittest.TestCase):

    def test__overlap_self(self):
        w = np.array([0.3 - 0.7j, 1.2])
        self.assertAlmostEqual(overlap(w, w, 7), 1.0, places=13)

    def test__overlap_origin(self):
        # ⟨0|w⟩ = (1 + |w|²)^{-N/2}
        w = np.array([0.5j])
        self.assertAlmostEqual(overlap([0.0], w, 4), 1.25 ** -2, places=14)

    def test__overlap_bounded(self):
        rng = _rng(1)
        for _ in range(20):
            a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            self.assertLessEqual(abs(overlap(a, b, 5)), 1.0 + 1e-14)

    def test__overlap_log(self):
        a = np.array([0.2 + 0.1j, -0.4j])
        b = np.array([1.1, 0.3 + 0.3j])
        self.assertAlmostEqual(cmath.exp(log_overlap(a, b, 6)),
                               overlap(a, b, 6), places=13)

    def test__overlap_log_large_n(self):
        a = np.array([3.0])
        b = np.array([-2.0 + 1j])
        self.assertTrue(math.isfinite(log_overlap(a, b, 5000).real))

    def test__overlap_lengths(self):
        with self.assertRaises(DimensionError):
            overlap([0.1], [0.1, 0.2], 3)


class TestEffectiveHamiltonian(unittest.TestCase):

    def test__symbol_constant(self):
        jet = effective_hamiltonian(HamiltonianModel(np.eye(3)),
                                    DoubledPoint([0.2, 1j], [0.5, 0.1]), 4)
        self.assertAlmostEqual(jet.value, 4.0, places=13)
        self.assertTrue(np.allclose(jet.grad_w, 0, atol=1e-13))
        self.assertTrue(np.allclose(jet.hess_wwbar, 0, atol=1e-13))

    def test__symbol_number_operator(self):
        model = HamiltonianModel(np.diag([1.0, 0.0]))
        p = DoubledPoint([0.4 + 0.2j], [0.1 - 0.3j])
        s = p.wbar @ p.w
        self.assertAlmostEqual(effective_hamiltonian(model, p, 6).value,
                               6 * s / (1 + s), places=13)

    def test__symbol_matches_oracle(self):
        rng = _rng(3)
        for k in range(6):
            n, N = 2 + k % 3, 1 + k
            model = random_model(n, rng)
            basis = build_basis(n, N)
            matrix = hamiltonian_matrix(model, basis)
            for _ in range(3):
                p = _point(rng, n - 1)
                oracle = effective_hamiltonian_oracle(model, basis, p.wbar,
                                                      p.w, matrix=matrix)
                value = effective_hamiltonian(model, p, N).value
                self.assertLess(abs(value - oracle) / max(1, abs(oracle)),
                                1e-10)

    def test__symbol_derivatives(self):
        rng = _rng(4)
        model = random_model(3, rng)
        p = _point(rng, 2)
        N = 7
        z = np.concatenate([p.w, p.wbar])
        jet = effective_hamiltonian(model, p, N)

        def value(y):
            return effective_hamiltonian(model, DoubledPoint(y[:2], y[2:]),
                                         N).value

        def gradient(y):
            q = effective_hamiltonian(model, DoubledPoint(y[:2], y[2:]), N)
            return np.concatenate([q.grad_w, q.grad_wbar])

        grad = np.concatenate([jet.grad_w, jet.grad_wbar])
        hess = np.block([[jet.hess_ww, jet.hess_wwbar],
                         [jet.hess_wbarw, jet.hess_wbarwbar]])
        scale = max(1.0, np.max(np.abs(hess)))
        self.assertTrue(np.allclose(complex_step_jacobian(value, z), grad,
                                    rtol=0, atol=1e-9 * scale))
        self.assertTrue(np.allclose(complex_step_jacobian(gradient, z), hess,
                                    rtol=0, atol=1e-9 * scale))

    def test__symbol_single_particle(self):
        # N = 1 has no two-body contribution
        model = bose_hubbard(2, 1.0, 5.0)
        p = DoubledPoint([0.3], [0.2])
        one_body = HamiltonianModel(model.h)
        self.assertAlmostEqual(effective_hamiltonian(model, p, 1).value,
                               effective_hamiltonian(one_body, p, 1).value)

    def test__symbol_dimension(self):
        with self.assertRaises(DimensionError):
            effective_hamiltonian(bose_hubbard(3, 1.0, 0.0),
                                  DoubledPoint([0.1], [0.1]), 2)

    def test__symbol_real_on_physical_points(self):
        rng = _rng(8)
        for n in (2, 3, 4):
            model = random_model(n, rng)
            for N in (1, 5, 20):
                for _ in range(20):
                    w = 0.8 * (rng.standard_normal(n - 1)
                               + 1j * rng.standard_normal(n - 1))
                    value = effective_hamiltonian(
                        model, DoubledPoint.physical(w), N).value
                    self.assertLessEqual(abs(value.imag), 1e-10 * abs(value))

    def test__symbol_singular(self):
        with self.assertRaises(SingularityError):
            effective_hamiltonian(bose_hubbard(2, 1.0, 0.0),
                                  DoubledPoint([2.0], [-0.5]), 2)


class TestMeasure(unittest.TestCase):

    def test__measure_weight_origin(self):
        # σ(2) dim / 1 = dim / π for n = 2
        weight = measure_weight(DoubledPoint.physical([0.0]), 2, 3)
        self.assertAlmostEqual(weight, 4 / math.pi)

    def test__measure_requires_physical(self):
        with self.assertRaises(PreconditionError):
            measure_weight(DoubledPoint([0.1], [0.2]), 2, 3)

    def test__measure_samples_shape(self):
        W = sample_coherent_parameters(_rng(), 100, 4)
        self.assertEqual(W.shape, (100, 3))

    def test__identity_mc(self):
        for n, N in ((2, 1), (2, 3), (3, 2)):
            estimate, stderr = identity_resolution_mc(n, N, 1000000, seed=0)
            self.assertLessEqual(identity_deviation(estimate, stderr), 3.0)

    def test__identity_mc_deterministic(self):
        first = identity_resolution_mc(2, 2, 10000, seed=5, chunk_size=3000)
        second = identity_resolution_mc(2, 2, 10000, seed=5, chunk_size=3000)
        self.assertTrue(np.array_equal(first[0], second[0]))

    def test__identity_mc_preconditions(self):
        with self.assertRaises(PreconditionError):
            identity_resolution_mc(2, 1, 100, seed=0)
        with self.assertRaises(PreconditionError):
            identity_resolution_mc(2, 1, 10000, seed=-1)

    def test__identity_deviation(self):
        estimate = np.eye(2) + np.array([[0.0, 0.02], [0.0, 0.0]])
        stderr = np.full((2, 2), 0.01)
        self.assertAlmostEqual(identity_deviation(estimate, stderr), 2.0)
