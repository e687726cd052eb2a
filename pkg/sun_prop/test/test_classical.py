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

import unittest

import numpy as np

from scipy.integrate import simpson

from ..core.classical import (default_integrator_options, equations_of_motion,
                              integrate_ivp, phase_space_matrices,
                              quadratic_forms, tangent_blocks)
from ..core.coherent import DoubledPoint
from ..core.fock import HamiltonianModel, bose_hubbard, random_model
from ..errors import PreconditionError, SingularityError
from ..tools.numdiff import complex_step_jacobian


def _rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def _point(rng, m, scale=0.5):
    def gaussian():
        return scale * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
    return DoubledPoint(gaussian(), gaussian())


def _close(a, b, tol):
    scale = max(1.0, float(np.max(np.abs(b))))
    return float(np.max(np.abs(np.asarray(a) - b))) <= tol * scale


class TestPhaseSpaceMatrices(unittest.TestCase):

    def test__matrices_origin(self):
        mat = phase_space_matrices(DoubledPoint([0, 0], [0, 0]), 9)
        self.assertTrue(np.allclose(mat.Theta, 9 * np.eye(2)))
        self.assertTrue(np.allclose(mat.Q, 3 * np.eye(2)))
        self.assertTrue(np.allclose(mat.Qinv, np.eye(2) / 3))

    def test__matrices_identities(self):
        rng = _rng(1)
        N = 10
        for k in range(30):
            n = 2 + k % 3
            m = n - 1
            p = _point(rng, m)
            mat = phase_space_matrices(p, N)
            D = p.denominator
            self.assertTrue(_close(mat.Theta @ mat.Xi, np.eye(m), 1e-10))
            self.assertTrue(_close(mat.Q @ mat.Q, mat.Theta, 1e-10))
            self.assertTrue(_close(mat.Q @ mat.Qinv, np.eye(m), 1e-10))
            self.assertTrue(np.array_equal(mat.Qbar, mat.Q.T))
            self.assertTrue(np.array_equal(mat.Thetabar, mat.Theta.T))

            det = np.linalg.det(D * np.eye(m) - np.outer(p.w, p.wbar))
            self.assertLess(abs(det / D ** (n - 2) - 1), 1e-10)
            self.assertLess(abs(np.linalg.det(mat.Theta) * D ** n / N ** m
                                - 1), 1e-10)

    def test__matrices_near_origin(self):
        # the closed forms and the direct square root agree across the switch
        w = np.array([1e-4, 2e-4j])
        small = phase_space_matrices(DoubledPoint(w, w.conj()), 4)
        self.assertTrue(_close(small.Q @ small.Q, small.Theta, 1e-10))
        tiny = phase_space_matrices(DoubledPoint(w * 1e-3, w.conj() * 1e-3),
                                    4)
        self.assertTrue(_close(tiny.Q @ tiny.Q, tiny.Theta, 1e-10))
        self.assertTrue(_close(tiny.Q, small.Q, 1e-6))

    def test__matrices_singular(self):
        with self.assertRaises(SingularityError):
            phase_space_matrices(DoubledPoint([1.0], [-1.0]), 3)


class TestEquationsOfMotion(unittest.TestCase):

    def test__motion_constant(self):
        model = HamiltonianModel(np.eye(3))
        wdot, wbardot = equations_of_motion(
            model, DoubledPoint([0.2, 1j], [0.3, -0.5]), 5)
        self.assertTrue(np.allclose(wdot, 0, atol=1e-13))
        self.assertTrue(np.allclose(wbardot, 0, atol=1e-13))

    def test__motion_single_mode(self):
        omega = 0.8
        model = HamiltonianModel(np.diag([omega, 0.0]))
        p = DoubledPoint([0.3 - 0.2j], [1.1 + 0.4j])
        wdot, wbardot = equations_of_motion(model, p, 6)
        self.assertAlmostEqual(wdot[0], -1j * omega * p.w[0], places=13)
        self.assertAlmostEqual(wbardot[0], 1j * omega * p.wbar[0], places=13)

    def test__motion_physical_closure(self):
        model = random_model(3, _rng(2))
        w = np.array([0.3 + 0.1j, -0.2j])
        wdot, wbardot = equations_of_motion(model, DoubledPoint.physical(w), 8)
        self.assertTrue(np.allclose(wbardot, wdot.conj(), atol=1e-12))


class TestTangentBlocks(unittest.TestCase):

    def test__tangent_constant(self):
        R = tangent_blocks(HamiltonianModel(np.eye(2)),
                           DoubledPoint([0.4], [0.1j]), 3)
        self.assertTrue(np.allclose(R.matrix, 0, atol=1e-13))

    def test__tangent_single_mode(self):
        omega = 1.3
        R = tangent_blocks(HamiltonianModel(np.diag([omega, 0.0])),
                           DoubledPoint([0.5j], [0.2]), 4)
        self.assertAlmostEqual(R.R11[0, 0], -1j * omega, places=12)
        self.assertAlmostEqual(R.R22[0, 0], 1j * omega, places=12)
        self.assertAlmostEqual(abs(R.R12[0, 0]), 0, places=12)
        self.assertAlmostEqual(abs(R.R21[0, 0]), 0, places=12)

    def test__tangent_complex_step(self):
        rng = _rng(3)
        for k in range(6):
            n = 2 + k % 3
            m = n - 1
            N = 3 + k
            model = random_model(n, rng)
            p = _point(rng, m)

            def flow(z, model=model, N=N, m=m):
                q = DoubledPoint(z[:m], z[m:])
                return np.concatenate(equations_of_motion(model, q, N))

            z = np.concatenate([p.w, p.wbar])
            self.assertTrue(_close(complex_step_jacobian(flow, z),
                                   tangent_blocks(model, p, N).matrix, 1e-9))

    def test__tangent_transpose_identity_fails(self):
        rng = _rng(4)
        model = random_model(3, rng)
        R = tangent_blocks(model, _point(rng, 2), 10)
        self.assertGreater(np.max(np.abs(R.R22.T + R.R11)), 1e-6)


class TestQuadraticForms(unittest.TestCase):

    def test__forms_trace_relation(self):
        rng = _rng(5)
        N = 10
        for k in range(50):
            n = 2 + k % 3
            model = random_model(n, rng)
            p = _point(rng, n - 1)
            pdot = equations_of_motion(model, p, N)
            forms = quadratic_forms(model, p, pdot, N)
            R = tangent_blocks(model, p, N)
            mat = phase_space_matrices(p, N)

            target = 0.5 * np.trace(R.R11 - R.R22)
            scale = max(1.0, abs(target))
            self.assertLess(abs(np.trace(forms.Btil) - target) / scale, 1e-9)
            self.assertLess(abs(np.trace(np.linalg.inv(mat.Thetabar)
                                         @ forms.B) - target) / scale, 1e-9)

    def test__forms_constant(self):
        model = HamiltonianModel(np.eye(3))
        p = DoubledPoint([0.1, 0.2j], [0.3, 0.1])
        forms = quadratic_forms(model, p, equations_of_motion(model, p, 5), 5)
        for M in (forms.A, forms.B, forms.C, forms.Atil, forms.Btil,
                  forms.Ctil):
            self.assertTrue(np.allclose(M, 0, atol=1e-12))

    def test__forms_qbar_rate(self):
        # dQ̄/dt against a central difference along the flow
        rng = _rng(6)
        model = random_model(3, rng)
        N = 6
        p = _point(rng, 2)
        wdot, wbardot = equations_of_motion(model, p, N)
        forms = quadratic_forms(model, p, (wdot, wbardot), N)
        h = 1e-6

        def qbar(t):
            q = DoubledPoint(p.w + t * wdot, p.wbar + t * wbardot)
            return phase_space_matrices(q, N).Qbar

        rate = (qbar(h) - qbar(-h)) / (2 * h)
        self.assertTrue(_close(forms.Qbar_rate, rate, 1e-6))


class TestIntegrateIvp(unittest.TestCase):

    def test__ivp_single_mode(self):
        omega, tau = 0.9, 2.0
        model = HamiltonianModel(np.diag([omega, 0.0]))
        w0 = np.array([0.4 + 0.3j])
        traj = integrate_ivp(model, 5, w0, w0.conj(), tau)

        for t, p in zip(traj.grid, traj.points):
            self.assertAlmostEqual(p.w[0], np.exp(-1j * omega * t) * w0[0],
                                   places=9)
        self.assertAlmostEqual(traj.block(1, 1)[0, 0],
                               np.exp(-1j * omega * tau), places=9)
        self.assertAlmostEqual(traj.M22[0, 0], np.exp(1j * omega * tau),
                               places=9)
        self.assertAlmostEqual(abs(traj.block(1, 2)[0, 0]), 0, places=9)
        self.assertAlmostEqual(abs(traj.block(2, 1)[0, 0]), 0, places=9)

    def test__ivp_zero_time(self):
        model = bose_hubbard(2, 1.0, 0.3)
        traj = integrate_ivp(model, 4, [0.2], [0.5j], 0.0)
        self.assertEqual(traj.action_integral, 0)
        self.assertEqual(traj.correction_integral, 0)
        self.assertTrue(np.array_equal(traj.monodromy, np.eye(2)))
        self.assertEqual(traj.tau, 0.0)

    def test__ivp_invariants(self):
        model = bose_hubbard(3, 1.0, 0.05)
        w0 = np.array([0.5 + 0.2j, -0.3j])
        traj = integrate_ivp(model, 10, w0, w0.conj(), 1.0)

        self.assertTrue(traj.energy_accepted)
        self.assertLessEqual(traj.energy_drift,
                             1e-8 * max(1.0, abs(traj.energies[0])))
        self.assertLess(traj.liouville_defect(), 1e-6)
        for p in traj.points:
            self.assertTrue(np.allclose(p.wbar, p.w.conj(), atol=1e-9))
        self.assertFalse(traj.caustic_flag)
        self.assertFalse(traj.singularity_flag)
        self.assertEqual(traj.sqrt_flips, 0)

    def test__ivp_doubled_invariants(self):
        model = bose_hubbard(2, 1.0, 0.1)
        traj = integrate_ivp(model, 10, [0.3 + 0.2j], [0.6 - 0.1j], 0.8)
        self.assertLess(traj.liouville_defect(), 1e-6)
        self.assertTrue(traj.energy_accepted)

    def test__ivp_monodromy_finite_difference(self):
        model = bose_hubbard(2, 1.0, 0.2)
        N, tau = 10, 0.7
        w0 = np.array([0.3 + 0.1j])
        wbar0 = np.array([0.2 - 0.4j])
        traj = integrate_ivp(model, N, w0, wbar0, tau)
        h = 1e-6

        shifted = [integrate_ivp(model, N, w0, wbar0 + s, tau).final
                   for s in (h, -h)]
        dw = (shifted[0].w - shifted[1].w) / (2 * h)
        dwbar = (shifted[0].wbar - shifted[1].wbar) / (2 * h)
        self.assertTrue(np.allclose(dw, traj.block(1, 2)[:, 0], atol=1e-5))
        self.assertTrue(np.allclose(dwbar, traj.M22[:, 0], atol=1e-5))

    def test__ivp_correction_integral(self):
        # iI = -¼∫Tr(R11 - R22) dt = -½∫Tr B̃ dt
        model = bose_hubbard(2, 1.0, 0.3)
        N = 10
        opts = default_integrator_options()
        opts.samples = 129
        w0 = np.array([0.4 - 0.1j])
        traj = integrate_ivp(model, N, w0, np.array([0.3 + 0.2j]), 0.6, opts)

        traces = []
        for p in traj.points:
            pdot = equations_of_motion(model, p, N)
            traces.append(np.trace(quadratic_forms(model, p, pdot, N).Btil))
        expected = -0.5 * simpson(traces, x=traj.grid)
        self.assertLess(abs(traj.correction_integral - expected),
                        1e-8 * max(1.0, abs(expected)))

    def test__ivp_preconditions(self):
        model = bose_hubbard(2, 1.0, 0.0)
        with self.assertRaises(PreconditionError):
            integrate_ivp(model, 2, [0.1], [0.1], -1.0)
        with self.assertRaises(SingularityError):
            integrate_ivp(model, 2, [1.0], [-1.0], 1.0)
