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

# pylint: disable=invalid-name,too-many-arguments,too-few-public-methods

"""
Two-point boundary value problem w(0) = w_i, w̄(τ) = w_f*, solved for the
unknown initial costate w̄(0) by Newton shooting with τ-continuation
"""

from logging import getLogger
from types import SimpleNamespace

import numpy as np

from scipy import linalg

from .classical import default_integrator_options, integrate_ivp
from ..errors import (CausticError, ContinuationError, ConvergenceError,
                      IntegrationError, PreconditionError)
from ..tools.utils import as_vector, sup_norm


LOG = getLogger(__name__)


def default_solver_options():
    """ Returns the default shooting, continuation and integrator options """
    return SimpleNamespace(
        tolerance=1e-10,
        max_iterations=50,
        max_halvings=30,
        continuation=SimpleNamespace(
            start=1 / 16,
            factor=2.0,
            min_step=1e-6,
        ),
        multistart=SimpleNamespace(
            enabled=False,
            count=8,
            radius=0.5,
            distance=1e-6,
            seed=0,
        ),
        integrator=default_integrator_options(),
    )


class ShootingProblem():
    """ Boundary data and options of one shooting solve """

    def __init__(self, model, N, w_i, wbar_target, tau, opts=None):
        self.model = model
        self.N = N
        self.w_i = as_vector(w_i, model.n - 1)
        self.wbar_target = as_vector(wbar_target, model.n - 1)
        self.tau = float(tau)
        self.opts = default_solver_options() if opts is None else opts

        if not self.tau >= 0 or not np.isfinite(self.tau):
            raise PreconditionError(f"τ must be finite and >= 0: {tau}")
        if not self.opts.tolerance > 0:
            msg = f"residual tolerance must be > 0: {self.opts.tolerance}"
            raise PreconditionError(msg)

    def __repr__(self):
        return (f"ShootingProblem(n={self.model.n}, N={self.N}, "
                f"tau={self.tau})")

    @staticmethod
    def from_boundary(model, N, w_i, w_f, tau, opts=None):
        """ Builds the problem for the propagator ⟨w_f|e^{-iHτ}|w_i⟩ """
        return ShootingProblem(model, N, w_i, np.conj(as_vector(w_f)), tau,
                               opts)

    def at(self, tau):
        """ Returns the same boundary data at another time """
        return ShootingProblem(self.model, self.N, self.w_i, self.wbar_target,
                               tau, self.opts)

    def integrate(self, wbar0):
        """ Integrates the trajectory starting at (w_i, wbar0) """
        return integrate_ivp(self.model, self.N, self.w_i, wbar0, self.tau,
                             self.opts.integrator)

    def residual(self, trajectory):
        """ Returns w̄(τ) - w̄_target """
        return trajectory.final.wbar - self.wbar_target


class Checkpoint():
    """ A converged point (τ, w̄(0)) of a continuation ladder """

    def __init__(self, tau, wbar0, trajectory=None):
        self.tau = float(tau)
        self.wbar0 = np.asarray(wbar0, dtype=complex)
        self.trajectory = trajectory
        self.logs = None

    def __repr__(self):
        return f"Checkpoint(tau={self.tau}, wbar0={self.wbar0!r})"


class BvpSolution():
    """ A converged shooting solution with its continuation path """

    def __init__(self, trajectory, wbar0, residual_norm, newton_iterations,
                 continuation_path=None):
        self.trajectory = trajectory
        self.wbar0 = np.asarray(wbar0, dtype=complex)
        self.residual_norm = residual_norm
        self.newton_iterations = newton_iterations
        if continuation_path is None:
            continuation_path = [Checkpoint(trajectory.tau, wbar0, trajectory)]
        self.continuation_path = list(continuation_path)

    def __repr__(self):
        return (f"BvpSolution(tau={self.tau}, "
                f"residual={self.residual_norm:.3e}, "
                f"iterations={self.newton_iterations})")

    @property
    def tau(self):
        """ Returns the propagation time """
        return self.trajectory.tau

    @property
    def checkpoint(self):
        """ Returns the final checkpoint, the warm start for a longer τ """
        return self.continuation_path[-1]


def solve_shooting(prob, initial_guess=None):
    """
    Newton iteration on F(x) = w̄(τ; w_i, x) - w̄_target with Jacobian M22,
    damped by halving the step until the sup-norm residual decreases
    """
    opts = prob.opts

    if prob.tau == 0:
        traj = prob.integrate(prob.wbar_target)
        return BvpSolution(traj, prob.wbar_target, 0.0, 0)

    if initial_guess is None:
        x = prob.w_i.conj()
    else:
        x = as_vector(initial_guess, prob.w_i.size)

    traj = prob.integrate(x)
    F = prob.residual(traj)
    res = sup_norm(F)

    for it in range(opts.max_iterations + 1):
        LOG.debug("newton τ=%.6g iteration %d residual %.3e", prob.tau, it,
                  res)
        if res <= opts.tolerance:
            return BvpSolution(traj, x, res, it)
        if it == opts.max_iterations:
            break

        if traj.caustic_distance < opts.integrator.caustic_threshold:
            msg = (f"caustic at τ={prob.tau:.6g}: |det M22| = "
                   f"{abs(traj.det_m22):.3e}, perturb τ or the boundary data")
            raise CausticError(msg, det_m22=traj.det_m22)

        try:
            step = linalg.solve(traj.M22, -F)
        except linalg.LinAlgError as e:
            msg = f"singular Newton Jacobian at τ={prob.tau:.6g}"
            raise CausticError(msg, det_m22=traj.det_m22) from e

        lam = 1.0
        last_error, integrated = None, False
        for _ in range(opts.max_halvings + 1):
            candidate = x + lam * step
            try:
                trial = prob.integrate(candidate)
            except IntegrationError as e:
                last_error = e
                lam /= 2
                continue

            integrated = True
            trial_F = prob.residual(trial)
            trial_res = sup_norm(trial_F)
            if trial_res < res:
                x, traj, F, res = candidate, trial, trial_F, trial_res
                break
            lam /= 2
        else:
            if not integrated:
                LOG.debug("no damped step integrated at τ=%.6g", prob.tau)
                raise last_error
            msg = (f"line search stalled at τ={prob.tau:.6g} with residual "
                   f"{res:.3e}")
            raise ConvergenceError(msg, residual=res, wbar0=x)

    msg = (f"no convergence in {opts.max_iterations} iterations at "
           f"τ={prob.tau:.6g}, best residual {res:.3e}")
    raise ConvergenceError(msg, residual=res, wbar0=x)


def solve_with_continuation(prob, start=None, accept=None):
    """
    Solves along a geometric ladder of times from the start checkpoint
    (default τ = 0, where w̄(0) = w̄_target), warm-starting each Newton solve
    from the previous w̄(0). A failed or rejected rung is refined by halving
    the step. accept(previous, checkpoint) may reject a rung, which is how
    branch tracking asks for a finer ladder
    """
    opts = prob.opts.continuation
    if start is None:
        start = Checkpoint(0.0, prob.wbar_target, prob.at(0.0).integrate(
            prob.wbar_target))

    if prob.tau < start.tau:
        msg = f"continuation runs forward only: {start.tau} > {prob.tau}"
        raise PreconditionError(msg)

    path = [start]
    if prob.tau == start.tau:
        sol = solve_shooting(prob, start.wbar0)
        sol.continuation_path = [start]
        return sol

    span = prob.tau - start.tau
    min_step = opts.min_step * span
    current = start
    target = start.tau + span * opts.start
    sol = None
    iterations = 0

    while current.tau < prob.tau:
        target = min(target, prob.tau)
        rung = prob.at(target)

        try:
            sol = solve_shooting(rung, current.wbar0)
            checkpoint = Checkpoint(target, sol.wbar0, sol.trajectory)
            accepted = accept is None or accept(current, checkpoint)
        except (ConvergenceError, CausticError, IntegrationError) as e:
            LOG.debug("continuation rung τ=%.6g failed: %s", target, e)
            accepted = False

        if not accepted:
            step = (target - current.tau) / 2
            if step < min_step:
                msg = (f"continuation stalled at τ={current.tau:.6g}, "
                       f"step below {min_step:.3e}")
                raise ContinuationError(msg, tau=current.tau)
            target = current.tau + step
            continue

        LOG.debug("continuation accepted τ=%.6g after %d iterations", target,
                  sol.newton_iterations)
        iterations += sol.newton_iterations
        path.append(checkpoint)
        current = checkpoint
        target = start.tau + (current.tau - start.tau) * opts.factor

    return BvpSolution(sol.trajectory, sol.wbar0, sol.residual_norm,
                       iterations, path)


def solve_multistart(prob, count=None, radius=None, seed=None,
                      primary=None):
    """
    Returns the distinct solutions found from the continuation solution and
    from random perturbations of the default guess on a sphere of the given
    radius. The continuation solution, when it exists, comes first; a
    primary solution already at hand takes its place
    """
    opts = prob.opts.multistart
    count = opts.count if count is None else count
    radius = opts.radius if radius is None else radius
    seed = opts.seed if seed is None else seed

    solutions = []

    def add(sol):
        for other in solutions:
            if sup_norm(other.wbar0 - sol.wbar0) <= opts.distance:
                return
        solutions.append(sol)

    if primary is not None:
        add(primary)
    else:
        try:
            add(solve_with_continuation(prob))
        except (ConvergenceError, CausticError, IntegrationError,
                ContinuationError) as e:
            LOG.warning("continuation solve failed: %s", e)

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    m = prob.w_i.size
    base = prob.w_i.conj()

    for k in range(count):
        direction = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        guess = base + radius * direction / np.linalg.norm(direction)
        try:
            add(solve_shooting(prob, guess))
        except (ConvergenceError, CausticError, IntegrationError) as e:
            LOG.debug("multistart guess %d failed: %s", k, e)

    LOG.debug("multistart found %d distinct solution(s)", len(solutions))
    return solutions
