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

# pylint: disable=invalid-name,too-many-arguments,too-many-locals
# pylint: disable=too-few-public-methods,too-many-instance-attributes

"""
Assembly of the semiclassical propagator from a solved trajectory, with the
logarithms of the boundary terms and of the determinant prefactor continued
along the τ-ladder
"""

import cmath
import copy
import math

from logging import getLogger
from types import SimpleNamespace

import numpy as np

from .bvp import (Checkpoint, ShootingProblem, default_solver_options,
                  solve_multistart, solve_shooting, solve_with_continuation)
from .fock import DEFAULT_DIMENSION_CAP, FockPropagator, build_basis
from ..errors import (CausticError, CheckInconclusiveError,
                      ContinuationError, ConvergenceError, IntegrationError,
                      PreconditionError, SingularityError, SunPropError)
from ..tools.utils import (as_vector, continue_log, relative_error, sup_norm,
                           unwrap_log, winding_number)


LOG = getLogger(__name__)

BRANCH_JUMP_LIMIT = math.pi / 2
CHECK_TOLERANCE = 1e-13
EXACT_FLOOR_FACTOR = 1e7


class PrefactorLogs():
    """
    The logarithms whose branches are tracked along a ladder:
        Log(1 + w_f*·w(τ)), Log(1 + w̄(0)·w_i),
        Log[(1 + w̄(τ)w(τ)) / (1 + w̄(0)w(0))] and Log det M22
    """

    def __init__(self, log_final, log_initial, log_ratio, log_det):
        self.log_final = log_final
        self.log_initial = log_initial
        self.log_ratio = log_ratio
        self.log_det = log_det

    def __repr__(self):
        return (f"PrefactorLogs(final={self.log_final}, "
                f"initial={self.log_initial}, ratio={self.log_ratio}, "
                f"det={self.log_det})")

    @staticmethod
    def from_trajectory(trajectory, wbar_target, w_i, reference=None):
        """
        Evaluates the logarithms on a trajectory, on the branch closest to
        the reference logs or on the principal branch without one
        """
        end = 1 + wbar_target @ trajectory.final.w
        start = 1 + trajectory.initial.wbar @ w_i
        if abs(end) == 0 or abs(start) == 0:
            raise SingularityError("boundary overlap vanishes on trajectory")

        sign, logabs = np.linalg.slogdet(trajectory.M22)
        if sign == 0:
            raise CausticError("det M22 vanishes", det_m22=0.0)
        log_det = logabs + cmath.log(sign)
        ratio = trajectory.final.denominator / trajectory.initial.denominator

        if reference is None:
            return PrefactorLogs(cmath.log(end), cmath.log(start),
                                 cmath.log(ratio), log_det)

        return PrefactorLogs(
            continue_log(end, reference.log_final),
            continue_log(start, reference.log_initial),
            continue_log(ratio, reference.log_ratio),
            unwrap_log(log_det, reference.log_det),
        )

    def log_bracket(self, n):
        """ Returns Log of (D(τ)/D(0))^{n/2} / det M22 """
        return 0.5 * n * self.log_ratio - self.log_det

    def jump(self, other, n):
        """ Returns the largest change of phase between two sets of logs """
        return max(
            abs(self.log_final.imag - other.log_final.imag),
            abs(self.log_initial.imag - other.log_initial.imag),
            0.5 * abs(self.log_bracket(n).imag - other.log_bracket(n).imag),
        )


class PropagatorResult():
    """ K_sc at one τ with its log decomposition and diagnostics """

    def __init__(self, tau, log_parts, logs, diagnostics, solution=None):
        self.tau = tau
        self.log_parts = log_parts
        self.logs = logs
        self.diagnostics = diagnostics
        self.solution = solution
        self.branch_index = winding_number(2 * log_parts.half_log_det)

    def __repr__(self):
        return (f"PropagatorResult(tau={self.tau}, "
                f"amplitude={self.amplitude})")

    @property
    def log_amplitude(self):
        """ Returns iS_c + iI + norm_term + half_log_det """
        parts = self.log_parts
        return parts.iS_c + parts.iI + parts.norm_term + parts.half_log_det

    @property
    def amplitude(self):
        """ Returns K_sc """
        return cmath.exp(self.log_amplitude)


def _warn_finite_n(N, n):
    if N < 10 * n:
        LOG.warning("N=%d < 10n=%d: the finite-N measure prefactor is "
                    "omitted and K_sc may be inaccurate", N, 10 * n)


def _ensure_logs(checkpoint, wbar_target, w_i, reference):
    if checkpoint.logs is None:
        if checkpoint.trajectory is None:
            msg = f"checkpoint at τ={checkpoint.tau} carries no trajectory"
            raise PreconditionError(msg)
        checkpoint.logs = PrefactorLogs.from_trajectory(
            checkpoint.trajectory, wbar_target, w_i, reference)
    return checkpoint.logs


def branch_acceptor(wbar_target, w_i, n, limit=BRANCH_JUMP_LIMIT):
    """
    Returns the continuation callback that rejects a rung whose logarithms
    change phase by limit or more, forcing a finer ladder
    """
    def accept(previous, checkpoint):
        reference = _ensure_logs(previous, wbar_target, w_i, None)
        try:
            logs = PrefactorLogs.from_trajectory(checkpoint.trajectory,
                                                 wbar_target, w_i, reference)
        except SunPropError:
            return False
        if logs.jump(reference, n) >= limit:
            LOG.debug("branch jump %.3f at τ=%.6g, refining",
                      logs.jump(reference, n), checkpoint.tau)
            return False
        checkpoint.logs = logs
        return True
    return accept


def assemble_propagator(sol, w_i, w_f, N, n, tolerance=None):
    """
    Builds K_sc = exp(iS_c + iI + norm_term + half_log_det) from a converged
    solution, continuing every logarithm along its checkpoint path. The
    solution must meet the boundary data to the Newton tolerance (default
    that of default_solver_options)
    """
    if tolerance is None:
        tolerance = default_solver_options().tolerance
    w_i = as_vector(w_i, n - 1)
    w_f = as_vector(w_f, n - 1)
    wbar_target = w_f.conj()
    traj = sol.trajectory

    residual = sup_norm(traj.final.wbar - wbar_target)
    mismatch = sup_norm(traj.initial.w - w_i)
    if max(residual, mismatch, sol.residual_norm) > tolerance:
        msg = (f"solution does not meet the boundary data to {tolerance:.1e} "
               f"(residual {residual:.3e}, initial mismatch "
               f"{mismatch:.3e})")
        raise PreconditionError(msg)

    if traj.caustic_flag:
        msg = (f"propagator singular at τ={traj.tau:.6g}: |det M22| = "
               f"{abs(traj.det_m22):.3e}, perturb τ")
        raise CausticError(msg, det_m22=traj.det_m22)

    logs = None
    for checkpoint in sol.continuation_path:
        logs = _ensure_logs(checkpoint, wbar_target, w_i, logs)
    if sol.continuation_path[-1].trajectory is not traj:
        logs = PrefactorLogs.from_trajectory(traj, wbar_target, w_i, logs)

    norm_term = -0.5 * N * (math.log1p(np.vdot(w_f, w_f).real)
                            + math.log1p(np.vdot(w_i, w_i).real))

    log_parts = SimpleNamespace(
        iS_c=traj.action_integral + 0.5 * N * (logs.log_final
                                              + logs.log_initial),
        iI=traj.correction_integral,
        norm_term=norm_term,
        half_log_det=0.5 * logs.log_bracket(n),
    )

    diagnostics = SimpleNamespace(
        det_m22_abs=abs(traj.det_m22),
        caustic_distance=traj.caustic_distance,
        residual_norm=sol.residual_norm,
        newton_iterations=sol.newton_iterations,
        energy_drift=traj.energy_drift,
        energy_accepted=traj.energy_accepted,
        liouville_defect=traj.liouville_defect(),
        sqrt_flips=traj.sqrt_flips,
        min_denominator=traj.min_denominator,
        singularity_flag=traj.singularity_flag,
    )

    return PropagatorResult(traj.tau, log_parts, logs, diagnostics, sol)


class PropagatorTracker():
    """
    Walks an ascending sequence of times as one continuation ladder, so the
    warm starts and the continued logarithms carry from one τ to the next
    """

    def __init__(self, model, N, w_i, w_f, opts=None):
        self.model = model
        self.N = N
        self.w_i = as_vector(w_i, model.n - 1)
        self.w_f = as_vector(w_f, model.n - 1)
        self.opts = default_solver_options() if opts is None else opts
        self.problem = ShootingProblem.from_boundary(model, N, self.w_i,
                                                     self.w_f, 0.0, self.opts)
        self.accept = branch_acceptor(self.problem.wbar_target, self.w_i,
                                      model.n)
        self._checkpoint = None
        _warn_finite_n(N, model.n)

    @property
    def checkpoint(self):
        """ Returns the last accepted checkpoint """
        if self._checkpoint is None:
            trajectory = self.problem.integrate(self.problem.wbar_target)
            self._checkpoint = Checkpoint(0.0, self.problem.wbar_target,
                                          trajectory)
        return self._checkpoint

    def propagate(self, tau):
        """ Returns the PropagatorResult at τ, not before the last τ """
        start = self.checkpoint
        if tau < start.tau:
            msg = f"times must be ascending: {tau} after {start.tau}"
            raise PreconditionError(msg)

        prob = self.problem.at(tau)
        sol = solve_with_continuation(prob, start=start, accept=self.accept)
        result = assemble_propagator(sol, self.w_i, self.w_f, self.N,
                                     self.model.n,
                                     tolerance=prob.opts.tolerance)
        self._checkpoint = sol.checkpoint
        return result

    def propagate_grid(self, taus):
        """
        Returns one entry per τ in the order given, walking them in ascending
        order. A failed τ gives its exception in place of a result and the
        walk resumes from the last good checkpoint
        """
        results = [None] * len(taus)
        for k in sorted(range(len(taus)), key=lambda k: taus[k]):
            try:
                results[k] = self.propagate(taus[k])
            except (CausticError, ContinuationError, ConvergenceError,
                    IntegrationError, SingularityError) as e:
                LOG.warning("semiclassical solve failed at τ=%.6g: %s",
                            taus[k], e)
                results[k] = e
        return results


def semiclassical_propagator(model, N, w_i, w_f, tau, opts=None):
    """ Returns the PropagatorResult for ⟨w_f|e^{-iHτ}|w_i⟩ """
    return PropagatorTracker(model, N, w_i, w_f, opts).propagate(tau)


def alternate_propagators(model, N, w_i, w_f, primary, opts=None):
    """
    Searches for other classical solutions at the time of the primary
    result. Returns the number of distinct roots, the primary included, and
    the PropagatorResult of each other root that assembles, its
    logarithms taken on their principal branches
    """
    opts = default_solver_options() if opts is None else opts
    prob = ShootingProblem.from_boundary(model, N, w_i, w_f, primary.tau,
                                         opts)
    solutions = solve_multistart(prob, primary=primary.solution)

    alternates = []
    for sol in solutions[1:]:
        try:
            alternates.append(assemble_propagator(
                sol, prob.w_i, w_f, N, model.n,
                tolerance=opts.tolerance))
        except CausticError as e:
            LOG.warning("alternate root at τ=%.6g not assembled: %s",
                        primary.tau, e)
    return len(solutions), alternates


class ComparisonRow():
    """
    One τ of an exact versus semiclassical comparison. An exact amplitude
    below the floor is rounding noise of the oracle, so such a row has no
    relative error
    """

    def __init__(self, tau, exact=None, result=None, failure=None,
                 floor=0.0):
        self.tau = tau
        self.exact = exact
        self.result = result
        self.failure = failure
        self.floor = floor
        self.roots = None
        self.alternates = []

    @property
    def semiclassical(self):
        """ Returns K_sc, or None when it was not computed """
        return None if self.result is None else self.result.amplitude

    @property
    def exact_underflow(self):
        return self.exact is not None and abs(self.exact) < self.floor

    @property
    def abs_err(self):
        """ Returns |K_sc - K_exact| when both exist """
        if self.exact is None or self.result is None:
            return None
        return abs(self.semiclassical - self.exact)

    @property
    def rel_err(self):
        """
        Returns |K_sc - K_exact| / |K_exact| when both exist and K_exact is
        above the floor
        """
        if self.exact is None or self.result is None or self.exact_underflow:
            return None
        return relative_error(self.semiclassical, self.exact)


def oracle_floor(dim):
    """ Returns the |K_exact| under which the Fock oracle is noise """
    return EXACT_FLOOR_FACTOR * np.finfo(float).eps * math.sqrt(dim)


def propagator_vs_exact(model, N, w_i, w_f, taus, opts=None, exact=True,
                        semiclassical=True, cap=DEFAULT_DIMENSION_CAP):
    """
    Tabulates K_exact and K_sc over a grid of times. Semiclassical failures
    become flagged rows rather than aborting the table. With multistart
    enabled in the options every row also carries the other classical
    roots at its τ
    """
    rows = [ComparisonRow(float(tau)) for tau in taus]

    if exact:
        propagator = FockPropagator(model, build_basis(model.n, N, cap))
        floor = oracle_floor(propagator.basis.dim)
        for row, amp in zip(rows, propagator.amplitudes(w_i, w_f, taus)):
            row.exact = complex(amp)
            row.floor = floor

    if semiclassical:
        tracker = PropagatorTracker(model, N, w_i, w_f, opts)
        for row, result in zip(rows, tracker.propagate_grid(list(taus))):
            if isinstance(result, Exception):
                row.failure = type(result).__name__
            else:
                row.result = result

        if tracker.opts.multistart.enabled:
            for row in rows:
                if row.result is not None:
                    row.roots, row.alternates = alternate_propagators(
                        model, N, w_i, w_f, row.result, tracker.opts)

    return rows


def _tight_options(opts, tolerance):
    opts = copy.deepcopy(opts)
    # the Newton residual cannot go below the integration error
    opts.tolerance = min(opts.tolerance, 10 * tolerance)
    opts.integrator.rtol = min(opts.integrator.rtol, tolerance)
    opts.integrator.atol = min(opts.integrator.atol, tolerance)
    return opts


def _boundary_action(prob, sol, reference):
    """ Returns iS_c with its logarithms continued from the reference """
    traj = sol.trajectory
    log_final = continue_log(1 + prob.wbar_target @ traj.final.w,
                             reference.log_final)
    log_initial = continue_log(1 + traj.initial.wbar @ prob.w_i,
                               reference.log_initial)
    return traj.action_integral + 0.5 * prob.N * (log_final + log_initial)


def action_hessian_check(prob, sol, step=1e-4, tolerance=CHECK_TOLERANCE):
    """
    Compares the determinant prefactor with the mixed second derivative of
    the action. Since ∂(iS_c)/∂w_i = N w̄(0)/(1 + w̄(0)·w_i) and
    ∂w̄(0)/∂w̄_f = M22⁻¹, the two sides agree when
        (1 + w̄(0)·w_i)ⁿ det M22 det[(1/N) ∂²(iS_c)/∂w_i∂w̄_f] = 1
    The mixed derivative comes from central differences of iS_c over four
    re-solved boundary pairs per entry. Returns the discrepancy from 1
    """
    if prob.tau <= 0:
        raise PreconditionError("the action-Hessian check needs τ > 0")

    traj = sol.trajectory
    if traj.caustic_flag:
        msg = f"caustic at τ={prob.tau:.6g}, the check needs a regular point"
        raise PreconditionError(msg)

    n = prob.model.n
    m = n - 1
    tight = ShootingProblem(prob.model, prob.N, prob.w_i, prob.wbar_target,
                            prob.tau, _tight_options(prob.opts, tolerance))
    try:
        base = solve_shooting(tight, sol.wbar0)
    except SunPropError as e:
        raise CheckInconclusiveError(f"base re-solve failed: {e}") from e

    reference = PrefactorLogs.from_trajectory(base.trajectory,
                                              tight.wbar_target, tight.w_i)

    def action(a, sa, b, sb):
        w_i = tight.w_i.copy()
        wbar_f = tight.wbar_target.copy()
        w_i[a] += sa * step
        wbar_f[b] += sb * step
        shifted = ShootingProblem(tight.model, tight.N, w_i, wbar_f, tight.tau,
                                  tight.opts)
        try:
            solved = solve_shooting(shifted, base.wbar0)
        except SunPropError as e:
            msg = f"re-solve at a perturbed boundary pair failed: {e}"
            raise CheckInconclusiveError(msg) from e
        return _boundary_action(shifted, solved, reference)

    hessian = np.empty((m, m), dtype=complex)
    for a in range(m):
        for b in range(m):
            hessian[a, b] = (action(a, 1, b, 1) - action(a, 1, b, -1)
                             - action(a, -1, b, 1) + action(a, -1, b, -1))
    hessian /= 4 * step ** 2

    D0 = 1 + base.trajectory.initial.wbar @ tight.w_i
    product = (D0 ** n * base.trajectory.det_m22
               * np.linalg.det(hessian / prob.N))
    discrepancy = abs(product - 1)
    LOG.debug("action-Hessian check at τ=%.6g step %.1e: %.3e", prob.tau,
              step, discrepancy)
    return discrepancy
