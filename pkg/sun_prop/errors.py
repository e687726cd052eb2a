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

# pylint: disable=too-few-public-methods

""" Exceptions raised by sun_prop """


class SunPropError(RuntimeError):
    """ Base class for every error raised by this package """


class ModelError(SunPropError):
    """ A Hamiltonian model violates one of its invariants """


class DimensionError(SunPropError):
    """ Mode counts or vector lengths disagree """


class CapacityError(SunPropError):
    """ A Fock space is larger than the configured dimension cap """

    def __init__(self, msg, dimension=None):
        super(CapacityError, self).__init__(msg)
        self.dimension = dimension


class SingularityError(SunPropError):
    """ 1 + w̄·w is too close to zero to evaluate phase space quantities """


class NumericalError(SunPropError):
    """ A dense linear algebra routine failed """


class IntegrationError(SunPropError):
    """ The trajectory integrator gave up before reaching the final time """

    def __init__(self, msg, time=None, wbar0=None):
        super(IntegrationError, self).__init__(msg)
        self.time = time
        self.wbar0 = wbar0


class ConvergenceError(SunPropError):
    """ Newton shooting did not reach the residual tolerance """

    def __init__(self, msg, residual=None, wbar0=None):
        super(ConvergenceError, self).__init__(msg)
        self.residual = residual
        self.wbar0 = wbar0


class CausticError(SunPropError):
    """ det M22 vanishes, the shooting Jacobian and prefactor are singular """

    def __init__(self, msg, det_m22=None):
        super(CausticError, self).__init__(msg)
        self.det_m22 = det_m22


class ContinuationError(SunPropError):
    """ The τ-continuation ladder stalled """

    def __init__(self, msg, tau=None):
        super(ContinuationError, self).__init__(msg)
        self.tau = tau


class PreconditionError(SunPropError):
    """ An operation was called with inputs outside its domain """


class CheckInconclusiveError(SunPropError):
    """ A finite difference cross-check could not be completed """


class ConfigError(SunPropError):
    """ A scenario configuration could not be parsed """

    def __init__(self, msg, field=None, line=None):
        super(ConfigError, self).__init__(msg)
        self.field = field
        self.line = line
