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

# pylint: disable=invalid-name

"""
Numerical differentiation used to cross-check analytic derivatives.

The maps checked here are holomorphic in each complex coordinate, so the
"complex step" is the contour form of Cauchy's formula
    f'(z) ≈ (1/Kr) Σₖ f(z + r e^{iθₖ}) e^{-iθₖ},  θₖ = 2πk/K
whose error is O(r^K) and free of subtractive cancellation
"""

import numpy as np


DEFAULT_STEP = 1e-6
DEFAULT_RADIUS = 1e-3
DEFAULT_POINTS = 16


def central_difference(f, x, step=DEFAULT_STEP):
    """
    Returns the Jacobian of f at x by central differences along each
    coordinate, one column per coordinate
    """
    x = np.asarray(x, dtype=complex)
    columns = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = step
        columns.append((np.asarray(f(x + e)) - np.asarray(f(x - e)))
                       / (2 * step))
    return np.stack(columns, axis=-1)


def complex_step_derivative(f, z, radius=DEFAULT_RADIUS,
                            points=DEFAULT_POINTS):
    """ Returns f'(z) of a holomorphic scalar map by the contour rule """
    theta = 2 * np.pi * np.arange(points) / points
    shifts = radius * np.exp(1j * theta)
    values = [np.asarray(f(z + s)) for s in shifts]
    return sum(v / s for v, s in zip(values, shifts)) / points


def complex_step_jacobian(f, x, radius=DEFAULT_RADIUS, points=DEFAULT_POINTS):
    """
    Returns the Jacobian of a map holomorphic in each coordinate of x, one
    column per coordinate. A scalar f gives the gradient
    """
    x = np.asarray(x, dtype=complex)
    columns = []
    for k in range(x.size):
        def partial(zk, k=k):
            y = x.copy()
            y[k] = zk
            return f(y)
        columns.append(complex_step_derivative(partial, x[k], radius, points))
    return np.stack(columns, axis=-1)
