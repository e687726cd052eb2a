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

""" Utility module to provide common functions """

import cmath

from logging import getLogger
from types import SimpleNamespace

import numpy as np


LOG = getLogger(__name__)


def relative_error(value, reference):
    """ Returns |value - reference| / |reference|, or None for a zero ref """
    scale = abs(reference)
    return abs(value - reference) / scale if scale else None


def sup_norm(vec):
    """ Returns the max-abs norm of an array """
    vec = np.asarray(vec)
    return float(np.max(np.abs(vec))) if vec.size else 0.0


def as_vector(values, length=None):
    """ Converts a sequence of numbers into a complex 1-d array """
    vec = np.atleast_1d(np.asarray(values, dtype=complex))
    if vec.ndim != 1:
        raise ValueError(f"expected a vector, got shape {vec.shape}")
    if length is not None and vec.size != length:
        raise ValueError(f"expected {length} components, got {vec.size}")
    return vec


def complex_from_pair(pair):
    """ Converts a [re, im] pair (or a bare real) into a complex number """
    if isinstance(pair, (int, float)) and not isinstance(pair, bool):
        return complex(pair)

    if (
        not isinstance(pair, (list, tuple))
        or len(pair) != 2
        or not all(isinstance(i, (int, float)) for i in pair)
    ):
        raise ValueError(f"expected a [re, im] pair, got {pair!r}")

    return complex(pair[0], pair[1])


def pair_from_complex(value):
    """ Converts a complex number into a [re, im] list """
    value = complex(value)
    return [value.real, value.imag]


def unwrap_log(log, reference):
    """ Shifts log by whole turns onto the branch closest to reference """
    if reference is None:
        return log
    turns = round((reference.imag - log.imag) / (2 * cmath.pi))
    return log + 2j * cmath.pi * turns


def continue_log(value, reference):
    """
    Returns the logarithm of value on the branch closest to reference, the
    logarithm of a neighbouring point along a continuous path
    """
    return unwrap_log(cmath.log(value), reference)


def winding_number(log):
    """ Returns the whole turns between log and its principal value """
    principal = (log.imag + cmath.pi) % (2 * cmath.pi) - cmath.pi
    return round((log.imag - principal) / (2 * cmath.pi))


def continue_sqrt(value, previous):
    """ Returns the square root of value with the sign closest to previous """
    root = cmath.sqrt(value)
    if previous is not None and abs(root + previous) < abs(root - previous):
        root = -root
    return root


def namespace_types_as_dict(o):
    """
    Returns a dictionary in the same structure as the given namespace except
    with types as values
    """
    if isinstance(o, SimpleNamespace):
        return {k: namespace_types_as_dict(v) for k, v in o.__dict__.items()}
    return type(o)

