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

""" JSON utils """

import json

from types import SimpleNamespace

import numpy as np


class SimpleNamespaceJsonEncoder(json.JSONEncoder):
    """
    JSON Encoder for SimpleNamespace objects, numpy scalars and arrays, and
    complex numbers as [re, im] pairs
    """

    def default(self, o):  # pylint: disable=method-hidden
        if isinstance(o, SimpleNamespace):
            return o.__dict__
        if isinstance(o, (complex, np.complexfloating)):
            return [float(o.real), float(o.imag)]
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.generic):
            return o.item()
        return super(SimpleNamespaceJsonEncoder, self).default(o)


def json_pretty_string(obj):
    """ Dumps an object as indented JSON with sorted keys """
    return json.dumps(obj, cls=SimpleNamespaceJsonEncoder, indent=4,
                      sort_keys=True, allow_nan=True)
