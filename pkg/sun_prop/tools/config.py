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

# pylint: disable=invalid-name,too-many-instance-attributes

"""
Scenario configuration. A scenario is a JSON document, complex numbers are
written as [re, im] pairs:

    {
        "model": {"n": 2, "h": [[0, 1, [-1, 0]]], "V": [[0, 0, 0, 0, 0.2]],
                  "two_body_scaling": "none"},
        "N": [10, 20, 40],
        "boundary": {"w_i": [[0.3, 0.1]], "w_f": [[0.2, -0.2]]},
        "tau": {"start": 0.125, "stop": 1.0, "count": 8},
        "solver": {"tolerance": 1e-10, "integrator": {"rtol": 1e-10}},
        "output": {"format": "csv", "path": "report.csv"},
        "seed": 0
    }

A model may be given as {"n": 2, "bose_hubbard": {"J": 1, "U": 0.1}} instead
of sparse entries
"""

import hashlib
import json

from logging import getLogger
from types import SimpleNamespace

import numpy as np

from .utils import complex_from_pair, namespace_types_as_dict
from ..core.bvp import default_solver_options
from ..core.fock import HamiltonianModel, bose_hubbard
from ..errors import ConfigError, SunPropError


LOG = getLogger(__name__)

OUTPUT_FORMATS = ("csv", "json")
TWO_BODY_SCALINGS = ("none", "per_particle")


class ScenarioConfig():
    """ A parsed and validated scenario """

    def __init__(self, model, particles, w_i, w_f, taus, solver, output,
                 seed=0, two_body_scaling="none", digest=None):
        self.model = model
        self.particles = particles
        self.w_i = w_i
        self.w_f = w_f
        self.taus = taus
        self.solver = solver
        self.output = output
        self.seed = seed
        self.two_body_scaling = two_body_scaling
        self.digest = digest

    def __repr__(self):
        return (f"ScenarioConfig(n={self.model.n}, N={self.particles}, "
                f"taus={len(self.taus)})")

    def model_for(self, N):
        """ Returns the model used at particle number N """
        if self.two_body_scaling == "per_particle":
            return self.model.scaled(two_body=1.0 / N)
        return self.model


def _require(obj, key, field):
    if not isinstance(obj, dict) or key not in obj:
        raise ConfigError(f"missing field '{field}'", field=field)
    return obj[key]


def _complex(value, field):
    try:
        return complex_from_pair(value)
    except ValueError as e:
        raise ConfigError(f"{field}: {e}", field=field) from e


def _integer(value, field, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{field} must be an integer", field=field)
    if minimum is not None and value < minimum:
        raise ConfigError(f"{field} must be >= {minimum}", field=field)
    return value


def _number(value, field):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{field} must be a number", field=field)
    return float(value)


def parse_model(raw):
    """ Builds the HamiltonianModel of the 'model' section """
    n = _integer(_require(raw, "n", "model.n"), "model.n", minimum=2)

    if "bose_hubbard" in raw:
        bh = raw["bose_hubbard"]
        field = "model.bose_hubbard"
        J = _number(_require(bh, "J", f"{field}.J"), f"{field}.J")
        U = _number(_require(bh, "U", f"{field}.U"), f"{field}.U")
        return bose_hubbard(n, J, U, bool(bh.get("periodic", False)))

    h_entries = []
    for k, entry in enumerate(raw.get("h", [])):
        field = f"model.h[{k}]"
        if not isinstance(entry, list) or len(entry) != 3:
            raise ConfigError(f"{field} must be [j, k, value]", field=field)
        j, l = (_integer(i, field, minimum=0) for i in entry[:2])
        h_entries.append((j, l, _complex(entry[2], field)))

    v_entries = []
    for k, entry in enumerate(raw.get("V", [])):
        field = f"model.V[{k}]"
        if not isinstance(entry, list) or len(entry) != 5:
            raise ConfigError(f"{field} must be [j, k, l, m, value]",
                              field=field)
        idx = tuple(_integer(i, field, minimum=0) for i in entry[:4])
        v_entries.append(idx + (_complex(entry[4], field),))

    try:
        return HamiltonianModel.from_sparse(n, h_entries, v_entries)
    except SunPropError as e:
        raise ConfigError(f"model: {e}", field="model") from e


def parse_vector(raw, field, length):
    """ Parses a list of [re, im] pairs into a complex vector """
    if not isinstance(raw, list) or len(raw) != length:
        msg = f"{field} must list {length} complex components"
        raise ConfigError(msg, field=field)
    return np.array([_complex(v, f"{field}[{k}]") for k, v in enumerate(raw)])


def parse_taus(raw):
    """ Parses a single τ, an explicit list or a start/stop/count grid """
    if isinstance(raw, dict):
        start = _number(_require(raw, "start", "tau.start"), "tau.start")
        stop = _number(_require(raw, "stop", "tau.stop"), "tau.stop")
        count = _integer(_require(raw, "count", "tau.count"), "tau.count",
                         minimum=1)
        taus = [start] if count == 1 else list(np.linspace(start, stop, count))
    elif isinstance(raw, list):
        taus = [_number(t, f"tau[{k}]") for k, t in enumerate(raw)]
    else:
        taus = [_number(raw, "tau")]

    if not taus or any(not np.isfinite(t) or t < 0 for t in taus):
        raise ConfigError("tau values must be finite and >= 0", field="tau")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ConfigError("tau grid must be strictly increasing", field="tau")
    return [float(t) for t in taus]


def _merge(target, raw, types, prefix):
    """
    Overrides the defaults in target with the values in raw, coercing each
    value to the type of its default
    """
    if not isinstance(raw, dict):
        raise ConfigError(f"{prefix} must be an object", field=prefix)

    for key, value in raw.items():
        field = f"{prefix}.{key}"
        if key not in types:
            raise ConfigError(f"unknown option '{field}'", field=field)

        expected = types[key]
        if isinstance(expected, dict):
            _merge(getattr(target, key), value, expected, field)
            continue

        is_bool = isinstance(value, bool)
        if expected is float and isinstance(value, int) and not is_bool:
            value = float(value)
        if is_bool != (expected is bool) or not isinstance(value, expected):
            msg = (f"{field} must be of type {expected.__name__}, "
                   f"got {type(value).__name__}")
            raise ConfigError(msg, field=field)
        setattr(target, key, value)


def parse_solver(raw):
    """ Returns the default solver options overridden by the section """
    opts = default_solver_options()
    if raw is None:
        return opts

    _merge(opts, raw, namespace_types_as_dict(opts), "solver")

    positive = (
        ("solver.tolerance", opts.tolerance),
        ("solver.integrator.rtol", opts.integrator.rtol),
        ("solver.integrator.atol", opts.integrator.atol),
        ("solver.continuation.start", opts.continuation.start),
        ("solver.continuation.min_step", opts.continuation.min_step),
    )
    for field, value in positive:
        if not value > 0:
            raise ConfigError(f"{field} must be > 0", field=field)
    if opts.continuation.factor <= 1:
        msg = "solver.continuation.factor must be > 1"
        raise ConfigError(msg, field="solver.continuation.factor")
    if opts.integrator.method not in ("DOP853", "RK45"):
        msg = "solver.integrator.method must be DOP853 or RK45"
        raise ConfigError(msg, field="solver.integrator.method")

    return opts


def parse_config(text, source="<string>"):
    """ Parses and validates a scenario from its JSON text """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        msg = f"{source}:{e.lineno}:{e.colno}: {e.msg}"
        raise ConfigError(msg, line=e.lineno) from e

    if not isinstance(raw, dict):
        raise ConfigError("a scenario must be a JSON object")

    model = parse_model(_require(raw, "model", "model"))
    m = model.n - 1

    scaling = raw["model"].get("two_body_scaling", "none")
    if scaling not in TWO_BODY_SCALINGS:
        msg = f"model.two_body_scaling must be one of {TWO_BODY_SCALINGS}"
        raise ConfigError(msg, field="model.two_body_scaling")

    particles = _require(raw, "N", "N")
    if not isinstance(particles, list):
        particles = [particles]
    if not particles:
        raise ConfigError("N must not be empty", field="N")
    particles = [_integer(N, f"N[{k}]", minimum=1)
                 for k, N in enumerate(particles)]

    boundary = _require(raw, "boundary", "boundary")
    w_i = parse_vector(_require(boundary, "w_i", "boundary.w_i"),
                       "boundary.w_i", m)
    w_f = parse_vector(_require(boundary, "w_f", "boundary.w_f"),
                       "boundary.w_f", m)

    output = SimpleNamespace(format="csv", path=None)
    output_raw = raw.get("output", {})
    output.format = output_raw.get("format", output.format)
    output.path = output_raw.get("path", output.path)
    if output.format not in OUTPUT_FORMATS:
        msg = f"output.format must be one of {OUTPUT_FORMATS}"
        raise ConfigError(msg, field="output.format")

    seed = _integer(raw.get("seed", 0), "seed", minimum=0)
    solver = parse_solver(raw.get("solver"))
    solver.multistart.seed = seed

    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    config = ScenarioConfig(model, particles, w_i, w_f,
                            parse_taus(_require(raw, "tau", "tau")), solver,
                            output, seed, scaling, digest)
    LOG.debug("parsed scenario %s from %s", config, source)
    return config


def load_config(path):
    """ Reads and parses a scenario file """
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config '{path}': {e}") from e
    return parse_config(text, source=str(path))
