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

""" Run reports: one row per (N, τ) with provenance, as CSV or JSON """

import csv
import io
import math

from logging import getLogger

import numpy as np

from .json import json_pretty_string
from .utils import pair_from_complex
from .. import __version__


LOG = getLogger(__name__)

FIELDS = (
    "N", "tau",
    "K_exact_re", "K_exact_im", "K_sc_re", "K_sc_im",
    "abs_err", "rel_err",
    "residual", "det_M22_abs", "branch_index", "energy_drift",
    "roots", "K_sc_alt",
    "flags",
)


def provenance(digest, seed):
    """ Returns the provenance header of a report """
    return {"config_hash": digest, "engine_version": __version__,
            "seed": seed}


def row_flags(row):
    """ Returns the ';' joined flags of a comparison row, or 'ok' """
    flags = []
    if row.failure is not None:
        flags.append(row.failure)
    if row.exact_underflow:
        flags.append("exact_underflow")
    if row.result is not None:
        diag = row.result.diagnostics
        if not diag.energy_accepted:
            flags.append("energy_drift")
        if diag.sqrt_flips:
            flags.append("sqrt_branch_flip")
        if diag.singularity_flag:
            flags.append("near_singularity")
    return ";".join(flags) if flags else "ok"


def report_row(N, row):
    """ Flattens a ComparisonRow into a report row """
    record = dict.fromkeys(FIELDS)
    record.update(N=N, tau=row.tau, flags=row_flags(row))

    if row.exact is not None:
        record.update(K_exact_re=row.exact.real, K_exact_im=row.exact.imag)

    if row.result is not None:
        amp = row.semiclassical
        diag = row.result.diagnostics
        record.update(
            K_sc_re=amp.real, K_sc_im=amp.imag,
            abs_err=row.abs_err, rel_err=row.rel_err,
            residual=diag.residual_norm, det_M22_abs=diag.det_m22_abs,
            branch_index=row.result.branch_index,
            energy_drift=diag.energy_drift,
        )

    if row.roots is not None:
        record.update(roots=row.roots, K_sc_alt=[
            pair_from_complex(alt.amplitude) for alt in row.alternates])

    return record


class RunReport():
    """ An ordered table of report rows with its provenance """

    def __init__(self, header, rows=None):
        self.header = header
        self.rows = [] if rows is None else list(rows)

    def __len__(self):
        return len(self.rows)

    @property
    def failed(self):
        """ True when any row carries a numerical failure """
        return any(r["K_sc_re"] is None
                   and r["flags"] not in ("ok", "exact_underflow")
                   for r in self.rows)

    def median_rel_err(self, N=None):
        """ Returns the median relative error over the rows at N """
        errs = [r["rel_err"] for r in self.rows
                if r["rel_err"] is not None and N in (None, r["N"])]
        return float(np.median(errs)) if errs else None

    def to_csv(self):
        """ Returns the report as CSV, provenance in leading comment lines """
        out = io.StringIO()
        for key in sorted(self.header):
            out.write(f"# {key}={self.header[key]}\n")

        writer = csv.DictWriter(out, fieldnames=FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _csv_value(v) for k, v in row.items()})
        return out.getvalue()

    def to_json(self):
        """ Returns the report as JSON, missing values as null """
        rows = [{k: _json_value(v) for k, v in row.items()}
                for row in self.rows]
        return json_pretty_string({"provenance": self.header, "rows": rows})

    def dumps(self, fmt):
        """ Returns the report in the given format """
        if fmt == "json":
            return self.to_json()
        return self.to_csv()

    def write(self, path, fmt):
        """ Writes the report to path """
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.dumps(fmt))
        LOG.info("wrote %d rows to %s", len(self), path)


def _csv_value(value):
    if value is None:
        return ""
    if isinstance(value, list):
        return ";".join(" ".join(_csv_value(v) for v in pair)
                        for pair in value)
    if isinstance(value, float):
        return f"{value:.16e}"
    return value


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value
