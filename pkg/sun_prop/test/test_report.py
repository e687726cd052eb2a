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

import csv
import json
import os
import tempfile
import unittest

from types import SimpleNamespace

from .. import __version__
from ..core.semiclassics import ComparisonRow
from ..tools.report import FIELDS, RunReport, provenance, report_row


def _result(amplitude, energy_accepted=True, sqrt_flips=0):
    diagnostics = SimpleNamespace(residual_norm=1e-12, det_m22_abs=0.9,
                                  energy_drift=1e-11,
                                  energy_accepted=energy_accepted,
                                  sqrt_flips=sqrt_flips,
                                  singularity_flag=False)
    return SimpleNamespace(amplitude=amplitude, branch_index=0,
                           diagnostics=diagnostics)


class TestReportRow(unittest.TestCase):

    def test__row_complete(self):
        row = ComparisonRow(0.5, exact=0.6 + 0.2j, result=_result(0.6 + 0.1j))
        record = report_row(10, row)
        self.assertEqual(tuple(record), FIELDS)
        self.assertEqual(record["N"], 10)
        self.assertEqual(record["K_sc_im"], 0.1)
        self.assertAlmostEqual(record["abs_err"], 0.1)
        self.assertEqual(record["flags"], "ok")

    def test__row_exact_only(self):
        record = report_row(4, ComparisonRow(0.0, exact=1.0 + 0j))
        self.assertEqual(record["K_exact_re"], 1.0)
        self.assertIsNone(record["K_sc_re"])
        self.assertIsNone(record["rel_err"])
        self.assertEqual(record["flags"], "ok")

    def test__row_flags(self):
        failed = report_row(4, ComparisonRow(1.0, failure="CausticError"))
        self.assertEqual(failed["flags"], "CausticError")
        drift = report_row(4, ComparisonRow(
            1.0, result=_result(1j, energy_accepted=False, sqrt_flips=1)))
        self.assertEqual(drift["flags"], "energy_drift;sqrt_branch_flip")

    def test__row_exact_underflow(self):
        row = ComparisonRow(0.5, exact=1e-15 + 0j, result=_result(1e-19j),
                            floor=1e-8)
        self.assertTrue(row.exact_underflow)
        record = report_row(20, row)
        self.assertIsNone(record["rel_err"])
        self.assertAlmostEqual(record["abs_err"], 1e-15)
        self.assertEqual(record["flags"], "exact_underflow")

        above = ComparisonRow(0.5, exact=1e-7 + 0j, result=_result(1e-7j),
                              floor=1e-8)
        self.assertFalse(above.exact_underflow)
        self.assertEqual(report_row(20, above)["flags"], "ok")

    def test__row_alternates(self):
        row = ComparisonRow(0.5, exact=0.6 + 0j, result=_result(0.6 + 0j))
        self.assertIsNone(report_row(10, row)["roots"])

        row.roots = 2
        row.alternates = [_result(0.1 - 0.2j)]
        record = report_row(10, row)
        self.assertEqual(record["roots"], 2)
        self.assertEqual(record["K_sc_alt"], [[0.1, -0.2]])

        report = RunReport({}, [record])
        doc = json.loads(report.to_json())
        self.assertEqual(doc["rows"][0]["K_sc_alt"], [[0.1, -0.2]])
        line = report.to_csv().splitlines()[1]
        cell = next(csv.DictReader([",".join(FIELDS), line]))["K_sc_alt"]
        self.assertEqual([float(v) for v in cell.split()], [0.1, -0.2])


class TestRunReport(unittest.TestCase):

    def setUp(self):
        header = provenance("abc", 3)
        rows = [
            report_row(10, ComparisonRow(0.0, exact=1 + 0j,
                                         result=_result(1 + 0j))),
            report_row(10, ComparisonRow(0.5, exact=0.5 + 0j,
                                         result=_result(0.55 + 0j))),
            report_row(20, ComparisonRow(0.5, exact=0.5 + 0j,
                                         failure="ContinuationError")),
        ]
        self.report = RunReport(header, rows)

    def test__report_provenance(self):
        self.assertEqual(self.report.header, {"config_hash": "abc",
                                              "engine_version": __version__,
                                              "seed": 3})

    def test__report_failed(self):
        self.assertTrue(self.report.failed)
        self.assertFalse(RunReport({}, self.report.rows[:2]).failed)

    def test__report_median(self):
        self.assertAlmostEqual(self.report.median_rel_err(10), 0.05)
        self.assertIsNone(self.report.median_rel_err(20))

    def test__report_median_underflow(self):
        noise = ComparisonRow(1.0, exact=1e-15 + 0j, result=_result(1e-19j),
                              floor=1e-8)
        report = RunReport({}, self.report.rows + [report_row(10, noise)])
        self.assertAlmostEqual(report.median_rel_err(10), 0.05)
        self.assertFalse(RunReport({}, [report_row(
            10, ComparisonRow(1.0, exact=1e-15 + 0j, floor=1e-8))]).failed)

    def test__report_csv(self):
        lines = self.report.to_csv().splitlines()
        self.assertEqual(lines[:3], ["# config_hash=abc",
                                     f"# engine_version={__version__}",
                                     "# seed=3"])
        self.assertEqual(lines[3], ",".join(FIELDS))
        self.assertEqual(len(lines), 7)
        self.assertTrue(lines[4].startswith("10,0.0000000000000000e+00,"))
        self.assertTrue(lines[6].endswith(",ContinuationError"))
        self.assertIn(",,", lines[6])

    def test__report_json(self):
        doc = json.loads(self.report.dumps("json"))
        self.assertEqual(doc["provenance"]["seed"], 3)
        self.assertEqual(len(doc["rows"]), 3)
        self.assertIsNone(doc["rows"][2]["K_sc_re"])
        self.assertEqual(doc["rows"][1]["tau"], 0.5)

    def test__report_json_nonfinite(self):
        self.report.rows[0]["rel_err"] = float("inf")
        doc = json.loads(self.report.to_json())
        self.assertIsNone(doc["rows"][0]["rel_err"])

    def test__report_write(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "report.csv")
            self.report.write(path, "csv")
            with open(path, encoding="utf-8") as f:
                self.assertEqual(f.read(), self.report.to_csv())
