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

""" Module main """

import logging
import multiprocessing as mp
import sys

from abc import ABC, abstractmethod

from sun_prop.checks import run_suites
from sun_prop.core.coherent import identity_deviation, identity_resolution_mc
from sun_prop.core.semiclassics import propagator_vs_exact
from sun_prop.errors import CapacityError, ConfigError, SunPropError
from sun_prop.tools.cli import parse_cli
from sun_prop.tools.config import load_config
from sun_prop.tools.json import json_pretty_string
from sun_prop.tools.report import RunReport, provenance, report_row


LOG = logging.getLogger(__name__)

IDENTITY_SIGMAS = 3.0


class SunPropApp(ABC):
    """ Abstract sun-prop application """

    def __init__(self, args, options):
        self.args = args
        self.options = options

        if self.options.debug:
            level = logging.DEBUG
        else:
            level = logging.INFO

        logging.basicConfig(level=level)
        LOG.debug("command line arguments: %s", self.args)
        LOG.debug("application options: %s", self.options)

    @abstractmethod
    def run(self):
        """ Main application action to be implemented by subclasses """

    def emit(self, text, path=None):
        """ Writes text to path, or prints it """
        if path is None:
            print(text, end="" if text.endswith("\n") else "\n")
            return
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)

    @staticmethod
    def create_instance(args):
        """
        Creates a sun-prop application depending on the command line arguments
        """
        options = parse_cli(args)
        apps = {
            "check": SunPropCheck,
            "exact": SunPropExact,
            "sc": SunPropSemiclassical,
            "compare": SunPropCompare,
            "sweep": SunPropSweep,
            "identity-mc": SunPropIdentityMc,
        }

        try:
            return apps[options.command](args, options)
        except (ConfigError, CapacityError) as e:
            return SunPropFailure(args, options, err_msg=str(e), err_code=2)


class SunPropCheck(SunPropApp):
    """ Runs the invariant suites, exit 0 iff every invariant passes """

    def run(self):
        seed = self.options.run.seed or 0
        results = run_suites(self.options.check.suite, seed=seed)

        if self.options.output.format == "json":
            summary = [{"suite": r.suite, "invariant": r.invariant,
                        "deviation": r.deviation, "tolerance": r.tolerance,
                        "passed": r.passed} for r in results]
            text = json_pretty_string(summary)
        else:
            lines = [f"{r.suite}.{r.invariant}: {r.deviation:.3e} "
                     f"({'>' if r.above else '<='} {r.tolerance:.1e}) "
                     f"{'PASS' if r.passed else 'FAIL'}" for r in results]
            text = "\n".join(lines)

        self.emit(text, self.options.output.path)
        return 0 if all(r.passed for r in results) else 1


def run_group(task):
    """ Runs one particle number of a scenario, a worker pool entry point """
    config, N, exact, semiclassical = task
    rows = propagator_vs_exact(config.model_for(N), N, config.w_i, config.w_f,
                               config.taus, config.solver, exact=exact,
                               semiclassical=semiclassical)
    return [report_row(N, row) for row in rows]


class SunPropScenario(SunPropApp):
    """ Runs a scenario file over its τ grid and particle numbers """

    exact = True
    semiclassical = True

    def __init__(self, args, options):
        super(SunPropScenario, self).__init__(args, options)
        self.config = load_config(options.config)
        if options.run.seed is not None:
            self.config.seed = options.run.seed
            self.config.solver.multistart.seed = options.run.seed
        if options.run.multistart:
            self.config.solver.multistart.enabled = True
        self.format = options.output.format or self.config.output.format
        self.path = options.output.path or self.config.output.path

    @property
    def particles(self):
        """ Returns the particle numbers to run """
        return self.config.particles

    def gather(self):
        """ Returns the report rows, in order, of every particle number """
        tasks = [(self.config, N, self.exact, self.semiclassical)
                 for N in self.particles]
        jobs = max(1, min(self.options.run.jobs, len(tasks)))

        if jobs > 1:
            with mp.Pool(processes=jobs) as pool:
                groups = pool.map(run_group, tasks)
        else:
            groups = [run_group(task) for task in tasks]

        return {N: rows for N, rows in zip(self.particles, groups)}

    def publish(self, report, path):
        """ Writes the report to path, or prints it """
        if path is None:
            self.emit(report.dumps(self.format))
        else:
            report.write(path, self.format)

    def run(self):
        header = provenance(self.config.digest, self.config.seed)
        try:
            groups = self.gather()
        except CapacityError as e:
            LOG.error("%s", e)
            return 2
        except SunPropError as e:
            LOG.error("%s", e)
            return 1

        report = RunReport(header, [row for N in self.particles
                                    for row in groups[N]])
        self.publish(report, self.path)
        return 1 if report.failed else 0


class SunPropExact(SunPropScenario):
    """ Exact propagators only """

    semiclassical = False


class SunPropSemiclassical(SunPropScenario):
    """ Semiclassical propagators only, with diagnostics """

    exact = False


class SunPropCompare(SunPropScenario):
    """ Exact and semiclassical propagators with their errors """


class SunPropSweep(SunPropScenario):
    """
    Comparison over several particle numbers, one report per N. With an
    output path each report goes to the path with an _N<N> suffix
    """

    @property
    def particles(self):
        return self.options.sweep.particles or self.config.particles

    def run(self):
        header = provenance(self.config.digest, self.config.seed)
        try:
            groups = self.gather()
        except CapacityError as e:
            LOG.error("%s", e)
            return 2
        except SunPropError as e:
            LOG.error("%s", e)
            return 1

        failed = False
        for N in self.particles:
            report = RunReport(header, groups[N])
            LOG.info("N=%d median relative error %s", N,
                     report.median_rel_err(N))
            failed = failed or report.failed

            path = None
            if self.path is not None:
                stem, dot, ext = self.path.rpartition(".")
                path = (f"{stem}_N{N}.{ext}" if dot
                        else f"{self.path}_N{N}")
            self.publish(report, path)

        return 1 if failed else 0


class SunPropIdentityMc(SunPropApp):
    """ Monte Carlo resolution of the identity, exit 0 iff within 3σ """

    def run(self):
        mc = self.options.mc
        seed = self.options.run.seed or 0
        try:
            estimate, stderr = identity_resolution_mc(mc.n, mc.N, mc.samples,
                                                      seed)
        except SunPropError as e:
            LOG.error("%s", e)
            return 2

        sigmas = identity_deviation(estimate, stderr)
        passed = sigmas <= IDENTITY_SIGMAS
        summary = {"n": mc.n, "N": mc.N, "samples": mc.samples, "seed": seed,
                   "dimension": estimate.shape[0], "max_sigmas": sigmas,
                   "passed": passed}
        self.emit(json_pretty_string(summary), self.options.output.path)
        return 0 if passed else 1


class SunPropFailure(SunPropApp):
    """
    A subclass of the sun-prop application to return an error code and
    optionally print an error message
    """

    def __init__(self, args, options, err_msg="", err_code=0):
        super(SunPropFailure, self).__init__(args, options)
        self.err_msg = err_msg
        self.err_code = err_code

    def run(self):
        if self.err_msg:
            LOG.error(self.err_msg)
        return self.err_code


def main():
    """ Main method """
    return SunPropApp.create_instance(sys.argv[1:]).run()


if __name__ == "__main__":
    sys.exit(main())
