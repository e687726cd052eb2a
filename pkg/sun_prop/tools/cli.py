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

""" Argument handling """

import argparse
import itertools
import textwrap

from platform import python_build, python_implementation, python_version
from types import SimpleNamespace

from .config import OUTPUT_FORMATS
from .. import __version__
from ..checks import SUITES
from ..core.coherent import MIN_IDENTITY_SAMPLES


COMMANDS = ("check", "exact", "sc", "compare", "identity-mc", "sweep")


def parse_cli(args):
    """ Parse the program arguments """
    suites = ", ".join(SUITES)

    fmt = argparse.RawDescriptionHelpFormatter
    desc = "semiclassical propagator for SU(n) coherent states"
    epilog = textwrap.dedent(f"""
        list of check suites:
            {suites}

        exit status:
            0 success, 1 numerical failure on a row or check, 2 usage error
    """)

    py_impl = python_implementation()
    py_ver = python_version()
    py_build = " ".join(python_build())
    ver = f"%(prog)s {__version__} ({py_impl} {py_ver}, {py_build})"

    parser = argparse.ArgumentParser(description=desc, epilog=epilog,
                                     formatter_class=fmt)
    parser.add_argument("-v", "--version", action="version", version=ver)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--debug", action="store_true", default=False)
    common.add_argument("--out", action="store", default=None,
                        metavar="path", dest="output.path")
    common.add_argument("--format", choices=OUTPUT_FORMATS, default=None,
                        metavar="format", dest="output.format")
    common.add_argument("--seed", action="store", type=int, default=None,
                        metavar="int", dest="run.seed")
    common.add_argument("--jobs", action="store", type=int, default=1,
                        metavar="int", dest="run.jobs")

    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    check = commands.add_parser("check", parents=[common],
                                help="run the invariant suites")
    check.add_argument("--suite", nargs="+", action="append", default=[],
                       choices=SUITES, metavar="suite", dest="check.suite")

    scenario = argparse.ArgumentParser(add_help=False)
    scenario.add_argument("--config", action="store", required=True,
                          metavar="path", dest="config")
    scenario.add_argument("--multistart", action="store_true", default=False,
                          dest="run.multistart")

    commands.add_parser("exact", parents=[common, scenario],
                        help="exact propagator over the τ grid")
    commands.add_parser("sc", parents=[common, scenario],
                        help="semiclassical propagator over the τ grid")
    commands.add_parser("compare", parents=[common, scenario],
                        help="exact and semiclassical propagators")

    sweep = commands.add_parser("sweep", parents=[common, scenario],
                                help="compare over several particle numbers")
    sweep.add_argument("--particles", nargs="+", action="append", type=int,
                       default=[], metavar="N", dest="sweep.particles")

    mc = commands.add_parser("identity-mc", parents=[common],
                             help="Monte Carlo resolution of the identity")
    mc.add_argument("--modes", action="store", type=int, default=2,
                    metavar="n", dest="mc.n")
    mc.add_argument("--particles", action="store", type=int, default=1,
                    metavar="N", dest="mc.N")
    mc.add_argument("--samples", action="store", type=int,
                    default=MIN_IDENTITY_SAMPLES * 100, metavar="int",
                    dest="mc.samples")

    return process_args(parser.parse_args(args))


def flatten(_list):
    """ Converts a list of lists into a single list """
    return list(itertools.chain(*_list))


def unique(_list):
    """ Removes duplicate values in a list """
    return list(dict.fromkeys(_list))


def process_args(args):
    """
    Processes the destination of the namespace from the parsed arguments to be
    nested
    """
    options = SimpleNamespace()
    for dest, value in vars(args).items():
        *split, attr = dest.split(".")
        target = options
        for groupspace in split:
            if not hasattr(target, groupspace):
                setattr(target, groupspace, SimpleNamespace())
            target = getattr(target, groupspace)
        setattr(target, attr, value)

    if hasattr(options, "check"):
        options.check.suite = unique(flatten(options.check.suite))
    if hasattr(options, "sweep"):
        options.sweep.particles = unique(flatten(options.sweep.particles))

    return options
