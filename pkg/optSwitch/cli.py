#  NIST Public License - 2023
#
#  This software was developed by employees of the National Institute of
#  Standards and Technology (NIST), an agency of the Federal Government
#  and is being made available as a public service. Pursuant to title 17
#  United States Code Section 105, works of NIST employees are not subject
#  to copyright protection in the United States.  This software may be
#  subject to foreign copyright.  Permission in the United States and in
#  foreign countries, to the extent that NIST may hold copyright, to use,
#  copy, modify, create derivative works, and distribute this software and
#  its documentation without fee is hereby granted on a non-exclusive basis,
#  provided that this notice and disclaimer of warranty appears in all copies.
#
#  THE SOFTWARE IS PROVIDED 'AS IS' WITHOUT ANY WARRANTY OF ANY KIND,
#  EITHER EXPRESSED, IMPLIED, OR STATUTORY, INCLUDING, BUT NOT LIMITED
#  TO, ANY WARRANTY THAT THE SOFTWARE WILL CONFORM TO SPECIFICATIONS, ANY
#  IMPLIED WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE,
#  AND FREEDOM FROM INFRINGEMENT, AND ANY WARRANTY THAT THE DOCUMENTATION
#  WILL CONFORM TO THE SOFTWARE, OR ANY WARRANTY THAT THE SOFTWARE WILL BE
#  ERROR FREE.  IN NO EVENT SHALL NIST BE LIABLE FOR ANY DAMAGES, INCLUDING,
#  BUT NOT LIMITED TO, DIRECT, INDIRECT, SPECIAL OR CONSEQUENTIAL DAMAGES,
#  ARISING OUT OF, RESULTING FROM, OR IN ANY WAY CONNECTED WITH THIS SOFTWARE,
#  WHETHER OR NOT BASED UPON WARRANTY, CONTRACT, TORT, OR OTHERWISE, WHETHER
#  OR NOT INJURY WAS SUSTAINED BY PERSONS OR PROPERTY OR OTHERWISE, AND
#  WHETHER OR NOT LOSS WAS SUSTAINED FROM, OR AROSE OUT OF THE RESULTS OF,
#  OR USE OF, THE SOFTWARE OR SERVICES PROVIDED HEREUNDER.
#
"""
Command-line front end.

Four sub-commands are available::

    optSwitch solve --input problem.json [--tol 1e-12] [--output results/]
    optSwitch validate --input problem.json
    optSwitch oracle --input problem.json [--max-switches K] [--progress]
    optSwitch gen --seed 1 --depth 3 --branching 2 --modes 2 \\
        [--costs signed] --output problem.json

The exit codes are fixed:

====  ==========================================================
0     success
1     a check reported violations (validate) or a gap (oracle)
2     the problem file could not be read or parsed
3     the switching costs fail the no-arbitrage conditions
4     the solver did not converge
5     the enumeration guard was exceeded
====  ==========================================================
"""
import argparse as _ap
import logging as _logging
import sys as _sys
from pathlib import Path as _Path
from typing import List, Optional, Sequence

from optSwitch import generator as _generator
from optSwitch import reports as _reports
from optSwitch.oracle import count_strategies, oracle_value
from optSwitch.problem_file import dump_problem, load_problem
from optSwitch.switching import SwitchingProblem
from optSwitch.switching.solver import DEFAULT_TOL, solve, solve_n_switches
from optSwitch.switching.strategy import evaluate, extract_strategy
from optSwitch.utils import (ConvergenceError, EnumerationGuardError,
                             ProblemFileError, Violation, get_policy_limit,
                             mode_label, setup_loggers)
from optSwitch.validate import (check_assumption_costs, check_hypothesis_m,
                                construct_martingale_family)
from optSwitch.version import __version__ as _version

_logger = _logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_PARSE = 2
EXIT_ASSUMPTION = 3
EXIT_CONVERGENCE = 4
EXIT_GUARD = 5

GAP_TOL = 1e-9

LOGGING_LEVELS = {0: _logging.WARNING,
                  1: _logging.INFO,
                  2: _logging.DEBUG}


def _err(msg: str):
    print(msg, file=_sys.stderr)


def _print_violations(title: str, violations: List[Violation]):
    print(f'{title}: {len(violations)} violation(s)'
          if violations else f'{title}: OK')
    for v in violations:
        print(f'  {v}')


def cmd_solve(args) -> int:
    problem = load_problem(args.input)
    violations = check_assumption_costs(problem)
    if violations:
        _print_violations('No-arbitrage conditions', violations)
        _err('The switching costs fail the no-arbitrage conditions; not '
             'solving')
        return EXIT_ASSUMPTION
    try:
        Y = solve(problem, tol=args.tol)
    except ConvergenceError as e:
        _err(e.message)
        return EXIT_CONVERGENCE

    root = problem.tree.root
    strategies, values = {}, {}
    for mode in range(problem.m):
        strategy = extract_strategy(problem, Y, root, mode)
        strategies[(root, mode)] = strategy
        values[(root, mode)] = evaluate(problem, strategy)
    report = _reports.solve_report(problem, Y, strategies, values, args.tol)

    if args.output is not None:
        out = _Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        _reports.write_json(report, out / 'report.json')
        _reports.write_summary(report, out / 'summary.txt')
        _reports.write_plot_csv(problem, Y, out / 'values.csv')
        _logger.info(f'Wrote report.json, summary.txt and values.csv to '
                     f'{out}')
    print(_reports.format_summary(report), end='')
    return EXIT_OK


def cmd_validate(args) -> int:
    problem = load_problem(args.input)
    violations = check_assumption_costs(problem)
    _print_violations('No-arbitrage conditions', violations)

    family = construct_martingale_family(problem)
    if not family:
        print(f'Hypothesis (M): Unavailable ({family.reason})')
    else:
        print(f'Hypothesis (M): case "{family.case}"')
        family_violations = check_hypothesis_m(family, problem)
        _print_violations('Martingale family', family_violations)
        violations = violations + family_violations
    return EXIT_VIOLATIONS if violations else EXIT_OK


def _reference_values(problem: SwitchingProblem, max_switches: int):
    full = problem.horizon_steps * (problem.m - 1)
    if max_switches >= full:
        return solve(problem), 'solve'
    return solve_n_switches(problem, max_switches), \
        f'solve_n_switches({max_switches})'


def cmd_oracle(args) -> int:
    problem = load_problem(args.input)
    count = count_strategies(problem)
    limit = get_policy_limit()
    if count > limit:
        _err(f'{count} strategies per start mode exceed the enumeration '
             f'limit of {limit}')
        return EXIT_GUARD

    max_switches = args.max_switches
    if max_switches is None:
        max_switches = problem.horizon_steps * (problem.m - 1)
    if max_switches < 0:
        _err(f'--max-switches must be non-negative, got {max_switches}')
        return EXIT_PARSE
    try:
        Y, label = _reference_values(problem, max_switches)
    except ConvergenceError as e:
        _err(e.message)
        return EXIT_CONVERGENCE

    root = problem.tree.root
    print(f'Oracle with at most {max_switches} switch(es) per path against '
          f'{label}')
    print(f'{"node":>6} {"mode":>5} {"oracle":>18} {"solver":>18} '
          f'{"gap":>10}')
    worst = 0.0
    for mode in range(problem.m):
        try:
            best = oracle_value(problem, root, mode, max_switches,
                                progress=args.progress)
        except EnumerationGuardError as e:
            _err(e.message)
            return EXIT_GUARD
        solved = Y.value(root, mode)
        gap = abs(best - solved)
        worst = max(worst, gap)
        print(f'{root:>6} {mode_label(mode):>5} {best:>18.12f} '
              f'{solved:>18.12f} {gap:>10.2e}')
    print(f'max gap: {worst:.3e}')
    return EXIT_OK if worst <= GAP_TOL else EXIT_VIOLATIONS


def cmd_gen(args) -> int:
    size = _generator.tree_size(args.depth, args.branching)
    if size > _generator.MAX_NODES:
        _err(f'A tree of depth {args.depth} and branching {args.branching} '
             f'has {size} nodes, more than {_generator.MAX_NODES}')
        return EXIT_PARSE
    try:
        problem = _generator.generate_problem(args.seed, args.depth,
                                              args.branching, args.modes,
                                              costs=args.costs)
    except ValueError as e:
        _err(str(e))
        return EXIT_PARSE
    dump_problem(problem, args.output)
    return EXIT_OK


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise _ap.ArgumentTypeError(f'expected a non-negative integer, got '
                                    f'{text}')
    return value


def build_parser() -> _ap.ArgumentParser:
    """The argument parser of the ``optSwitch`` command"""
    # Optional verbosity counter (eg. -v, -vv), shared by every sub-command
    verbosity = _ap.ArgumentParser(add_help=False)
    verbosity.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Verbosity (-v, -vv); corresponds to python logging level. "
             "0 is WARN, 1 (-v) is INFO, 2 (-vv) is DEBUG. ERROR and "
             "CRITICAL are always shown.")

    parser = _ap.ArgumentParser(
        prog='optSwitch',
        description='Exact optimal multiple switching on finite scenario '
                    'trees')
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s (version {_version})")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('solve', parents=[verbosity],
                       help='solve a problem file and report the values '
                            'and optimal strategies')
    p.add_argument('--input', required=True, help='problem file')
    p.add_argument('--tol', type=float, default=DEFAULT_TOL,
                   help='fixed-point tolerance (default: %(default)g)')
    p.add_argument('--output', default=None,
                   help='directory for report.json, summary.txt and '
                        'values.csv')
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser('validate', parents=[verbosity],
                       help='check the no-arbitrage conditions and the '
                            'martingale hypothesis')
    p.add_argument('--input', required=True, help='problem file')
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser('oracle', parents=[verbosity],
                       help='compare the solver with brute-force '
                            'enumeration')
    p.add_argument('--input', required=True, help='problem file')
    p.add_argument('--max-switches', type=int, default=None,
                   dest='max_switches',
                   help='per-path switch limit (default: N * (m - 1))')
    p.add_argument('--progress', action='store_true', default=False,
                   help='show a progress bar')
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser('gen', parents=[verbosity],
                       help='generate a random problem file')
    p.add_argument('--seed', type=int, required=True)
    p.add_argument('--depth', type=_non_negative_int, required=True)
    p.add_argument('--branching', type=_non_negative_int, required=True)
    p.add_argument('--modes', type=int, required=True)
    p.add_argument('--costs', choices=_generator.COST_KINDS,
                   default='signed')
    p.add_argument('--output', required=True, help='problem file to write')
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line

    Parameters
    ----------
    argv : list of str or None
        The arguments (``sys.argv[1:]`` if ``None``)

    Returns
    -------
    int
        The exit code
    """
    args = build_parser().parse_args(argv)
    setup_loggers(LOGGING_LEVELS[min(args.verbose, 2)])
    try:
        return args.func(args)
    except ProblemFileError as e:
        _err(e.message)
        return EXIT_PARSE


if __name__ == '__main__':  # pragma: no cover
    _sys.exit(main())
