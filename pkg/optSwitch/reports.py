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
Machine- and human-readable output of a solved switching problem: a JSON
report, an aligned text summary and a CSV of value statistics per time step
for plotting.
"""
import csv as _csv
import json as _json
import logging as _logging
from pathlib import Path as _Path
from typing import Dict, Tuple, Union

import numpy as _np

from optSwitch.lattice import root_expectation
from optSwitch.switching import Strategy, SwitchingProblem, ValueFamily
from optSwitch.switching.solver import DEFAULT_TOL, fixed_point_residual
from optSwitch.switching.strategy import num_switches
from optSwitch.utils import mode_label
from optSwitch.version import __version__

_logger = _logging.getLogger(__name__)

PLOT_HEADER = ('time', 'mode', 'expected_value', 'min_value', 'max_value')


class _CustomEncoder(_json.JSONEncoder):
    """
    A JSON Encoder that also serializes numpy scalars and arrays
    """
    def default(self, obj):
        if isinstance(obj, _np.integer):
            return int(obj)
        elif isinstance(obj, _np.floating):
            return float(obj)
        elif isinstance(obj, _np.bool_):
            return bool(obj)
        elif isinstance(obj, _np.ndarray):
            return obj.tolist()
        else:
            return super(_CustomEncoder, self).default(obj)


def _switch_list(strategy: Strategy) -> Dict[str, list]:
    # effective switches per scenario, keyed by leaf id
    out = {}
    eff = strategy.effective
    tree = strategy.tree
    for pos, leaf in enumerate(strategy.leaves):
        out[str(int(leaf))] = [
            {'node': int(strategy.times[n, pos]),
             'time': int(tree.time[strategy.times[n, pos]]),
             'to_mode': mode_label(strategy.modes[n, pos])}
            for n in range(1, strategy.n_decisions + 1) if eff[n, pos]]
    return out


def solve_report(problem: SwitchingProblem, Y: ValueFamily,
                 strategies: Dict[Tuple[int, int], Strategy],
                 values: Dict[Tuple[int, int], float],
                 tol: float = DEFAULT_TOL) -> dict:
    """
    Collect the results of a solve into a JSON-ready dictionary

    Parameters
    ----------
    problem : :py:class:`~optSwitch.switching.SwitchingProblem`
        The problem
    Y : :py:class:`~optSwitch.switching.ValueFamily`
        The solved values
    strategies : dict
        The extracted strategy for each ``(start node, start mode)``
    values : dict
        The performance index of each of those strategies
    tol : float
        The tolerance the solve was run with

    Returns
    -------
    dict
        Modes are labelled from 1 throughout
    """
    tree = problem.tree
    report = {
        'version': __version__,
        'modes': problem.m,
        'nodes': tree.n_nodes,
        'horizon_steps': tree.horizon_steps,
        'dt': problem.dt,
        'tol': tol,
        'iterations': Y.iterations,
        'residual': fixed_point_residual(problem, Y),
        'values': {mode_label(i): Y.values[i] for i in range(problem.m)},
        'strategies': [],
    }
    for (node, mode), strategy in sorted(strategies.items()):
        counts = num_switches(strategy)
        report['strategies'].append({
            'start_node': int(node),
            'start_mode': mode_label(mode),
            'Y': Y.value(node, mode),
            'J': float(values[(node, mode)]),
            'max_switches': int(counts.max()) if len(counts) else 0,
            'num_switches': {str(int(leaf)): int(c) for leaf, c in
                             zip(strategy.leaves, counts)},
            'switches': _switch_list(strategy),
        })
    return report


def write_json(report: dict, path: Union[str, _Path]):
    """Write a report as indented UTF-8 JSON with LF line endings"""
    text = _json.dumps(report, indent=2, cls=_CustomEncoder) + '\n'
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        _logger.debug(f'Dumping report to {path}')
        f.write(text)


def format_summary(report: dict) -> str:
    """
    Render the headline numbers of a report as an aligned text table

    One row per start: the start node and mode, the solved value ``Y``,
    the value ``J`` of the extracted strategy, their difference and the
    largest number of switches on any path.
    """
    lines = [
        f'optSwitch {report["version"]} solve report',
        f'modes: {report["modes"]}  nodes: {report["nodes"]}  '
        f'horizon: {report["horizon_steps"]}  dt: {report["dt"]:.6g}',
        f'iterations: {report["iterations"]}  '
        f'residual: {report["residual"]:.3e}',
        '',
        f'{"node":>6} {"mode":>5} {"Y":>18} {"J":>18} {"J - Y":>10} '
        f'{"switches":>9}',
    ]
    for s in report['strategies']:
        lines.append(f'{s["start_node"]:>6} {s["start_mode"]:>5} '
                     f'{s["Y"]:>18.12f} {s["J"]:>18.12f} '
                     f'{s["J"] - s["Y"]:>10.2e} {s["max_switches"]:>9}')
    return '\n'.join(lines) + '\n'


def write_summary(report: dict, path: Union[str, _Path]):
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(format_summary(report))


def write_plot_csv(problem: SwitchingProblem, Y: ValueFamily,
                   path: Union[str, _Path]):
    """
    Write the expectation, minimum and maximum of each ``Y^i`` per time step
    as CSV, with a header row and modes labelled from 1
    """
    tree = problem.tree
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = _csv.writer(f, lineterminator='\n')
        writer.writerow(PLOT_HEADER)
        for t in range(tree.horizon_steps + 1):
            layer = tree.layers[t]
            for i in range(problem.m):
                vals = Y.values[i, layer]
                writer.writerow([t, mode_label(i),
                                 repr(root_expectation(Y[i], t)),
                                 repr(float(vals.min())),
                                 repr(float(vals.max()))])
    _logger.debug(f'Wrote plot data to {path}')
