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
Reading and writing switching problems as single JSON documents.

The document has the following fields (modes are labelled from ``1``):

``dt``
    Length of one time step
``modes``
    Number of modes ``m``
``nodes``
    Array of ``{"id", "time", "parent", "cond_prob"}`` records; ids must be
    ``0..n-1`` and ``parent`` is ``null`` for the root
``psi``
    Map from mode label to an array of running reward rates indexed by node
    id
``gamma``
    Map from ``"i,j"`` to an array of switching costs indexed by node id;
    diagonal entries may be omitted
``terminal``
    Map from mode label to a map from leaf id to terminal reward
"""
import json as _json
import logging as _logging
from pathlib import Path as _Path
from typing import Union

import numpy as _np

from optSwitch.lattice import Node, ScenarioTree, validate_tree
from optSwitch.switching import SwitchingProblem
from optSwitch.utils import ProblemError, ProblemFileError, mode_label

_logger = _logging.getLogger(__name__)

REQUIRED_FIELDS = ('dt', 'modes', 'nodes', 'psi', 'gamma', 'terminal')


def _node_array(values, n: int, field: str) -> _np.ndarray:
    if not isinstance(values, list) or len(values) != n:
        raise ProblemFileError(f'{field} must be an array of {n} numbers')
    try:
        arr = _np.array(values, dtype=float)
    except (TypeError, ValueError):
        raise ProblemFileError(f'{field} contains non-numeric entries')
    if arr.ndim != 1:
        raise ProblemFileError(f'{field} must be an array of {n} numbers')
    return arr


def _mode_index(label: str, m: int, field: str) -> int:
    try:
        i = int(label)
    except ValueError:
        raise ProblemFileError(f'{field}: {label!r} is not a mode label')
    if not 1 <= i <= m:
        raise ProblemFileError(f'{field}: mode {i} is outside 1..{m}')
    return i - 1


def parse_problem(doc: dict) -> SwitchingProblem:
    """
    Build a :py:class:`~optSwitch.switching.SwitchingProblem` from a decoded
    problem document

    Raises
    ------
    ~optSwitch.utils.ProblemFileError
        Naming the first field that is missing or malformed
    """
    if not isinstance(doc, dict):
        raise ProblemFileError('Problem document must be a JSON object')
    missing = [f for f in REQUIRED_FIELDS if f not in doc]
    if missing:
        raise ProblemFileError(f'Missing field(s): {", ".join(missing)}')

    try:
        dt = float(doc['dt'])
        m = int(doc['modes'])
    except (TypeError, ValueError):
        raise ProblemFileError('dt must be a number and modes an integer')
    if m < 2:
        raise ProblemFileError(f'modes must be at least 2, got {m}')

    if not isinstance(doc['nodes'], list):
        raise ProblemFileError('nodes must be an array')
    try:
        nodes = [Node.from_dict(d) for d in doc['nodes']]
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise ProblemFileError(f'Malformed node record: {e!r}')
    tree = ScenarioTree(nodes, dt=dt)
    violations = validate_tree(tree)
    if violations:
        raise ProblemFileError('Invalid scenario tree: ' +
                               '; '.join(str(v) for v in violations))
    n = tree.n_nodes

    psi = _np.zeros((m, n))
    if not isinstance(doc['psi'], dict):
        raise ProblemFileError('psi must be an object keyed by mode')
    for label, values in doc['psi'].items():
        psi[_mode_index(label, m, 'psi')] = _node_array(values, n,
                                                        f'psi[{label}]')
    absent = set(range(m)) - {_mode_index(k, m, 'psi') for k in doc['psi']}
    if absent:
        raise ProblemFileError(f'psi is missing mode(s) '
                               f'{sorted(mode_label(i) for i in absent)}')

    if not isinstance(doc['gamma'], dict):
        raise ProblemFileError('gamma must be an object keyed by "i,j"')
    gamma = {}
    for key, values in doc['gamma'].items():
        parts = str(key).split(',')
        if len(parts) != 2:
            raise ProblemFileError(f'gamma key {key!r} is not of the form '
                                   f'"i,j"')
        pair = tuple(_mode_index(p.strip(), m, 'gamma') for p in parts)
        gamma[pair] = _node_array(values, n, f'gamma[{key}]')

    leaves = tree.leaves
    terminal = _np.zeros((m, n))
    if not isinstance(doc['terminal'], dict):
        raise ProblemFileError('terminal must be an object keyed by mode')
    seen = set()
    for label, by_leaf in doc['terminal'].items():
        i = _mode_index(label, m, 'terminal')
        seen.add(i)
        if not isinstance(by_leaf, dict):
            raise ProblemFileError(f'terminal[{label}] must map leaf ids to '
                                   f'values')
        given = {}
        for leaf_key, value in by_leaf.items():
            try:
                leaf = int(leaf_key)
                given[leaf] = float(value)
            except (TypeError, ValueError):
                raise ProblemFileError(f'terminal[{label}][{leaf_key!r}] is '
                                       f'malformed')
            if not (0 <= leaf < n and tree.is_leaf[leaf]):
                raise ProblemFileError(f'terminal[{label}] names {leaf}, '
                                       f'which is not a leaf')
        lacking = [int(v) for v in leaves if int(v) not in given]
        if lacking:
            raise ProblemFileError(f'terminal[{label}] is missing leaves '
                                   f'{lacking[:10]}')
        terminal[i, leaves] = [given[int(v)] for v in leaves]
    if seen != set(range(m)):
        raise ProblemFileError('terminal must give values for every mode')

    try:
        return SwitchingProblem(tree, psi, gamma, terminal)
    except ProblemError as e:
        raise ProblemFileError(e.message) from e


def load_problem(path: Union[str, _Path]) -> SwitchingProblem:
    """
    Read a problem file

    Raises
    ------
    ~optSwitch.utils.ProblemFileError
        If the file cannot be read, is not valid JSON, or does not describe
        a valid problem
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            doc = _json.load(f)
    except OSError as e:
        raise ProblemFileError(f'Could not read {path}: {e.strerror}')
    except ValueError as e:
        raise ProblemFileError(f'{path} is not valid JSON: {e}')
    problem = parse_problem(doc)
    _logger.info(f'Loaded {problem!r} from {path}')
    return problem


def problem_to_dict(problem: SwitchingProblem) -> dict:
    """The problem document for ``problem``"""
    tree = problem.tree
    m = problem.m
    return {
        'dt': tree.dt,
        'modes': m,
        'nodes': [n.to_dict() for n in sorted(tree.nodes, key=lambda v: v.id)],
        'psi': {mode_label(i): problem.psi[i].tolist() for i in range(m)},
        'gamma': {f'{mode_label(i)},{mode_label(j)}':
                  problem.gamma[i, j].tolist()
                  for i in range(m) for j in range(m) if i != j},
        'terminal': {mode_label(i): {str(int(v)): float(problem.terminal[i, v])
                                     for v in tree.leaves}
                     for i in range(m)},
    }


def dump_problem(problem: SwitchingProblem, path: Union[str, _Path]):
    """Write ``problem`` as a UTF-8 JSON document with LF line endings"""
    text = _json.dumps(problem_to_dict(problem), indent=2) + '\n'
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    _logger.info(f'Wrote {problem!r} to {path}')
