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
Optimal strategy extraction, strategy evaluation and the quantities derived
from a strategy (mode indicator, switch counts, cumulative costs).

Switches decided at a leaf have no effect: they cost nothing and do not
change the terminal mode.
"""
import logging as _logging
from typing import Optional

import numpy as _np

from optSwitch.lattice import conditional_leaf_weights
from optSwitch.snell import STOP_TOL
from optSwitch.switching import (ModeIndicator, Strategy, SwitchingProblem,
                                 ValueFamily)
from optSwitch.switching.solver import _obstacles
from optSwitch.utils import InadmissibleStrategyError

_logger = _logging.getLogger(__name__)


def _best_targets(problem: SwitchingProblem, Y: _np.ndarray,
                  tol: float) -> _np.ndarray:
    # smallest j != i whose Y^j - gamma_{i,j} is within tol of the maximum
    cand = Y[None, :, :] - problem.gamma
    idx = _np.arange(problem.m)
    cand[idx, idx] = -_np.inf
    best = cand.max(axis=1, keepdims=True)
    return _np.argmax(cand >= best - tol, axis=1)


def extract_strategy(problem: SwitchingProblem, Y: ValueFamily,
                     start_node: Optional[int] = None, start_mode: int = 0,
                     tol: float = STOP_TOL) -> Strategy:
    """
    Read the optimal strategy off a solved value family

    Starting from ``(start_node, start_mode)``, the ``n``-th switch happens
    at the first node at or after the previous switch where the value of the
    current mode equals its switching obstacle (within ``tol``). The new mode
    is the smallest index attaining the obstacle. Decisions stop being
    generated once every path has reached its leaf.

    Parameters
    ----------
    problem : :py:class:`~optSwitch.switching.SwitchingProblem`
        The problem
    Y : :py:class:`~optSwitch.switching.ValueFamily`
        The output of :py:func:`~optSwitch.switching.solver.solve`
    start_node : int or None
        Starting node (root if ``None``)
    start_mode : int
        Starting mode (0-based)
    tol : float
        Tolerance for the value/obstacle equality and for argmax ties

    Returns
    -------
    Strategy
    """
    tree = problem.tree
    start_node = tree.root if start_node is None else int(start_node)
    leaves = tree.subtree_leaves(start_node)
    paths = [tree.path_to(leaf) for leaf in leaves]
    U = _obstacles(problem, Y.values)
    touch = _np.abs(Y.values - U) <= tol
    best = _best_targets(problem, Y.values, tol)

    times = [_np.full(len(leaves), start_node)]
    modes = [_np.full(len(leaves), start_mode)]
    cap = (tree.horizon_steps + 1) * problem.m
    while len(times) <= cap:
        prev_t, prev_m = times[-1], modes[-1]
        new_t = _np.empty(len(leaves), dtype=int)
        for k, path in enumerate(paths):
            i = prev_m[k]
            for v in path[tree.time[prev_t[k]]:]:
                if tree.is_leaf[v] or touch[i, v]:
                    new_t[k] = v
                    break
        if tree.is_leaf[new_t].all():
            break
        times.append(new_t)
        modes.append(best[prev_m, new_t])
    else:
        _logger.warning(f'Stopped extracting after {cap} decisions; the '
                        f'values may not satisfy the no-double-switch '
                        f'property')
    strategy = Strategy(tree, start_node, start_mode, _np.vstack(times),
                        _np.vstack(modes))
    _logger.debug(f'Extracted {strategy!r}')
    return strategy


def path_modes(strategy: Strategy) -> _np.ndarray:
    """
    The active mode along every path of the strategy

    Returns
    -------
    u : :py:class:`numpy.ndarray` of shape ``(n_leaves, N - t0 + 1)``
        ``u[l, s]`` is the mode after the switches decided at the node of
        time ``t0 + s`` on the path to ``strategy.leaves[l]``, where ``t0``
        is the start node's time
    """
    tree = strategy.tree
    t0 = int(tree.time[strategy.start_node])
    horizon = tree.horizon_steps
    decided = tree.time[strategy.times][1:]
    eff = strategy.effective[1:]
    cols = _np.arange(len(strategy.leaves))
    u = _np.empty((len(strategy.leaves), horizon - t0 + 1), dtype=int)
    for s, t in enumerate(range(t0, horizon + 1)):
        k = ((decided <= t) & eff).sum(axis=0)
        u[:, s] = strategy.modes[k, cols]
    return u


def _paths(strategy: Strategy) -> _np.ndarray:
    tree = strategy.tree
    t0 = int(tree.time[strategy.start_node])
    return _np.array([tree.path_to(leaf)[t0:] for leaf in strategy.leaves],
                     dtype=int).reshape(len(strategy.leaves), -1)


def mode_indicator(strategy: Strategy) -> ModeIndicator:
    """
    The mode indicator ``u`` of a strategy, per node of the start subtree

    Returns
    -------
    :py:class:`~optSwitch.switching.ModeIndicator`
        ``-1`` outside the subtree of the start node
    """
    mode = _np.full(strategy.tree.n_nodes, -1, dtype=int)
    mode[_paths(strategy)] = path_modes(strategy)
    return ModeIndicator(strategy.tree, mode)


def switch_costs(problem: SwitchingProblem,
                 strategy: Strategy) -> _np.ndarray:
    """
    Cumulative switching costs ``C_n`` per path

    Returns
    -------
    :py:class:`numpy.ndarray` of shape ``(K, n_leaves)``
        Row ``n - 1`` is the total cost of the first ``n`` decisions; leaf
        decisions cost nothing
    """
    if strategy.n_decisions == 0:
        return _np.zeros((0, len(strategy.leaves)))
    md, tm = strategy.modes, strategy.times
    cost = problem.gamma[md[:-1], md[1:], tm[1:]]
    cost = _np.where(strategy.effective[1:], cost, 0.0)
    return _np.cumsum(cost, axis=0)


def num_switches(strategy: Strategy) -> _np.ndarray:
    """
    Number of switches strictly before the terminal time on each path

    Returns
    -------
    :py:class:`numpy.ndarray` of int
        One count per leaf, aligned with ``strategy.leaves``
    """
    return strategy.effective.sum(axis=0)


def evaluate(problem: SwitchingProblem, strategy: Strategy) -> float:
    """
    The performance index of a strategy, conditional on its start node:
    expected running reward in the active mode, plus the terminal reward of
    the final mode, minus the switching costs paid before the terminal time

    Parameters
    ----------
    problem : :py:class:`~optSwitch.switching.SwitchingProblem`
        The problem
    strategy : :py:class:`~optSwitch.switching.Strategy`
        An admissible strategy

    Returns
    -------
    float

    Raises
    ------
    ~optSwitch.utils.InadmissibleStrategyError
        If :py:func:`~optSwitch.validate.check_admissible` reports anything
    """
    from optSwitch.validate import check_admissible

    violations = check_admissible(strategy, problem)
    if violations:
        raise InadmissibleStrategyError(
            'Strategy is not admissible: ' +
            '; '.join(str(v) for v in violations[:5]), violations)

    paths = _paths(strategy)
    u = path_modes(strategy)
    running = problem.psi[u[:, :-1], paths[:, :-1]].sum(axis=1) * problem.dt
    terminal = problem.terminal[u[:, -1], paths[:, -1]]
    costs = switch_costs(problem, strategy)
    paid = costs[-1] if len(costs) else 0.0
    weights = conditional_leaf_weights(strategy.tree, strategy.start_node)
    return float(_np.dot(weights, running + terminal - paid))
