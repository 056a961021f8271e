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
Brute-force verification of the switching solver.

On a tree every adapted pure strategy started at ``(node, mode)`` is
determined by the mode chosen at each non-leaf node below ``node``, since a
node encodes its full history. The functions in this module enumerate those
choices exhaustively. Policies given as maps ``(node, current mode) -> next
mode`` that differ only on unreachable pairs realise the same strategy, so
each realised strategy is produced once. Each node applies the policy once,
so a strategy makes at most one switch per node; when the costs satisfy the
strict triangle inequality, chained switches are never better, and the
oracle values are exact.

The module also checks the martingale identities behind the integrability of
the optimal cumulative switching costs.
"""
import logging as _logging
from itertools import product as _product
from timeit import default_timer as _timer
from typing import Iterator, Optional

import numpy as _np
from tqdm import tqdm as _tqdm

from optSwitch.lattice import AdaptedProcess, conditional_leaf_weights
from optSwitch.snell import doob_decompose
from optSwitch.switching import Strategy, SwitchingProblem, ValueFamily
from optSwitch.switching.solver import accumulated_values
from optSwitch.switching.strategy import path_modes, switch_costs
from optSwitch.utils import EnumerationGuardError, get_policy_limit

_logger = _logging.getLogger(__name__)

BOUND_TOL = 1e-9


def count_policies(problem: SwitchingProblem) -> int:
    """Size of the raw policy space ``m^(n * m)``: one target mode for every
    ``(node, current mode)`` pair"""
    return problem.m ** (problem.tree.n_nodes * problem.m)


def _decision_nodes(problem: SwitchingProblem, node: int) -> _np.ndarray:
    tree = problem.tree
    sub = tree.subtree_nodes(node)
    sub = sub[~tree.is_leaf[sub]]
    # parents before children
    return sub[_np.argsort(tree.time[sub], kind='stable')]


def count_strategies(problem: SwitchingProblem,
                     node: Optional[int] = None) -> int:
    """Number of distinct realised strategies from ``node`` for one start
    mode: ``m`` raised to the number of non-leaf nodes below ``node``"""
    node = problem.tree.root if node is None else int(node)
    return problem.m ** len(_decision_nodes(problem, node))


def _check_guard(problem: SwitchingProblem, node: int):
    count = count_strategies(problem, node)
    limit = get_policy_limit()
    if count > limit:
        msg = (f'Enumerating {count} strategies from node {node} exceeds the '
               f'limit of {limit}; use a smaller tree or fewer modes, or '
               f'raise SWITCH_POLICY_LIMIT')
        _logger.error(msg)
        raise EnumerationGuardError(msg, count, limit)
    return count


def _to_strategy(problem: SwitchingProblem, node: int, mode: int,
                 choice: dict, max_switches: int) -> Strategy:
    tree = problem.tree
    t0 = int(tree.time[node])
    leaves = tree.subtree_leaves(node)
    switches = []
    for leaf in leaves:
        current = mode
        seq = []
        for v in tree.path_to(leaf)[t0:-1]:
            target = choice[int(v)]
            if target != current:
                seq.append((int(v), target))
                current = target
        switches.append(seq)
    depth = max((len(s) for s in switches), default=0)
    times = _np.empty((depth + 1, len(leaves)), dtype=int)
    modes = _np.empty((depth + 1, len(leaves)), dtype=int)
    times[0], modes[0] = node, mode
    for pos, (leaf, seq) in enumerate(zip(leaves, switches)):
        for n in range(1, depth + 1):
            if n <= len(seq):
                times[n, pos], modes[n, pos] = seq[n - 1]
            else:
                # no-op decision at the leaf
                times[n, pos] = leaf
                modes[n, pos] = (modes[n - 1, pos] + 1) % problem.m
    return Strategy(tree, node, mode, times, modes, switch_bound=max_switches)


def enumerate_policies(problem: SwitchingProblem, max_switches: int,
                       node: Optional[int] = None,
                       mode: Optional[int] = None) -> Iterator[Strategy]:
    """
    Yield every adapted pure strategy with at most ``max_switches`` switches
    on each path

    Parameters
    ----------
    problem : :py:class:`~optSwitch.switching.SwitchingProblem`
        The problem
    max_switches : int
        Per-path limit on switches strictly before the terminal time
    node : int or None
        Start node (root if ``None``)
    mode : int or None
        Start mode; every mode in turn if ``None``

    Yields
    ------
    :py:class:`~optSwitch.switching.Strategy`

    Raises
    ------
    ~optSwitch.utils.EnumerationGuardError
        If the number of realised strategies exceeds
        :py:func:`~optSwitch.utils.get_policy_limit`
    """
    tree = problem.tree
    node = tree.root if node is None else int(node)
    _check_guard(problem, node)
    decision = [int(v) for v in _decision_nodes(problem, node)]
    leaves = tree.subtree_leaves(node)
    paths = [tree.path_to(leaf)[tree.time[node]:-1] for leaf in leaves]
    start_modes = range(problem.m) if mode is None else [int(mode)]
    for start_mode in start_modes:
        for assignment in _product(range(problem.m), repeat=len(decision)):
            choice = dict(zip(decision, assignment))
            too_many = False
            for path in paths:
                current, count = start_mode, 0
                for v in path:
                    if choice[int(v)] != current:
                        count += 1
                        current = choice[int(v)]
                if count > max_switches:
                    too_many = True
                    break
            if not too_many:
                yield _to_strategy(problem, node, start_mode, choice,
                                   max_switches)


def oracle_value(problem: SwitchingProblem, node: Optional[int] = None,
                 mode: int = 0, max_switches: Optional[int] = None,
                 progress: bool = False, batch_size: int = 1 << 16) -> float:
    """
    Best performance index over all strategies with at most
    ``max_switches`` switches per path, by exhaustive enumeration

    The strategies are scored in vectorised batches using the same
    arithmetic as :py:func:`~optSwitch.switching.strategy.evaluate`.

    Parameters
    ----------
    problem : :py:class:`~optSwitch.switching.SwitchingProblem`
        The problem
    node : int or None
        Start node (root if ``None``)
    mode : int
        Start mode (0-based)
    max_switches : int or None
        Per-path switch limit; defaults to ``N * (m - 1)``
    progress : bool
        Whether or not to show a progress bar over the batches
    batch_size : int
        Number of strategies scored per batch

    Returns
    -------
    float

    Raises
    ------
    ~optSwitch.utils.EnumerationGuardError
        If the enumeration would exceed the policy limit
    """
    tree = problem.tree
    m = problem.m
    node = tree.root if node is None else int(node)
    if max_switches is None:
        max_switches = tree.horizon_steps * (m - 1)
    total = _check_guard(problem, node)
    start = _timer()

    decision = _decision_nodes(problem, node)
    leaves = tree.subtree_leaves(node)
    leaf_w = conditional_leaf_weights(tree, node)
    if len(decision) == 0:
        return float(problem.terminal[mode, node])

    col = {int(v): d for d, v in enumerate(decision)}
    parent_col = _np.array([col.get(int(tree.parent[v]), -1)
                            for v in decision])
    leaf_col = _np.array([col[int(tree.parent[leaf])] for leaf in leaves])
    incidence = _np.zeros((len(leaves), len(decision)), dtype=int)
    for pos, leaf in enumerate(leaves):
        for v in tree.path_to(leaf)[tree.time[node]:-1]:
            incidence[pos, col[int(v)]] = 1
    node_w = tree.path_probability[decision] / tree.path_probability[node]
    powers = m ** _np.arange(len(decision) - 1, -1, -1, dtype=_np.int64)

    best = -_np.inf
    batches = range(0, total, batch_size)
    for lo in _tqdm(batches) if progress else batches:
        idx = _np.arange(lo, min(lo + batch_size, total), dtype=_np.int64)
        choice = (idx[:, None] // powers[None, :]) % m
        incoming = _np.where(parent_col[None, :] >= 0,
                             choice[:, _np.maximum(parent_col, 0)], mode)
        switched = (choice != incoming).astype(int)
        feasible = (switched @ incidence.T).max(axis=1) <= max_switches
        if not feasible.any():
            continue
        step = (problem.psi[choice, decision] * problem.dt -
                problem.gamma[incoming, choice, decision])
        final = problem.terminal[choice[:, leaf_col], leaves]
        value = step @ node_w + final @ leaf_w
        best = max(best, float(value[feasible].max()))
    _logger.info(f'Scored {total} strategies from (node {node}, mode '
                 f'{mode + 1}) in {_timer() - start:.3f} seconds')
    return best


def _mode_martingales(problem: SwitchingProblem,
                      Y: ValueFamily) -> _np.ndarray:
    acc = accumulated_values(problem, Y)
    return _np.vstack([
        doob_decompose(AdaptedProcess(problem.tree, acc[i])).martingale.values
        for i in range(problem.m)])


def check_cumulative_cost_identity(problem: SwitchingProblem, Y: ValueFamily,
                                   strategy: Strategy) -> float:
    """
    Compare the cumulative costs ``C_n`` of an optimal strategy with their
    representation through the value processes and the martingale parts of
    the accumulated values ``Y^i + sum_{s<t} psi_i dt``:

    .. math::

        C_n = Y^{\\iota_{N_n}}(\\tau_{N_n}) - Y^{\\iota_0}(\\tau_0)
              + \\sum_{\\tau_0 \\le s < \\tau_{N_n}} \\psi_{u_s}(s)\\,dt
              - \\sum_{k=1}^{N_n} \\big(M^{\\iota_{k-1}}(\\tau_k)
              - M^{\\iota_{k-1}}(\\tau_{k-1})\\big)

    where ``N_n`` is the number of the first ``n`` decisions taken before
    the terminal time.

    Returns
    -------
    float
        The largest absolute residual over all paths and all ``n``
    """
    if strategy.n_decisions == 0:
        return 0.0
    tree = problem.tree
    M = _mode_martingales(problem, Y)
    C = switch_costs(problem, strategy)
    times, modes = strategy.times, strategy.modes
    t0 = int(tree.time[strategy.start_node])
    u = path_modes(strategy)
    cols = _np.arange(len(strategy.leaves))
    paths = _np.array([tree.path_to(leaf)[t0:] for leaf in strategy.leaves],
                      dtype=int).reshape(len(strategy.leaves), -1)
    reward = problem.psi[u, paths] * problem.dt
    # running[l, s]: reward collected before offset s on path l
    running = _np.hstack([_np.zeros((len(cols), 1)),
                          _np.cumsum(reward, axis=1)])
    jumps = M[modes[:-1], times[1:]] - M[modes[:-1], times[:-1]]
    jump_sums = _np.vstack([_np.zeros(len(cols)), _np.cumsum(jumps, axis=0)])
    counts = _np.cumsum(strategy.effective, axis=0)

    worst = 0.0
    for n in range(1, strategy.n_decisions + 1):
        k = counts[n]
        tau_k = times[k, cols]
        rhs = (Y.values[modes[k, cols], tau_k] -
               Y.values[modes[0], times[0]] +
               running[cols, tree.time[tau_k] - t0] -
               jump_sums[k, cols])
        worst = max(worst, float(_np.max(_np.abs(C[n - 1] - rhs))))
    return worst


class MartingaleBoundReport:
    """
    Numerical check of the square-integrability argument for the optimal
    cumulative costs

    Attributes
    ----------
    xi : :py:class:`numpy.ndarray`, shape ``(K, n_leaves)``
        ``xi_k = M^{iota_{k-1}}(tau_k) - M^{iota_{k-1}}(tau_{k-1})``
    X : :py:class:`numpy.ndarray`, shape ``(K + 1, n_leaves)``
        Partial sums of ``xi``, starting at 0
    R : :py:class:`numpy.ndarray`, shape ``(K + 1, n_leaves)``
        Predictable part of the Doob decomposition of ``X**2``
    Q : :py:class:`numpy.ndarray`, shape ``(K + 1, n_leaves)``
        Martingale part, ``X**2 - R``
    max_conditional_mean : float
        ``max |E[xi_k | G_{k-1}]|``; should vanish
    sum_sq, sum_sq_bound : float
        ``E[sum_k xi_k**2]`` and ``4 m max_i E[(M^i_T)**2]``
    sup_sq, sup_sq_bound : float
        ``E[(max_n |X_n|)**2]`` and ``4 E[R_K]``
    """
    def __init__(self, xi, X, R, max_conditional_mean, sum_sq, sum_sq_bound,
                 sup_sq, sup_sq_bound, tol=BOUND_TOL):
        self.xi = xi
        self.X = X
        self.R = R
        self.Q = X ** 2 - R
        self.max_conditional_mean = float(max_conditional_mean)
        self.sum_sq = float(sum_sq)
        self.sum_sq_bound = float(sum_sq_bound)
        self.sup_sq = float(sup_sq)
        self.sup_sq_bound = float(sup_sq_bound)
        self.tol = tol

    @property
    def centred(self) -> bool:
        return self.max_conditional_mean <= self.tol

    @property
    def sum_sq_holds(self) -> bool:
        return self.sum_sq <= self.sum_sq_bound + self.tol

    @property
    def sup_sq_holds(self) -> bool:
        return self.sup_sq <= self.sup_sq_bound + self.tol

    @property
    def holds(self) -> bool:
        return self.centred and self.sum_sq_holds and self.sup_sq_holds

    def to_dict(self) -> dict:
        return {'max_conditional_mean': self.max_conditional_mean,
                'sum_sq': self.sum_sq, 'sum_sq_bound': self.sum_sq_bound,
                'sup_sq': self.sup_sq, 'sup_sq_bound': self.sup_sq_bound,
                'holds': self.holds}

    def __repr__(self):
        return (f'MartingaleBoundReport(holds={self.holds}, '
                f'max_conditional_mean={self.max_conditional_mean:.3e}, '
                f'sum_sq={self.sum_sq:.6g} <= {self.sum_sq_bound:.6g}, '
                f'sup_sq={self.sup_sq:.6g} <= {self.sup_sq_bound:.6g})')


def _conditional_mean(values: _np.ndarray, atoms: _np.ndarray,
                      weights: _np.ndarray) -> _np.ndarray:
    _, inverse = _np.unique(atoms, return_inverse=True)
    num = _np.bincount(inverse, weights=weights * values)
    den = _np.bincount(inverse, weights=weights)
    return (num / den)[inverse]


def check_discrete_martingale_bounds(problem: SwitchingProblem,
                                     Y: ValueFamily,
                                     strategy: Strategy,
                                     tol: float = BOUND_TOL
                                     ) -> MartingaleBoundReport:
    """
    Build the switching martingale ``X_n = sum_{k <= n} xi_k`` of an optimal
    strategy and check

    * (a) ``E[xi_k | G_{k-1}] = 0``, where ``G_k`` is generated by the
      ``k``-th decision node;
    * (b) ``E[sum_k xi_k**2] <= 4 m max_i E[(M^i_T)**2]``;
    * (c) ``E[(max_n |X_n|)**2] <= 4 E[R_K]`` with ``X**2 = Q + R``.

    All expectations are conditional on the start node. ``xi_k`` uses the
    full increment of the stopped martingale, including the final segment
    into the terminal time.

    Returns
    -------
    MartingaleBoundReport
    """
    tree = problem.tree
    M = _mode_martingales(problem, Y)
    w = conditional_leaf_weights(tree, strategy.start_node)
    times, modes = strategy.times, strategy.modes
    n_leaves = len(strategy.leaves)
    K = strategy.n_decisions

    xi = M[modes[:-1], times[1:]] - M[modes[:-1], times[:-1]]
    X = _np.vstack([_np.zeros(n_leaves), _np.cumsum(xi, axis=0)])
    means = [_conditional_mean(xi[k], times[k], w) for k in range(K)]
    cond_sq = [_conditional_mean(xi[k] ** 2, times[k], w) for k in range(K)]
    R = _np.vstack([_np.zeros(n_leaves)] +
                   ([_np.cumsum(cond_sq, axis=0)] if K else []))
    max_mean = max((float(_np.max(_np.abs(c))) for c in means), default=0.0)

    terminal_sq = [float(_np.dot(w, M[i, strategy.leaves] ** 2))
                   for i in range(problem.m)]
    report = MartingaleBoundReport(
        xi, X, R, max_mean,
        sum_sq=float(_np.dot(w, (xi ** 2).sum(axis=0))),
        sum_sq_bound=4 * problem.m * max(terminal_sq),
        sup_sq=float(_np.dot(w, _np.abs(X).max(axis=0) ** 2)),
        sup_sq_bound=4 * float(_np.dot(w, R[-1])),
        tol=tol)
    _logger.debug(f'{report!r}')
    return report
