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
Checkers for the standing assumptions of a switching problem and for the
martingale hypothesis that bounds cumulative switching costs.

Every checker returns a list of :py:class:`~optSwitch.utils.Violation`
records (empty when the check passes) instead of raising.
"""
import logging as _logging
from itertools import product as _product
from typing import List, NamedTuple, Optional, Union

import numpy as _np

from optSwitch.lattice import (AdaptedProcess, ScenarioTree,
                               conditional_leaf_weights)
from optSwitch.snell import doob_decompose, snell_envelope
from optSwitch.switching import Strategy, SwitchingProblem
from optSwitch.switching.strategy import num_switches, switch_costs
from optSwitch.utils import Violation, mode_label

_logger = _logging.getLogger(__name__)

COST_TOL = 1e-12
MARTINGALE_TOL = 1e-12
BOUND_TOL = 1e-9

CASE_TWO_MODE = 'two-mode Doob-Meyer'
CASE_MARTINGALE = 'martingale costs'
CASE_NON_NEGATIVE = 'non-negative'
CASES = (CASE_TWO_MODE, CASE_MARTINGALE, CASE_NON_NEGATIVE)


class MartingaleFamily:
    """
    A family of martingales ``M_{i,j}``, one per ordered pair of modes

    Parameters
    ----------
    tree : :py:class:`~optSwitch.lattice.ScenarioTree`
        The tree
    values : array-like of shape ``(m, m, n)``
        ``values[i, j, v]`` is ``M_{i,j}`` at node ``v``
    case : str or None
        The constructive case that produced the family, if any
    """
    def __init__(self, tree: ScenarioTree, values, case: Optional[str] = None):
        arr = _np.array(values, dtype=float)
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or \
                arr.shape[2] != tree.n_nodes:
            raise ValueError(f'values must have shape (m, m, '
                             f'{tree.n_nodes}), got {arr.shape}')
        arr.setflags(write=False)
        self.tree = tree
        self.values = arr
        self.case = case

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, pair) -> AdaptedProcess:
        i, j = pair
        return AdaptedProcess(self.tree, self.values[i, j])

    def __repr__(self):
        return f'MartingaleFamily(m={self.m}, case={self.case!r})'


class Unavailable:
    """Returned when none of the constructive cases applies. This is not an
    error: the hypothesis may still hold for some other family."""
    def __init__(self, reason: str):
        self.reason = reason

    def __repr__(self):
        return f'Unavailable({self.reason!r})'

    def __bool__(self):
        return False


class BoundCheck(NamedTuple):
    """Outcome of :py:func:`check_cost_bound`"""
    holds: bool
    gap: float


def check_assumption_costs(problem: SwitchingProblem,
                           tol: float = COST_TOL) -> List[Violation]:
    """
    Check the no-arbitrage conditions on the switching costs

    Verified at every node and for all modes ``i, j, k``:

    * ``gamma_{i,i} = 0`` exactly;
    * ``gamma_{i,k} < gamma_{i,j} + gamma_{j,k}`` (by more than ``tol``)
      whenever ``i != j`` and ``j != k``, including ``k = i``;
    * at the leaves, ``Gamma_i >= max_{j != i}(Gamma_j - gamma_{i,j}) - tol``.

    Parameters
    ----------
    problem : :py:class:`~optSwitch.switching.SwitchingProblem`
        The problem
    tol : float
        Margin used for the strict triangle inequality and the terminal
        condition

    Returns
    -------
    violations : list of :py:class:`~optSwitch.utils.Violation`
    """
    g = problem.gamma
    m = problem.m
    violations = []
    for i in range(m):
        for v in _np.flatnonzero(g[i, i] != 0.0):
            violations.append(Violation(
                'zero-diagonal',
                f'staying in mode {mode_label(i)} costs {g[i, i, v]}',
                node=v, modes=(i, i)))
    for i, j, k in _product(range(m), repeat=3):
        if i == j or j == k:
            continue
        chained = g[i, j] + g[j, k]
        for v in _np.flatnonzero(g[i, k] >= chained - tol):
            violations.append(Violation(
                'triangle',
                f'gamma({mode_label(i)},{mode_label(k)}) = {g[i, k, v]:.12g} '
                f'is not strictly below gamma({mode_label(i)},'
                f'{mode_label(j)}) + gamma({mode_label(j)},{mode_label(k)}) '
                f'= {chained[v]:.12g}',
                node=v, modes=(i, j, k)))
    leaves = problem.tree.leaves
    term = problem.terminal[:, leaves]
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            reach = term[j] - g[i, j, leaves]
            for pos in _np.flatnonzero(term[i] < reach - tol):
                violations.append(Violation(
                    'terminal',
                    f'Gamma_{mode_label(i)} = {term[i, pos]:.12g} is below '
                    f'Gamma_{mode_label(j)} - gamma({mode_label(i)},'
                    f'{mode_label(j)}) = {reach[pos]:.12g}',
                    node=leaves[pos], modes=(i, j)))
    if violations:
        _logger.warning(f'Switching costs fail {len(violations)} '
                        f'no-arbitrage check(s)')
    return violations


def _is_martingale(values: _np.ndarray, tree: ScenarioTree,
                   tol: float) -> bool:
    cont = tree.expect_children(values)
    gap = _np.abs(cont - values)[~tree.is_leaf]
    return gap.size == 0 or float(gap.max()) <= tol


def _two_mode_family(problem: SwitchingProblem) -> _np.ndarray:
    tree = problem.tree
    M = _np.zeros((2, 2, tree.n_nodes))
    for i, j in ((0, 1), (1, 0)):
        Z = snell_envelope(-problem.gamma_process(i, j))
        M[i, j] = doob_decompose(Z).martingale.values
    M[0, 0] = M[1, 1] = M[0, 1] + M[1, 0]
    return M


def construct_martingale_family(problem: SwitchingProblem,
                                case: Optional[str] = None,
                                tol: float = MARTINGALE_TOL
                                ) -> Union[MartingaleFamily, Unavailable]:
    """
    Build a martingale family for the hypothesis from one of the
    constructive cases

    Tried in order (unless ``case`` forces one):

    * two modes: ``M_{i,j}`` is the martingale part of the Doob
      decomposition of the Snell envelope of ``-gamma_{i,j}``, and
      ``M_{1,1} = M_{2,2} = M_{1,2} + M_{2,1}``;
    * every ``gamma_{i,j}`` is a martingale: ``M_{i,j} = -gamma_{i,j}``;
    * every ``gamma_{i,j}`` is non-negative: ``M = 0``.

    For costs that are constant in the node, the two-mode and martingale
    cases give the same off-diagonal entries ``M_{i,j} = -gamma_{i,j}``.

    Parameters
    ----------
    problem : :py:class:`~optSwitch.switching.SwitchingProblem`
        The problem
    case : str or None
        One of :py:data:`CASES` to force a single case
    tol : float
        Tolerance of the martingale test on the costs

    Returns
    -------
    MartingaleFamily or Unavailable
    """
    if case is not None and case not in CASES:
        raise ValueError(f'Unknown case {case!r}; expected one of {CASES}')
    tree = problem.tree
    m = problem.m
    order = [case] if case is not None else list(CASES)
    for c in order:
        if c == CASE_TWO_MODE and m == 2:
            values = _two_mode_family(problem)
        elif c == CASE_MARTINGALE and all(
                _is_martingale(problem.gamma[i, j], tree, tol)
                for i, j in _product(range(m), repeat=2) if i != j):
            values = -problem.gamma
        elif c == CASE_NON_NEGATIVE and _np.all(problem.gamma >= 0.0):
            values = _np.zeros_like(problem.gamma)
        else:
            continue
        _logger.info(f'Martingale family built from the {c!r} case')
        return MartingaleFamily(tree, values, case=c)
    reason = (f'the {case!r} case does not apply' if case is not None else
              'costs are neither martingales nor non-negative and m > 2')
    _logger.info(f'No constructive martingale family: {reason}')
    return Unavailable(reason)


def check_hypothesis_m(family: MartingaleFamily, problem: SwitchingProblem,
                       tol: float = MARTINGALE_TOL) -> List[Violation]:
    """
    Check a martingale family against the hypothesis

    Verified for every node:

    * (i) each ``M_{i,j}`` is finite;
    * (ii) ``-gamma_{i,j} <= M_{i,j} + tol`` for ``i != j``;
    * (iii) ``M_{i,j} + M_{j,k} <= M_{i,k} + tol`` for ``i != j``,
      ``j != k`` (``k = i`` included);
    * each ``M_{i,j}`` is a martingale (one-step identity within ``tol``).

    Returns
    -------
    violations : list of :py:class:`~optSwitch.utils.Violation`
    """
    tree = problem.tree
    M = family.values
    m = problem.m
    violations = []
    if M.shape != problem.gamma.shape:
        return [Violation('shape', f'family has shape {M.shape}, expected '
                                   f'{problem.gamma.shape}')]
    nonleaf = ~tree.is_leaf
    for i, j in _product(range(m), repeat=2):
        pair = (i, j)
        for v in _np.flatnonzero(~_np.isfinite(M[i, j])):
            violations.append(Violation('finite', 'value is not finite',
                                        node=v, modes=pair))
        drift = _np.abs(tree.expect_children(M[i, j]) - M[i, j])
        for v in _np.flatnonzero(nonleaf & (drift > tol)):
            violations.append(Violation(
                'martingale', f'|E[M | v] - M(v)| = {drift[v]:.3e}',
                node=v, modes=pair))
        if i != j:
            for v in _np.flatnonzero(-problem.gamma[i, j] > M[i, j] + tol):
                violations.append(Violation(
                    'domination',
                    f'-gamma = {-problem.gamma[i, j, v]:.12g} exceeds '
                    f'M = {M[i, j, v]:.12g}', node=v, modes=pair))
    for i, j, k in _product(range(m), repeat=3):
        if i == j or j == k:
            continue
        lhs = M[i, j] + M[j, k]
        for v in _np.flatnonzero(lhs > M[i, k] + tol):
            violations.append(Violation(
                'triangle',
                f'M({mode_label(i)},{mode_label(j)}) + M({mode_label(j)},'
                f'{mode_label(k)}) = {lhs[v]:.12g} exceeds '
                f'M({mode_label(i)},{mode_label(k)}) = {M[i, k, v]:.12g}',
                node=v, modes=(i, j, k)))
    return violations


def check_cost_bound(problem: SwitchingProblem, strategy: Strategy,
                     family: MartingaleFamily,
                     tol: float = BOUND_TOL) -> BoundCheck:
    """
    Check the bound on cumulative switching gains:
    ``E[-C_n | start] <= E[max_{j1,j2} |M_{j1,j2}(T)| | start]`` for every
    truncation ``n`` of the strategy

    Returns
    -------
    BoundCheck
        ``holds`` and the worst ``lhs - rhs`` over all truncations (the
        empty sum when the strategy has no decisions)
    """
    weights = conditional_leaf_weights(problem.tree, strategy.start_node)
    C = switch_costs(problem, strategy)
    lhs = -(C @ weights) if len(C) else _np.zeros(1)
    terminal_m = _np.abs(family.values[:, :, strategy.leaves])
    rhs = float(_np.dot(weights, terminal_m.max(axis=(0, 1))))
    gap = float(_np.max(lhs)) - rhs
    return BoundCheck(gap <= tol, gap)


def check_admissible(strategy: Strategy,
                     problem: SwitchingProblem) -> List[Violation]:
    """
    Check that a strategy is admissible

    The discrete forms of the four admissibility clauses are verified:

    1. ``tau_0`` is the start node, every ``tau_n`` lies on its path between
       the start node and the leaf, the ``tau_n`` are non-decreasing, and
       each ``tau_n`` is a stopping time (if one path through a node stops
       there, all paths through it do);
    2. ``iota_0`` is the start mode, modes are in range, ``iota_n`` only
       depends on the node ``tau_n`` and ``iota_n != iota_{n+1}``;
    3. the number of switches before the terminal time respects the
       declared ``switch_bound``;
    4. every cumulative cost ``C_n`` is finite.

    Returns
    -------
    violations : list of :py:class:`~optSwitch.utils.Violation`
    """
    tree = strategy.tree
    times, modes = strategy.times, strategy.modes
    leaves = strategy.leaves
    start = strategy.start_node
    violations = []

    if _np.any(times[0] != start):
        violations.append(Violation('start', 'tau_0 is not the start node '
                                             '(clause 1)', node=start))
    on_path = True
    for n in range(times.shape[0]):
        for leaf, v in zip(leaves, times[n]):
            if not (0 <= v < tree.n_nodes and tree.is_ancestor(start, v)
                    and tree.is_ancestor(v, leaf)):
                on_path = False
                violations.append(Violation(
                    'path', f'tau_{n} = {v} is not between the start node '
                            f'and leaf {leaf} (clause 1)', node=leaf))
    if not on_path:
        return violations

    step_back = tree.time[times[1:]] < tree.time[times[:-1]]
    for n, pos in zip(*_np.nonzero(step_back)):
        violations.append(Violation(
            'monotone', f'tau_{n + 1} comes before tau_{n} (clause 1)',
            node=times[n + 1, pos]))

    for n in range(1, times.shape[0]):
        for v in _np.unique(times[n]):
            reached = leaves[times[n] == v]
            if not _np.array_equal(reached, tree.subtree_leaves(v)):
                violations.append(Violation(
                    'stopping-time', f'tau_{n} stops at {v} on some but not '
                                     f'all paths through it (clause 1)',
                    node=v))

    if _np.any(modes[0] != strategy.start_mode):
        violations.append(Violation(
            'start-mode', 'iota_0 is not the start mode (clause 2)',
            node=start, modes=(strategy.start_mode,)))
    if _np.any((modes < 0) | (modes >= problem.m)):
        violations.append(Violation(
            'mode-range', f'modes must lie in 1..{problem.m} (clause 2)'))
        return violations
    for n in range(1, times.shape[0]):
        for v in _np.unique(times[n]):
            chosen = _np.unique(modes[n][times[n] == v])
            if len(chosen) > 1:
                violations.append(Violation(
                    'adapted', f'iota_{n} differs across paths sharing the '
                               f'decision node (clause 2)',
                    node=v, modes=chosen))
        for pos in _np.flatnonzero(modes[n] == modes[n - 1]):
            violations.append(Violation(
                'distinct', f'iota_{n} repeats iota_{n - 1} (clause 2)',
                node=times[n, pos], modes=(modes[n, pos],)))

    if strategy.switch_bound is not None:
        counts = num_switches(strategy)
        for pos in _np.flatnonzero(counts > strategy.switch_bound):
            violations.append(Violation(
                'finite', f'{counts[pos]} switches exceed the bound '
                          f'{strategy.switch_bound} (clause 3)',
                node=leaves[pos]))

    C = switch_costs(problem, strategy)
    for n, pos in zip(*_np.nonzero(~_np.isfinite(C))):
        violations.append(Violation(
            'cost-integrable', f'C_{n + 1} is not finite (clause 4)',
            node=leaves[pos]))
    return violations
