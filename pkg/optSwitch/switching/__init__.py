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
The optimal switching problem, its value family, and switching strategies.

The types defined here are shared by the solver in
:py:mod:`~optSwitch.switching.solver` and the strategy operations in
:py:mod:`~optSwitch.switching.strategy`; both are re-exported from this
package.

Mode indices are 0-based throughout the Python API. Problem files and
reports label modes from 1.
"""
import logging as _logging
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as _np

from optSwitch.lattice import AdaptedProcess, ScenarioTree, as_values
from optSwitch.snell import StoppingRule
from optSwitch.utils import InvalidTreeError, ProblemError

_logger = _logging.getLogger(__name__)

ProcessLike = Union[AdaptedProcess, Sequence[float], _np.ndarray]


def _readonly(arr: _np.ndarray) -> _np.ndarray:
    arr.setflags(write=False)
    return arr


class SwitchingProblem:
    """
    A finite-horizon optimal switching problem on a scenario tree

    Parameters
    ----------
    tree : :py:class:`~optSwitch.lattice.ScenarioTree`
        The filtration; must pass :py:func:`~optSwitch.lattice.validate_tree`
    psi : array-like of shape ``(m, n)`` or sequence of processes
        Running reward rate per mode and node (reward per unit time)
    gamma : array-like of shape ``(m, m, n)`` or mapping ``(i, j) -> process``
        Switching cost from mode ``i`` to mode ``j`` per node. When a mapping
        is given, the diagonal may be omitted.
    terminal : array-like of shape ``(m, n)`` or ``(m, n_leaves)``
        Terminal reward per mode, read on the leaves only (in the order of
        ``tree.leaves`` for the short form)

    Raises
    ------
    ~optSwitch.utils.ProblemError
        If the tree is invalid, fewer than two modes are given, any array has
        the wrong shape or a diagonal cost is non-zero
    """
    def __init__(self, tree: ScenarioTree,
                 psi: Union[_np.ndarray, Sequence[ProcessLike]],
                 gamma: Union[_np.ndarray,
                              Mapping[Tuple[int, int], ProcessLike]],
                 terminal: Union[_np.ndarray, Sequence[ProcessLike]]):
        try:
            tree.require_valid()
        except InvalidTreeError as e:
            raise ProblemError(e.message) from e
        self.tree = tree
        n = tree.n_nodes

        psi_arr = _np.array([as_values(p) for p in psi], dtype=float)
        if psi_arr.ndim != 2 or psi_arr.shape[1] != n:
            raise ProblemError(f'psi must have shape (m, {n}), got '
                               f'{psi_arr.shape}')
        m = psi_arr.shape[0]
        if m < 2:
            raise ProblemError(f'At least two modes are required, got {m}')
        self.m = m
        self.psi = _readonly(psi_arr)

        if isinstance(gamma, Mapping):
            gamma_arr = _np.zeros((m, m, n))
            for i in range(m):
                for j in range(m):
                    if (i, j) in gamma:
                        gamma_arr[i, j] = as_values(gamma[(i, j)])
                    elif i != j:
                        raise ProblemError(f'Missing switching cost for '
                                           f'modes ({i + 1},{j + 1})')
        else:
            gamma_arr = _np.array(gamma, dtype=float)
        if gamma_arr.shape != (m, m, n):
            raise ProblemError(f'gamma must have shape ({m}, {m}, {n}), got '
                               f'{gamma_arr.shape}')
        diag = gamma_arr[_np.arange(m), _np.arange(m)]
        if _np.any(diag != 0.0):
            i, v = _np.argwhere(diag != 0.0)[0]
            raise ProblemError(f'Staying in mode {i + 1} must cost nothing, '
                               f'but gamma({i + 1},{i + 1}) = {diag[i, v]} at '
                               f'node {v}')
        self.gamma = _readonly(gamma_arr)

        term = _np.array([as_values(g) for g in terminal], dtype=float)
        leaves = tree.leaves
        full = _np.zeros((m, n))
        if term.shape == (m, n):
            full[:, leaves] = term[:, leaves]
        elif term.shape == (m, len(leaves)):
            full[:, leaves] = term
        else:
            raise ProblemError(f'terminal must have shape ({m}, {n}) or '
                               f'({m}, {len(leaves)}), got {term.shape}')
        self.terminal = _readonly(full)

        for name, arr in (('psi', self.psi), ('gamma', self.gamma),
                          ('terminal', self.terminal)):
            if not _np.all(_np.isfinite(arr)):
                raise ProblemError(f'{name} contains non-finite values')

    @classmethod
    def from_constants(cls, tree: ScenarioTree, psi: Sequence[float],
                       gamma: Sequence[Sequence[float]],
                       terminal: Sequence[float]) -> 'SwitchingProblem':
        """Build a problem whose data do not depend on the node"""
        n = tree.n_nodes
        psi = _np.asarray(psi, dtype=float)
        gamma = _np.asarray(gamma, dtype=float)
        terminal = _np.asarray(terminal, dtype=float)
        return cls(tree,
                   _np.repeat(psi[:, None], n, axis=1),
                   _np.repeat(gamma[:, :, None], n, axis=2),
                   _np.repeat(terminal[:, None], n, axis=1))

    @property
    def dt(self) -> float:
        return self.tree.dt

    @property
    def horizon_steps(self) -> int:
        return self.tree.horizon_steps

    @property
    def iteration_bound(self) -> int:
        """``N * (m - 1) + 1``, the number of sweeps :py:func:`solve` may
        use"""
        return self.horizon_steps * (self.m - 1) + 1

    def gamma_process(self, i: int, j: int) -> AdaptedProcess:
        return AdaptedProcess(self.tree, self.gamma[i, j])

    def terminal_process(self, i: int) -> AdaptedProcess:
        """``Gamma_i`` on the leaves, zero elsewhere"""
        return AdaptedProcess(self.tree, self.terminal[i])

    def __repr__(self):
        return (f'SwitchingProblem(m={self.m}, n_nodes={self.tree.n_nodes}, '
                f'horizon_steps={self.horizon_steps}, dt={self.dt})')

    def __eq__(self, other):
        if not isinstance(other, SwitchingProblem):
            return NotImplemented
        return (sorted(self.tree.nodes, key=lambda v: v.id) ==
                sorted(other.tree.nodes, key=lambda v: v.id) and
                self.tree.dt == other.tree.dt and
                self.tree.horizon_steps == other.tree.horizon_steps and
                _np.array_equal(self.psi, other.psi) and
                _np.array_equal(self.gamma, other.gamma) and
                _np.array_equal(self.terminal, other.terminal))

    __hash__ = None


class ValueFamily:
    """
    The value processes ``Y^1, ..., Y^m`` of a switching problem

    Parameters
    ----------
    tree : :py:class:`~optSwitch.lattice.ScenarioTree`
        The tree
    values : array-like of shape ``(m, n)``
        ``values[i, v]`` is ``Y^i`` at node ``v``
    iterations : int or None
        Number of fixed-point sweeps used to obtain the values, if they came
        from :py:func:`~optSwitch.switching.solver.solve`
    """
    def __init__(self, tree: ScenarioTree, values,
                 iterations: Optional[int] = None):
        arr = _np.array(values, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != tree.n_nodes:
            raise ValueError(f'values must have shape (m, {tree.n_nodes}), '
                             f'got {arr.shape}')
        self.tree = tree
        self.values = _readonly(arr)
        self.iterations = iterations

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, mode: int) -> AdaptedProcess:
        return AdaptedProcess(self.tree, self.values[mode])

    def value(self, node: int, mode: int) -> float:
        return float(self.values[mode, node])

    def __repr__(self):
        root = self.tree.root
        vals = ', '.join(f'{x:.6g}' for x in self.values[:, root])
        return f'ValueFamily(root=[{vals}], iterations={self.iterations})'


class ModeIndicator:
    """
    The active mode per node under a strategy: the mode after every switch
    decided at the node. Nodes outside the strategy's start subtree hold
    ``-1``.
    """
    def __init__(self, tree: ScenarioTree, mode):
        arr = _np.array(mode, dtype=int)
        if arr.shape != (tree.n_nodes,):
            raise ValueError(f'Expected {tree.n_nodes} modes, got shape '
                             f'{arr.shape}')
        self.tree = tree
        self.mode = _readonly(arr)

    def __getitem__(self, node: int) -> int:
        return int(self.mode[node])

    def __repr__(self):
        return f'ModeIndicator({self.mode.tolist()})'


class Strategy:
    """
    A switching strategy ``(tau_n, iota_n)_{n >= 0}`` started at
    ``(start_node, start_mode)``, stored scenario by scenario

    The scenarios are the leaves below the start node. ``times[n, l]`` is the
    node at which the ``n``-th decision is taken on the path to leaf
    ``leaves[l]`` and ``modes[n, l]`` is the mode switched to. Row ``0``
    holds the start.

    Parameters
    ----------
    tree : :py:class:`~optSwitch.lattice.ScenarioTree`
        The tree
    start_node : int
        Node at which the strategy starts
    start_mode : int
        Mode at the start (0-based)
    times : array-like of int, shape ``(K + 1, n_leaves)``
        Decision nodes per path
    modes : array-like of int, shape ``(K + 1, n_leaves)``
        Decision modes per path
    switch_bound : int or None
        Declared bound on the number of switches per path, checked by
        :py:func:`~optSwitch.validate.check_admissible`
    """
    def __init__(self, tree: ScenarioTree, start_node: int, start_mode: int,
                 times, modes, switch_bound: Optional[int] = None):
        self.tree = tree
        self.start_node = int(start_node)
        self.start_mode = int(start_mode)
        self.leaves = tree.subtree_leaves(self.start_node)
        n_leaves = len(self.leaves)
        t = _np.array(times, dtype=int).reshape(-1, n_leaves)
        md = _np.array(modes, dtype=int).reshape(-1, n_leaves)
        if t.shape != md.shape or t.shape[0] < 1:
            raise ValueError(f'times and modes must share a shape '
                             f'(K + 1, {n_leaves}); got {t.shape} and '
                             f'{md.shape}')
        self.times = _readonly(t)
        self.modes = _readonly(md)
        self.switch_bound = switch_bound

    @classmethod
    def empty(cls, tree: ScenarioTree, start_node: int,
              start_mode: int) -> 'Strategy':
        """The strategy that never switches"""
        n_leaves = len(tree.subtree_leaves(start_node))
        return cls(tree, start_node, start_mode,
                   _np.full((1, n_leaves), start_node),
                   _np.full((1, n_leaves), start_mode))

    @classmethod
    def from_rules(cls, tree: ScenarioTree, start_node: int, start_mode: int,
                   decisions: Sequence[Tuple[StoppingRule, Mapping[int, int]]],
                   switch_bound: Optional[int] = None) -> 'Strategy':
        """
        Build a strategy from a sequence of stopping rules and mode selectors

        Decision ``n`` stops at the first node flagged by its rule at or
        after ``tau_{n-1}`` on each path, and switches to
        ``selector[tau_n]``.

        Parameters
        ----------
        decisions : sequence of (StoppingRule, dict)
            One ``(rule, selector)`` pair per decision; ``selector`` maps
            every stop node the rule can realise to a mode

        Raises
        ------
        KeyError
            If a selector has no entry for a realised stop node
        """
        leaves = tree.subtree_leaves(start_node)
        times = [_np.full(len(leaves), start_node)]
        modes = [_np.full(len(leaves), start_mode)]
        for rule, selector in decisions:
            t = _np.array([rule.first_stop(leaf, after=prev)
                           for leaf, prev in zip(leaves, times[-1])],
                          dtype=int)
            times.append(t)
            modes.append(_np.array([selector[int(v)] for v in t], dtype=int))
        return cls(tree, start_node, start_mode, _np.vstack(times),
                   _np.vstack(modes), switch_bound=switch_bound)

    @property
    def n_decisions(self) -> int:
        return self.times.shape[0] - 1

    @property
    def effective(self) -> _np.ndarray:
        """``(K + 1, n_leaves)`` mask of the decisions taken strictly before
        the terminal time (row 0 is always ``False``)"""
        eff = ~self.tree.is_leaf[self.times]
        eff[0] = False
        return eff

    @property
    def decisions(self) -> List[Tuple[StoppingRule, Dict[int, int]]]:
        """The ``(StoppingRule, selector)`` pairs realising this strategy"""
        out = []
        for n in range(1, self.n_decisions + 1):
            stop = _np.zeros(self.tree.n_nodes, dtype=bool)
            stop[self.times[n]] = True
            selector = {int(v): int(md) for v, md in
                        zip(self.times[n], self.modes[n])}
            out.append((StoppingRule(self.tree, stop, start=self.start_node),
                        selector))
        return out

    def __repr__(self):
        return (f'Strategy(start=({self.start_node}, {self.start_mode}), '
                f'decisions={self.n_decisions}, paths={len(self.leaves)})')


from optSwitch.switching.solver import (obstacle, solve_n_switches, solve,  # noqa: E402,E501
                                        fixed_point_residual,
                                        accumulated_values,
                                        snell_structure_residual)
from optSwitch.switching.strategy import (extract_strategy, evaluate,  # noqa: E402,E501
                                          num_switches, mode_indicator,
                                          switch_costs, path_modes)
