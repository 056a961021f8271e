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
The interconnected Snell envelope system of an optimal switching problem.

For each mode ``i`` the value process ``Y^i`` satisfies ``Y^i = Gamma_i`` on
the leaves and, at every other node ``v``,

.. math::

    Y^i(v) = \\max\\Big(\\psi_i(v)\\,dt + E[Y^i \\mid v],\\;
             \\max_{j \\ne i}\\big(Y^j(v) - \\gamma_{i,j}(v)\\big)\\Big).

The system is solved by the at-most-``n``-switches recursion: ``Y^{i,0}``
accumulates the running reward without switching, and ``Y^{i,n}`` is the
envelope whose obstacle is built from ``Y^{.,n-1}``. The values increase in
``n`` and, under a strict triangle inequality on the costs, stop changing
after at most ``N * (m - 1) + 1`` sweeps.
"""
import logging as _logging
from concurrent.futures import ThreadPoolExecutor as _ThreadPoolExecutor
from timeit import default_timer as _timer
from typing import Callable, List, Optional

import numpy as _np

from optSwitch.lattice import AdaptedProcess
from optSwitch.snell import snell_envelope
from optSwitch.switching import SwitchingProblem, ValueFamily
from optSwitch.utils import ConvergenceError, get_thread_count

_logger = _logging.getLogger(__name__)

DEFAULT_TOL = 1e-12


def _obstacles(problem: SwitchingProblem, Y: _np.ndarray) -> _np.ndarray:
    # cand[i, j, v] = Y^j(v) - gamma_{i,j}(v)
    cand = Y[None, :, :] - problem.gamma
    idx = _np.arange(problem.m)
    cand[idx, idx] = -_np.inf
    U = cand.max(axis=1)
    leaves = problem.tree.leaves
    U[:, leaves] = problem.terminal[:, leaves]
    return U


def obstacle(i: int, Y: ValueFamily,
             problem: SwitchingProblem) -> AdaptedProcess:
    """
    The switching obstacle of mode ``i``: the best value reachable by
    switching away from ``i`` immediately

    Parameters
    ----------
    i : int
        The current mode (0-based)
    Y : :py:class:`~optSwitch.switching.ValueFamily`
        Values of all modes
    problem : :py:class:`~optSwitch.switching.SwitchingProblem`
        The problem

    Returns
    -------
    U : :py:class:`~optSwitch.lattice.AdaptedProcess`
        ``max_{j != i}(Y^j - gamma_{i,j})`` at non-leaves and ``Gamma_i`` at
        the leaves
    """
    return AdaptedProcess(problem.tree, _obstacles(problem, Y.values)[i])


def _envelope(problem: SwitchingProblem, i: int,
              U: Optional[_np.ndarray]) -> _np.ndarray:
    tree = problem.tree
    dt = problem.dt
    Y = problem.terminal[i].copy()
    for t in reversed(range(tree.horizon_steps)):
        layer = tree.layers[t]
        cont = problem.psi[i, layer] * dt + tree.expect_layer(Y, t)
        Y[layer] = cont if U is None else _np.maximum(cont, U[layer])
    return Y


def _map_modes(fn: Callable[[int], _np.ndarray], m: int) -> List[_np.ndarray]:
    threads = get_thread_count()
    if threads > 0 and m > 1:
        with _ThreadPoolExecutor(max_workers=min(threads, m)) as ex:
            return list(ex.map(fn, range(m)))
    return [fn(i) for i in range(m)]


def _no_switch_values(problem: SwitchingProblem) -> _np.ndarray:
    return _np.vstack(_map_modes(lambda i: _envelope(problem, i, None),
                                 problem.m))


def _sweep(problem: SwitchingProblem, Y: _np.ndarray) -> _np.ndarray:
    U = _obstacles(problem, Y)
    return _np.vstack(_map_modes(lambda i: _envelope(problem, i, U[i]),
                                 problem.m))


def solve_n_switches(problem: SwitchingProblem, n: int) -> ValueFamily:
    """
    Values of the switching problem when at most ``n`` switches are allowed
    on each path

    Parameters
    ----------
    problem : :py:class:`~optSwitch.switching.SwitchingProblem`
        The problem
    n : int
        Maximum number of switches (``>= 0``)

    Returns
    -------
    Y : :py:class:`~optSwitch.switching.ValueFamily`
        ``Y^{.,n}``

    Examples
    --------
    One deterministic step, mode 2 earns 1 per unit time, switching costs
    0.4 either way:

    >>> tree = ScenarioTree.from_branching(1, 1, dt=1.0)
    >>> p1 = SwitchingProblem.from_constants(tree, [0, 1],
    ...                                      [[0, .4], [.4, 0]], [0, 0])
    >>> solve_n_switches(p1, 1).values[:, 0]
    array([0.6, 1. ])
    """
    if n < 0:
        raise ValueError(f'n must be non-negative, got {n}')
    Y = _no_switch_values(problem)
    for k in range(1, n + 1):
        Y_next = _sweep(problem, Y)
        if _np.array_equal(Y_next, Y):
            _logger.debug(f'Values unchanged after {k} switches; stopping '
                          f'early')
            break
        Y = Y_next
    return ValueFamily(problem.tree, Y)


def solve(problem: SwitchingProblem, tol: float = DEFAULT_TOL) -> ValueFamily:
    """
    Solve the switching problem by iterating the at-most-``n``-switches
    recursion to its fixed point

    Parameters
    ----------
    problem : :py:class:`~optSwitch.switching.SwitchingProblem`
        The problem; it should pass
        :py:func:`~optSwitch.validate.check_assumption_costs`
    tol : float
        The iteration stops once the largest node-wise change across all
        modes is at most ``tol``

    Returns
    -------
    Y : :py:class:`~optSwitch.switching.ValueFamily`
        The fixed point, with ``iterations`` set to the number of sweeps
        used

    Raises
    ------
    ~optSwitch.utils.ConvergenceError
        If the values still move after ``N * (m - 1) + 1`` sweeps, which
        happens when the costs allow an arbitrage loop
    """
    start = _timer()
    bound = problem.iteration_bound
    Y = _no_switch_values(problem)
    delta = _np.inf
    for k in range(1, bound + 1):
        Y_next = _sweep(problem, Y)
        delta = float(_np.max(_np.abs(Y_next - Y)))
        _logger.debug(f'Sweep {k}: max change {delta:.3e}')
        Y = Y_next
        if delta <= tol:
            family = ValueFamily(problem.tree, Y, iterations=k)
            _logger.info(f'Converged after {k} sweep(s) in '
                         f'{_timer() - start:.3f} seconds')
            _logger.debug(f'Fixed-point residual '
                          f'{fixed_point_residual(problem, family):.3e}')
            return family
    raise ConvergenceError(
        f'No fixed point within {bound} sweeps (last change {delta:.6g}); '
        f'check the switching costs for arbitrage loops', bound)


def fixed_point_residual(problem: SwitchingProblem, Y: ValueFamily) -> float:
    """
    Largest node-wise residual of the switching system:
    ``|Y^i - max(psi_i dt + E[Y^i], U^i)|`` at non-leaves and
    ``|Y^i - Gamma_i|`` at the leaves
    """
    tree = problem.tree
    U = _obstacles(problem, Y.values)
    worst = 0.0
    for i in range(problem.m):
        cont = problem.psi[i] * problem.dt + tree.expect_children(Y.values[i])
        rhs = _np.where(tree.is_leaf, problem.terminal[i],
                        _np.maximum(cont, U[i]))
        worst = max(worst, float(_np.max(_np.abs(Y.values[i] - rhs))))
    return worst


def running_reward(problem: SwitchingProblem) -> _np.ndarray:
    """``(m, n)`` array of ``sum_{s < t} psi_i(s) dt`` along the path to each
    node"""
    tree = problem.tree
    R = _np.zeros((problem.m, tree.n_nodes))
    for layer in tree.layers[1:]:
        par = tree.parent[layer]
        R[:, layer] = R[:, par] + problem.psi[:, par] * problem.dt
    return R


def accumulated_values(problem: SwitchingProblem,
                       Y: ValueFamily) -> _np.ndarray:
    """``(m, n)`` array of ``Y^i + sum_{s < t} psi_i(s) dt``; each row is a
    supermartingale when ``Y`` solves the switching system"""
    return Y.values + running_reward(problem)


def snell_structure_residual(problem: SwitchingProblem,
                             Y: ValueFamily) -> float:
    """
    Largest node-wise gap between ``Y^i + sum_{s<t} psi_i dt`` and the Snell
    envelope of ``U^i + sum_{s<t} psi_i dt``, over all modes
    """
    R = running_reward(problem)
    U = _obstacles(problem, Y.values)
    worst = 0.0
    for i in range(problem.m):
        Z = snell_envelope(AdaptedProcess(problem.tree, U[i] + R[i]))
        worst = max(worst,
                    float(_np.max(_np.abs(Z.values - Y.values[i] - R[i]))))
    return worst
