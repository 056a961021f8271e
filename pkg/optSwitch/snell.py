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
Snell envelopes on a scenario tree by backward induction, the discrete Doob
decomposition of a supermartingale, and the minimal optimal stopping rule.
"""
import logging as _logging
from typing import Optional

import numpy as _np

from optSwitch.lattice import (AdaptedProcess, ScenarioTree,
                               conditional_leaf_weights)
from optSwitch.utils import NotSupermartingaleError

_logger = _logging.getLogger(__name__)

SUPERMARTINGALE_TOL = 1e-12
STOP_TOL = 1e-9


class DoobDecomposition:
    """
    The split ``Z = M - A`` of a supermartingale into a martingale ``M`` and
    a predictable non-decreasing compensator ``A`` with ``A(root) = 0``

    Parameters
    ----------
    martingale : :py:class:`~optSwitch.lattice.AdaptedProcess`
        The martingale part ``M``
    compensator : :py:class:`~optSwitch.lattice.AdaptedProcess`
        The compensator ``A``; constant across siblings
    """
    def __init__(self, martingale: AdaptedProcess,
                 compensator: AdaptedProcess):
        self.martingale = martingale
        self.compensator = compensator

    @property
    def tree(self) -> ScenarioTree:
        return self.martingale.tree

    def __repr__(self):
        return (f'DoobDecomposition(max|M|='
                f'{_np.max(_np.abs(self.martingale.values)):.6g}, '
                f'max A={_np.max(self.compensator.values):.6g})')


class StoppingRule:
    """
    A stop/continue flag per node. The realised stopping time on a path is
    the first flagged node at or after the start node; leaves always stop.

    Parameters
    ----------
    tree : :py:class:`~optSwitch.lattice.ScenarioTree`
        The tree
    stop : array-like of bool
        One flag per node
    start : int or None
        The node from which stopping is searched (the root if ``None``)
    """
    def __init__(self, tree: ScenarioTree, stop, start: Optional[int] = None):
        flags = _np.array(stop, dtype=bool)
        if flags.shape != (tree.n_nodes,):
            raise ValueError(f'Expected {tree.n_nodes} stop flags, got shape '
                             f'{flags.shape}')
        flags |= tree.is_leaf
        flags.setflags(write=False)
        self.tree = tree
        self.stop = flags
        self.start = tree.root if start is None else int(start)

    def __repr__(self):
        return (f'StoppingRule(start={self.start}, '
                f'stop_nodes={self.stop_nodes().tolist()})')

    def first_stop(self, leaf: int, after: Optional[int] = None) -> int:
        """
        The first stop node on the path from ``after`` (default: the start
        node) down to ``leaf``, both included
        """
        after = self.start if after is None else int(after)
        if not self.tree.is_ancestor(after, leaf):
            raise ValueError(f'Node {after} is not on the path to leaf '
                             f'{leaf}')
        path = self.tree.path_to(leaf)
        for v in path[self.tree.time[after]:]:
            if self.stop[v]:
                return int(v)
        return int(leaf)

    def stopping_nodes(self) -> _np.ndarray:
        """The realised stop node for every leaf below the start node, in the
        order of ``tree.subtree_leaves(start)``"""
        return _np.array([self.first_stop(leaf)
                          for leaf in self.tree.subtree_leaves(self.start)],
                         dtype=int)

    def stop_nodes(self) -> _np.ndarray:
        """The sorted set of nodes at which the rule actually stops"""
        return _np.unique(self.stopping_nodes())


def snell_envelope(U: AdaptedProcess) -> AdaptedProcess:
    """
    The smallest supermartingale dominating ``U``

    Computed by backward induction: ``Z = U`` at the leaves and
    ``Z(v) = max(U(v), E[Z | v])`` elsewhere.

    Parameters
    ----------
    U : :py:class:`~optSwitch.lattice.AdaptedProcess`
        The reward (obstacle) process

    Returns
    -------
    Z : :py:class:`~optSwitch.lattice.AdaptedProcess`
        The Snell envelope of ``U``

    Examples
    --------
    A one-step tree where stopping now pays 1 and waiting pays 0 or 4 with
    equal probability:

    >>> tree = ScenarioTree.from_branching(1, 2)
    >>> snell_envelope(AdaptedProcess(tree, [1., 0., 4.]))[0]
    2.0
    """
    tree = U.tree
    Z = U.values.copy()
    for t in reversed(range(tree.horizon_steps)):
        layer = tree.layers[t]
        Z[layer] = _np.maximum(U.values[layer], tree.expect_layer(Z, t))
    return AdaptedProcess(tree, Z)


def doob_decompose(Z: AdaptedProcess,
                   tol: float = SUPERMARTINGALE_TOL) -> DoobDecomposition:
    """
    Discrete Doob decomposition ``Z = M - A`` of a supermartingale

    ``A`` starts at zero at the root and is assigned at children, so
    ``A(c) = A(v) + Z(v) - E[Z | v]`` for every child ``c`` of ``v`` and
    siblings always share a value. ``M = Z + A``.

    Parameters
    ----------
    Z : :py:class:`~optSwitch.lattice.AdaptedProcess`
        A supermartingale
    tol : float
        Slack allowed in ``E[Z | v] <= Z(v)``

    Returns
    -------
    DoobDecomposition

    Raises
    ------
    ~optSwitch.utils.NotSupermartingaleError
        Naming the first node where ``E[Z | v] > Z(v) + tol``
    """
    tree = Z.tree
    cont = tree.expect_children(Z.values)
    drift = _np.where(tree.is_leaf, 0.0, Z.values - cont)
    bad = _np.flatnonzero(drift < -tol)
    if bad.size:
        node = int(bad[0])
        raise NotSupermartingaleError(
            f'Process is not a supermartingale at node {node}: '
            f'E[Z | {node}] = {cont[node]:.12g} > Z({node}) = '
            f'{Z.values[node]:.12g}', node)
    A = _np.zeros(tree.n_nodes)
    for layer in tree.layers[1:]:
        par = tree.parent[layer]
        A[layer] = A[par] + drift[par]
    return DoobDecomposition(AdaptedProcess(tree, Z.values + A),
                             AdaptedProcess(tree, A))


def first_optimal_stop(Z: AdaptedProcess, U: AdaptedProcess,
                       from_node: Optional[int] = None,
                       tol: float = STOP_TOL) -> StoppingRule:
    """
    The minimal optimal stopping rule after ``from_node``: stop at the first
    node where the envelope touches the obstacle, and at the leaf otherwise

    Parameters
    ----------
    Z : :py:class:`~optSwitch.lattice.AdaptedProcess`
        ``snell_envelope(U)``
    U : :py:class:`~optSwitch.lattice.AdaptedProcess`
        The obstacle
    from_node : int or None
        Node from which the search starts (root if ``None``)
    tol : float
        Absolute tolerance for ``Z == U``

    Returns
    -------
    StoppingRule
    """
    stop = _np.abs(Z.values - U.values) <= tol
    return StoppingRule(Z.tree, stop, start=from_node)


def stopped_value(U: AdaptedProcess, rule: StoppingRule) -> float:
    """``E[U(tau) | start]`` for the stopping time realised by ``rule``"""
    tree = U.tree
    weights = conditional_leaf_weights(tree, rule.start)
    return float(_np.dot(weights, U.values[rule.stopping_nodes()]))
