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
Finite scenario trees used as the filtered probability space of a switching
problem, processes adapted to them, and conditional expectations.

A :py:class:`ScenarioTree` stores one record per node: its id, its time step,
its parent and the conditional probability of the edge from the parent. The
nodes at time ``t`` are the atoms of the time-``t`` sigma-algebra, so any
real function on the nodes is an adapted process. Path probabilities are
always derived from the edge probabilities and never stored on input.

Node ids must be ``0..n-1``; every array in this package is indexed by node
id.
"""
import logging as _logging
from collections import defaultdict as _defaultdict
from functools import cached_property as _cached_property
from typing import Iterable, List, Optional, Sequence, Union

import numpy as _np

from optSwitch.utils import (Violation, InvalidTreeError, NoChildrenError,
                             TimeRangeError)

_logger = _logging.getLogger(__name__)

PROB_TOL = 1e-12
"""Absolute tolerance on edge-probability sums and martingale identities"""


class Node:
    """
    A single node of a scenario tree

    Parameters
    ----------
    id : int
        Unique id of the node, between ``0`` and ``n-1``
    time : int
        Time step index of the node
    parent : int or None
        Id of the parent node; ``None`` for the root
    cond_prob : float
        Probability of reaching this node from its parent
    """
    __slots__ = ('id', 'time', 'parent', 'cond_prob')

    def __init__(self, id: int, time: int, parent: Optional[int],
                 cond_prob: float):
        self.id = int(id)
        self.time = int(time)
        self.parent = None if parent is None else int(parent)
        self.cond_prob = float(cond_prob)

    @classmethod
    def from_dict(cls, d: dict) -> 'Node':
        return cls(d['id'], d['time'], d.get('parent'), d['cond_prob'])

    def to_dict(self) -> dict:
        return {'id': self.id, 'time': self.time, 'parent': self.parent,
                'cond_prob': self.cond_prob}

    def __repr__(self):
        return (f'Node(id={self.id}, time={self.time}, parent={self.parent}, '
                f'cond_prob={self.cond_prob})')

    def __eq__(self, other):
        if not isinstance(other, Node):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self.id, self.time, self.parent, self.cond_prob))


class ScenarioTree:
    """
    A finite rooted tree encoding a discrete-time filtration

    The raw node records are kept exactly as given so that
    :py:func:`validate_tree` can report structural problems. The derived
    arrays (parents, children, layers, path probabilities, ...) are computed
    lazily and assume a valid tree; callers that build on a tree should call
    :py:meth:`require_valid` first.

    Parameters
    ----------
    nodes : iterable of :py:class:`Node`
        The node records
    dt : float
        Length of one time step; the horizon is ``T = N * dt``
    horizon_steps : int or None
        The number of time steps ``N``. If ``None``, the largest node time is
        used.
    """
    def __init__(self, nodes: Iterable[Node], dt: float = 1.0,
                 horizon_steps: Optional[int] = None):
        self.nodes = tuple(nodes)
        self.dt = float(dt)
        if horizon_steps is None:
            horizon_steps = max((n.time for n in self.nodes), default=0)
        self.horizon_steps = int(horizon_steps)

    def __repr__(self):
        return (f'ScenarioTree(n_nodes={len(self.nodes)}, '
                f'horizon_steps={self.horizon_steps}, dt={self.dt})')

    @classmethod
    def from_branching(cls, depth: int, branching: int,
                       dt: Optional[float] = None,
                       probs: Optional[Sequence[float]] = None
                       ) -> 'ScenarioTree':
        """
        Build a complete tree in which every non-leaf node has the same
        number of children. Ids are assigned breadth-first, so the root is
        ``0`` and the nodes of each time step are contiguous.

        Parameters
        ----------
        depth : int
            Number of time steps ``N``
        branching : int
            Number of children of every non-leaf node
        dt : float or None
            Step length; defaults to ``1/depth`` (or ``1`` when ``depth`` is
            0)
        probs : sequence of float or None
            Edge probabilities of the children, in order; uniform if ``None``

        Returns
        -------
        tree : ScenarioTree
        """
        if depth < 0 or branching < 1:
            raise ValueError('depth must be >= 0 and branching >= 1')
        if dt is None:
            dt = 1.0 / depth if depth > 0 else 1.0
        if probs is None:
            probs = [1.0 / branching] * branching
        if len(probs) != branching:
            raise ValueError(f'Expected {branching} edge probabilities, '
                             f'got {len(probs)}')
        nodes = [Node(0, 0, None, 1.0)]
        frontier = [0]
        for t in range(1, depth + 1):
            nxt = []
            for p in frontier:
                for q in probs:
                    nodes.append(Node(len(nodes), t, p, q))
                    nxt.append(len(nodes) - 1)
            frontier = nxt
        return cls(nodes, dt=dt, horizon_steps=depth)

    def require_valid(self):
        """
        Raise :py:class:`~optSwitch.utils.InvalidTreeError` listing every
        violation if the tree fails :py:func:`validate_tree`
        """
        violations = validate_tree(self)
        if violations:
            detail = '; '.join(str(v) for v in violations[:5])
            raise InvalidTreeError(
                f'Scenario tree has {len(violations)} violation(s): {detail}',
                violations)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @_cached_property
    def _by_id(self) -> List[Node]:
        return sorted(self.nodes, key=lambda n: n.id)

    @_cached_property
    def time(self) -> _np.ndarray:
        t = _np.array([n.time for n in self._by_id], dtype=int)
        t.setflags(write=False)
        return t

    @_cached_property
    def parent(self) -> _np.ndarray:
        """Parent id per node, ``-1`` at the root"""
        p = _np.array([-1 if n.parent is None else n.parent
                       for n in self._by_id], dtype=int)
        p.setflags(write=False)
        return p

    @_cached_property
    def cond_prob(self) -> _np.ndarray:
        p = _np.array([n.cond_prob for n in self._by_id], dtype=float)
        p.setflags(write=False)
        return p

    @_cached_property
    def root(self) -> int:
        return int(_np.flatnonzero(self.parent < 0)[0])

    @_cached_property
    def _children(self):
        kids = _defaultdict(list)
        for n in self._by_id:
            if n.parent is not None:
                kids[n.parent].append(n.id)
        return tuple(_np.array(kids.get(i, []), dtype=int)
                     for i in range(self.n_nodes))

    def children(self, node: int) -> _np.ndarray:
        """Ids of the children of ``node`` (empty for a leaf)"""
        return self._children[node]

    @_cached_property
    def is_leaf(self) -> _np.ndarray:
        leaf = _np.array([len(c) == 0 for c in self._children], dtype=bool)
        leaf.setflags(write=False)
        return leaf

    @_cached_property
    def leaves(self) -> _np.ndarray:
        return _np.flatnonzero(self.is_leaf)

    @_cached_property
    def layers(self):
        """Tuple of id arrays, one per time step ``0..N``"""
        return tuple(_np.flatnonzero(self.time == t)
                     for t in range(self.horizon_steps + 1))

    @_cached_property
    def path_probability(self) -> _np.ndarray:
        """Unconditional probability of reaching each node"""
        pp = _np.zeros(self.n_nodes)
        pp[self.root] = 1.0
        for layer in self.layers[1:]:
            pp[layer] = pp[self.parent[layer]] * self.cond_prob[layer]
        pp.setflags(write=False)
        return pp

    @_cached_property
    def _subtree_leaves(self):
        out = [None] * self.n_nodes
        for layer in reversed(self.layers):
            for v in layer:
                if self.is_leaf[v]:
                    out[v] = _np.array([v], dtype=int)
                else:
                    out[v] = _np.sort(_np.concatenate(
                        [out[c] for c in self._children[v]]))
        return tuple(out)

    def subtree_leaves(self, node: int) -> _np.ndarray:
        """Sorted ids of the leaves below (or equal to) ``node``"""
        return self._subtree_leaves[node]

    def subtree_nodes(self, node: int) -> _np.ndarray:
        """Sorted ids of ``node`` and all of its descendants"""
        out = []
        stack = [int(node)]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(int(c) for c in self._children[v])
        return _np.array(sorted(out), dtype=int)

    def path_to(self, node: int) -> _np.ndarray:
        """Ids of the nodes on the path from the root to ``node``, so that
        entry ``t`` is the ancestor at time ``t``"""
        path = [int(node)]
        while self.parent[path[-1]] >= 0:
            path.append(int(self.parent[path[-1]]))
        return _np.array(path[::-1], dtype=int)

    def is_ancestor(self, ancestor: int, node: int) -> bool:
        """Whether ``ancestor`` lies on the root path of ``node`` (a node is
        its own ancestor)"""
        t = self.time[ancestor]
        v = int(node)
        while self.time[v] > t:
            v = int(self.parent[v])
        return v == ancestor

    def expect_children(self, values: _np.ndarray) -> _np.ndarray:
        """
        One-step conditional expectation at every node at once

        Parameters
        ----------
        values : :py:class:`numpy.ndarray`
            A value per node

        Returns
        -------
        :py:class:`numpy.ndarray`
            ``sum(cond_prob(c) * values[c])`` over the children of each node;
            ``0`` at leaves
        """
        values = _np.asarray(values, dtype=float)
        nonroot = self.parent >= 0
        return _np.bincount(self.parent[nonroot],
                            weights=self.cond_prob[nonroot] * values[nonroot],
                            minlength=self.n_nodes)

    def expect_layer(self, values: _np.ndarray, t: int) -> _np.ndarray:
        """One-step conditional expectation for the nodes at time ``t < N``,
        in the order of ``layers[t]``"""
        nxt = self.layers[t + 1]
        e = _np.bincount(self.parent[nxt],
                         weights=self.cond_prob[nxt] * values[nxt],
                         minlength=self.n_nodes)
        return e[self.layers[t]]


class AdaptedProcess:
    """
    A real value on every node of a :py:class:`ScenarioTree`

    Values are held in a read-only :py:class:`numpy.ndarray` indexed by node
    id. Adaptedness is structural: a node's value is a function of the node,
    which encodes its full history.

    Parameters
    ----------
    tree : ScenarioTree
        The tree the process lives on
    values : array-like
        One value per node
    """
    __array_priority__ = 1000

    def __init__(self, tree: ScenarioTree, values):
        arr = _np.array(values, dtype=float)
        if arr.shape != (tree.n_nodes,):
            raise ValueError(f'Expected {tree.n_nodes} node values, got '
                             f'shape {arr.shape}')
        arr.setflags(write=False)
        self.tree = tree
        self.values = arr

    @classmethod
    def constant(cls, tree: ScenarioTree, c: float) -> 'AdaptedProcess':
        return cls(tree, _np.full(tree.n_nodes, float(c)))

    def __repr__(self):
        return f'AdaptedProcess({_np.array2string(self.values, precision=6)})'

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, node) -> float:
        return float(self.values[node])

    def _other(self, other):
        if isinstance(other, AdaptedProcess):
            if other.tree is not self.tree:
                raise ValueError('Processes live on different trees')
            return other.values
        return other

    def __add__(self, other):
        return AdaptedProcess(self.tree, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return AdaptedProcess(self.tree, self.values - self._other(other))

    def __rsub__(self, other):
        return AdaptedProcess(self.tree, self._other(other) - self.values)

    def __neg__(self):
        return AdaptedProcess(self.tree, -self.values)

    def __mul__(self, other):
        if isinstance(other, AdaptedProcess):
            return NotImplemented
        return AdaptedProcess(self.tree, self.values * float(other))

    __rmul__ = __mul__


def validate_tree(tree: ScenarioTree, tol: float = PROB_TOL
                  ) -> List[Violation]:
    """
    Check the structural invariants of a scenario tree

    Parameters
    ----------
    tree : ScenarioTree
        The tree to check
    tol : float
        Tolerance on the sum of the children's edge probabilities

    Returns
    -------
    violations : list of :py:class:`~optSwitch.utils.Violation`
        Empty if and only if the tree is valid. Each entry names the rule and
        (where it applies) the node id.
    """
    violations = []
    horizon = tree.horizon_steps

    if not tree.dt > 0:
        violations.append(Violation('dt', f'time step dt={tree.dt} must be '
                                          f'positive'))

    by_id = {}
    for node in tree.nodes:
        if node.id in by_id:
            violations.append(Violation('duplicate-id',
                                        f'node id {node.id} is used more '
                                        f'than once', node=node.id))
        else:
            by_id[node.id] = node
    n = len(tree.nodes)
    for node_id in by_id:
        if not 0 <= node_id < n:
            violations.append(Violation('id-range',
                                        f'node id {node_id} is outside '
                                        f'0..{n - 1}', node=node_id))

    roots = [node for node in by_id.values() if node.parent is None]
    if len(roots) != 1:
        violations.append(Violation('root-count',
                                    f'expected exactly one root, found '
                                    f'{len(roots)}'))
    for root in roots:
        if root.time != 0:
            violations.append(Violation('root-time',
                                        f'root is at time {root.time}, '
                                        f'not 0', node=root.id))
        if abs(root.cond_prob - 1.0) > tol:
            violations.append(Violation('root-prob',
                                        f'root cond_prob is '
                                        f'{root.cond_prob}, not 1',
                                        node=root.id))

    children = _defaultdict(list)
    for node in by_id.values():
        if not 0 <= node.time <= horizon:
            violations.append(Violation('time-range',
                                        f'time {node.time} is outside '
                                        f'0..{horizon}', node=node.id))
        if node.parent is None:
            continue
        if node.parent not in by_id:
            violations.append(Violation('missing-parent',
                                        f'parent {node.parent} does not '
                                        f'exist', node=node.id))
            continue
        children[node.parent].append(node)
        parent = by_id[node.parent]
        if node.time != parent.time + 1:
            violations.append(Violation('child-time',
                                        f'time {node.time} is not parent '
                                        f'time {parent.time} + 1',
                                        node=node.id))
        if not 0.0 < node.cond_prob <= 1.0:
            violations.append(Violation('cond-prob-range',
                                        f'cond_prob {node.cond_prob} is not '
                                        f'in (0, 1]', node=node.id))

    for parent_id, kids in children.items():
        total = sum(k.cond_prob for k in kids)
        if abs(total - 1.0) > tol:
            violations.append(Violation('prob-sum',
                                        f'children cond_prob values sum to '
                                        f'{total:.15g}, not 1',
                                        node=parent_id))

    for node in by_id.values():
        if node.time < horizon and node.id not in children:
            violations.append(Violation('missing-children',
                                        f'node at time {node.time} < N='
                                        f'{horizon} has no children',
                                        node=node.id))

    on_cycle = set()
    for node in by_id.values():
        seen = {node.id}
        cur = node
        while cur.parent is not None and cur.parent in by_id:
            if cur.parent in seen:
                if cur.parent not in on_cycle:
                    on_cycle.add(cur.parent)
                    violations.append(Violation('cycle',
                                                'parent relation contains '
                                                'a cycle',
                                                node=cur.parent))
                break
            seen.add(cur.parent)
            cur = by_id[cur.parent]

    for v in violations:
        _logger.debug(f'Tree violation {v}')
    return violations


def one_step_expectation(proc: AdaptedProcess, node: int) -> float:
    """
    Conditional expectation of ``proc`` one step ahead of ``node``

    Parameters
    ----------
    proc : AdaptedProcess
        The process
    node : int
        A non-leaf node id

    Returns
    -------
    float
        ``sum(cond_prob(c) * proc(c))`` over the children ``c`` of ``node``

    Raises
    ------
    ~optSwitch.utils.NoChildrenError
        If ``node`` is a leaf
    """
    tree = proc.tree
    kids = tree.children(node)
    if len(kids) == 0:
        raise NoChildrenError(f'Node {node} has no children')
    return float(_np.dot(tree.cond_prob[kids], proc.values[kids]))


def conditional_expectation(proc: AdaptedProcess) -> AdaptedProcess:
    """
    :py:func:`one_step_expectation` at every non-leaf node at once. Leaves
    keep their own value, since the terminal sigma-algebra already
    determines them.
    """
    tree = proc.tree
    e = tree.expect_children(proc.values)
    return AdaptedProcess(tree, _np.where(tree.is_leaf, proc.values, e))


def root_expectation(proc: AdaptedProcess, time: int) -> float:
    """
    Unconditional expectation of ``proc`` at a fixed time step

    Parameters
    ----------
    proc : AdaptedProcess
        The process
    time : int
        A time step in ``0..N``

    Returns
    -------
    float
        The path-probability-weighted sum of the values at ``time``

    Raises
    ------
    ~optSwitch.utils.TimeRangeError
        If ``time`` is outside ``0..N``
    """
    tree = proc.tree
    if not 0 <= time <= tree.horizon_steps:
        raise TimeRangeError(f'Time {time} is outside 0..'
                             f'{tree.horizon_steps}')
    layer = tree.layers[time]
    return float(_np.dot(tree.path_probability[layer], proc.values[layer]))


def conditional_leaf_weights(tree: ScenarioTree, node: int) -> _np.ndarray:
    """Probabilities of the leaves below ``node``, conditional on ``node``,
    in the order of :py:meth:`ScenarioTree.subtree_leaves`"""
    leaves = tree.subtree_leaves(node)
    return tree.path_probability[leaves] / tree.path_probability[node]


def as_values(proc: Union[AdaptedProcess, _np.ndarray, Sequence[float]]
              ) -> _np.ndarray:
    """The raw value array of a process, or the array itself"""
    if isinstance(proc, AdaptedProcess):
        return proc.values
    return _np.asarray(proc, dtype=float)
