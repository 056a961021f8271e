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
Seeded random switching problems whose costs satisfy the no-arbitrage
conditions by construction.

All draws come from :py:func:`numpy.random.default_rng`, so the same seed
and shape always give the same problem. Edge probabilities are uniform and
``dt = 1/depth`` (``1`` for a single-node tree). Rewards are drawn as
``psi ~ U[-1, 1]`` and ``Gamma ~ U[-1, 1]``; every node carries a cost scale
``kappa ~ U[0.05, 0.5]`` and every ordered pair of modes a weight
``w ~ U[1, 1.5]``. Three kinds of costs are available:

``signed``
    ``gamma_{i,j} = phi_j - phi_i + kappa * w_{i,j}`` for a random potential
    ``phi ~ U[-1, 1]``, set to ``Gamma_i + U[0, kappa/2]`` on the leaves
``non-negative``
    ``gamma_{i,j} = kappa * w_{i,j}``, with terminal rewards within
    ``kappa/2`` of each other
``martingale``
    ``gamma_{i,j} = c_{i,j} (1 + xi/2)`` for a martingale ``|xi| <= 1`` and
    constants ``c_{i,j} = a_j - a_i + b * w_{i,j}``

Because ``w_{i,j} + w_{j,k} - w_{i,k} >= 1/2``, the triangle inequality
holds with a margin of at least ``kappa/4`` in every kind.
"""
import logging as _logging

import numpy as _np

from optSwitch.lattice import ScenarioTree
from optSwitch.switching import SwitchingProblem

_logger = _logging.getLogger(__name__)

COST_KINDS = ('signed', 'non-negative', 'martingale')
MAX_NODES = 2 ** 20


def tree_size(depth: int, branching: int) -> int:
    """Number of nodes of a complete tree"""
    return sum(branching ** t for t in range(depth + 1))


def _bounded_martingale(tree: ScenarioTree,
                        rng: _np.random.Generator) -> _np.ndarray:
    xi = _np.zeros(tree.n_nodes)
    step = 1.0 / max(tree.horizon_steps, 1)
    for t in range(tree.horizon_steps):
        for v in tree.layers[t]:
            kids = tree.children(v)
            z = rng.uniform(-1.0, 1.0, size=len(kids))
            z -= _np.dot(tree.cond_prob[kids], z)
            scale = _np.max(_np.abs(z))
            if scale > 0:
                z *= step / scale
            xi[kids] = xi[v] + z
    return xi


def generate_problem(seed: int, depth: int, branching: int, modes: int,
                     costs: str = 'signed') -> SwitchingProblem:
    """
    Generate a random switching problem on a complete tree

    Parameters
    ----------
    seed : int
        Seed of the random generator
    depth : int
        Number of time steps
    branching : int
        Children per non-leaf node
    modes : int
        Number of modes (``>= 2``)
    costs : str
        One of ``'signed'``, ``'non-negative'`` or ``'martingale'``

    Returns
    -------
    :py:class:`~optSwitch.switching.SwitchingProblem`
    """
    if costs not in COST_KINDS:
        raise ValueError(f'Unknown cost kind {costs!r}; expected one of '
                         f'{COST_KINDS}')
    if modes < 2:
        raise ValueError(f'At least two modes are required, got {modes}')
    size = tree_size(depth, branching)
    if size > MAX_NODES:
        raise ValueError(f'A tree of depth {depth} and branching '
                         f'{branching} has {size} nodes, more than '
                         f'{MAX_NODES}')

    rng = _np.random.default_rng(seed)
    tree = ScenarioTree.from_branching(depth, branching)
    n = tree.n_nodes
    leaves = tree.leaves
    off_diag = ~_np.eye(modes, dtype=bool)

    psi = rng.uniform(-1.0, 1.0, size=(modes, n))
    terminal = _np.zeros((modes, n))
    terminal[:, leaves] = rng.uniform(-1.0, 1.0, size=(modes, len(leaves)))
    kappa = rng.uniform(0.05, 0.5, size=n)
    w = rng.uniform(1.0, 1.5, size=(modes, modes))

    if costs == 'signed':
        phi = rng.uniform(-1.0, 1.0, size=(modes, n))
        eps = rng.uniform(0.0, 0.5, size=(modes, len(leaves)))
        phi[:, leaves] = terminal[:, leaves] + eps * kappa[leaves]
        gamma = (phi[None, :, :] - phi[:, None, :] +
                 kappa[None, None, :] * w[:, :, None])
    elif costs == 'non-negative':
        gamma = _np.broadcast_to(kappa[None, None, :] * w[:, :, None],
                                 (modes, modes, n)).copy()
        base = rng.uniform(-1.0, 1.0, size=len(leaves))
        eps = rng.uniform(0.0, 0.5, size=(modes, len(leaves)))
        terminal[:, leaves] = base[None, :] + eps * kappa[leaves]
    else:
        xi = _bounded_martingale(tree, rng)
        factor = 1.0 + 0.5 * xi
        a = rng.uniform(-1.0, 1.0, size=modes)
        b = rng.uniform(0.05, 0.5)
        c = a[None, :] - a[:, None] + b * w
        gamma = c[:, :, None] * factor[None, None, :]
        eps = rng.uniform(0.0, 0.25 * b, size=(modes, len(leaves)))
        terminal[:, leaves] = factor[leaves][None, :] * a[:, None] + eps
    gamma = _np.where(off_diag[:, :, None], gamma, 0.0)

    _logger.info(f'Generated a {costs} problem with seed {seed}: depth '
                 f'{depth}, branching {branching}, {modes} modes')
    return SwitchingProblem(tree, psi, gamma, terminal)
