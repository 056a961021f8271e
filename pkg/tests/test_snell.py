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
import numpy as np
import pytest

from optSwitch.lattice import AdaptedProcess, ScenarioTree
from optSwitch.snell import (StoppingRule, doob_decompose, first_optimal_stop,
                             snell_envelope, stopped_value)
from optSwitch.utils import NotSupermartingaleError

TOL = 1e-12


def _random_tree(rng):
    depth = int(rng.integers(1, 5))
    branching = int(rng.integers(1, 4))
    probs = rng.dirichlet(np.ones(branching))
    probs[-1] = 1.0 - probs[:-1].sum()
    return ScenarioTree.from_branching(depth, branching, probs=probs)


def _random_cases(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        tree = _random_tree(rng)
        yield tree, AdaptedProcess(tree, rng.normal(size=tree.n_nodes)), rng


class TestSnellEnvelope:
    def test_one_step_example(self):
        tree = ScenarioTree.from_branching(1, 2)
        Z = snell_envelope(AdaptedProcess(tree, [1., 0., 4.]))
        assert Z.values.tolist() == [2.0, 0.0, 4.0]

    def test_constant(self, binary_tree):
        Z = snell_envelope(AdaptedProcess.constant(binary_tree, -0.4))
        assert np.all(Z.values == -0.4)

    def test_stopping_now_is_best(self, binary_tree):
        U = AdaptedProcess(binary_tree, [10, 1, 2, 0, 0, 0, 0])
        assert snell_envelope(U)[0] == 10.0

    def test_domination_and_supermartingale(self):
        for tree, U, _ in _random_cases(500, 1):
            Z = snell_envelope(U)
            nonleaf = ~tree.is_leaf
            assert np.all(Z.values >= U.values)
            assert np.array_equal(Z.values[tree.leaves], U.values[tree.leaves])
            cont = tree.expect_children(Z.values)
            assert np.all(cont[nonleaf] <= Z.values[nonleaf] + TOL)
            # the envelope is max(U, E[Z]) at every non-leaf
            assert np.allclose(Z.values[nonleaf],
                               np.maximum(U.values, cont)[nonleaf],
                               rtol=0, atol=TOL)

    def test_monotone_in_obstacle(self):
        for tree, U, rng in _random_cases(500, 2):
            Z = snell_envelope(U)
            raised = AdaptedProcess(tree, U.values +
                                    rng.uniform(0, 1, size=tree.n_nodes))
            assert np.all(Z.values <= snell_envelope(raised).values + TOL)

    def test_minimality(self):
        for tree, U, rng in _random_cases(500, 5):
            Z = snell_envelope(U)
            # W = M - A: M a martingale from centred increments, A a
            # non-decreasing compensator shared by siblings
            M = np.zeros(tree.n_nodes)
            A = np.zeros(tree.n_nodes)
            for v in np.flatnonzero(~tree.is_leaf):
                kids = tree.children(v)
                z = rng.normal(size=len(kids))
                z -= np.dot(tree.cond_prob[kids], z)
                M[kids] = z
                A[kids] = rng.uniform(0, 1)
            for layer in tree.layers[1:]:
                M[layer] += M[tree.parent[layer]]
                A[layer] += A[tree.parent[layer]]
            W = M - A
            W += np.max(U.values - W)
            assert np.all(W >= U.values - TOL)
            assert np.all(Z.values <= W + TOL)

    def test_stopped_envelope_is_martingale(self):
        for tree, U, _ in _random_cases(500, 3):
            Z = snell_envelope(U)
            rule = first_optimal_stop(Z, U)
            cont = tree.expect_children(Z.values)
            running = ~rule.stop
            assert np.allclose(Z.values[running], cont[running],
                               rtol=0, atol=TOL)
            assert stopped_value(U, rule) == \
                pytest.approx(Z[tree.root], abs=1e-9)

    def test_identities_from_every_node(self):
        for tree, U, _ in _random_cases(50, 6):
            Z = snell_envelope(U)
            paths = {int(leaf): tree.path_to(leaf) for leaf in tree.leaves}
            for v in range(tree.n_nodes):
                rule = first_optimal_stop(Z, U, from_node=v)
                assert stopped_value(U, rule) == \
                    pytest.approx(Z[v], abs=1e-8)
                # E[Z(tau ^ t) | v] = Z(v) for every t after v
                leaves = tree.subtree_leaves(v)
                weights = tree.path_probability[leaves] / \
                    tree.path_probability[v]
                taus = rule.stopping_nodes()
                for t in range(int(tree.time[v]), tree.horizon_steps + 1):
                    stopped = [paths[int(leaf)][min(t, tree.time[tau])]
                               for leaf, tau in zip(leaves, taus)]
                    assert np.dot(weights, Z.values[stopped]) == \
                        pytest.approx(Z[v], abs=1e-8)


class TestDoobDecomposition:
    def test_invariants(self):
        for tree, U, _ in _random_cases(500, 4):
            Z = snell_envelope(U)
            d = doob_decompose(Z)
            M, A = d.martingale.values, d.compensator.values
            assert d.tree is tree
            assert np.allclose(M - A, Z.values, rtol=0, atol=TOL)
            assert A[tree.root] == 0.0
            nonroot = tree.parent >= 0
            # non-decreasing along every edge
            assert np.all(A[nonroot] >= A[tree.parent[nonroot]] - TOL)
            # predictable: siblings share the compensator exactly
            for v in np.flatnonzero(~tree.is_leaf):
                kids = tree.children(v)
                assert np.all(A[kids] == A[kids[0]])
            nonleaf = ~tree.is_leaf
            drift = tree.expect_children(M) - M
            assert np.all(np.abs(drift[nonleaf]) <= TOL)

    def test_constant(self, binary_tree):
        d = doob_decompose(AdaptedProcess.constant(binary_tree, 2.0))
        assert np.all(d.martingale.values == 2.0)
        assert np.all(d.compensator.values == 0.0)

    def test_not_supermartingale(self):
        tree = ScenarioTree.from_branching(1, 2)
        with pytest.raises(NotSupermartingaleError) as e:
            doob_decompose(AdaptedProcess(tree, [0.0, 1.0, 1.0]))
        assert e.value.node == 0

    def test_compensator_of_decreasing_process(self):
        tree = ScenarioTree.from_branching(2, 1)
        d = doob_decompose(AdaptedProcess(tree, [3.0, 2.0, 0.5]))
        assert d.compensator.values.tolist() == [0.0, 1.0, 2.5]
        assert d.martingale.values.tolist() == [3.0, 3.0, 3.0]


class TestStoppingRule:
    def test_leaves_always_stop(self, binary_tree):
        rule = StoppingRule(binary_tree, np.zeros(7, dtype=bool))
        assert rule.stopping_nodes().tolist() == [3, 4, 5, 6]
        assert rule.stop_nodes().tolist() == [3, 4, 5, 6]

    def test_first_stop(self, binary_tree):
        stop = np.zeros(7, dtype=bool)
        stop[[0, 2]] = True
        rule = StoppingRule(binary_tree, stop)
        assert rule.first_stop(5) == 0
        assert rule.first_stop(5, after=2) == 2
        assert rule.first_stop(3, after=1) == 3
        with pytest.raises(ValueError):
            rule.first_stop(3, after=2)

    def test_start_node(self, binary_tree):
        stop = np.zeros(7, dtype=bool)
        stop[[0, 2]] = True
        rule = StoppingRule(binary_tree, stop, start=2)
        assert rule.stopping_nodes().tolist() == [2, 2]

    def test_shape(self, binary_tree):
        with pytest.raises(ValueError):
            StoppingRule(binary_tree, [True, False])

    def test_first_optimal_stop_is_minimal(self, binary_tree):
        # stopping at the root pays 1; waiting pays 1 on average as well
        U = AdaptedProcess(binary_tree, [1, 0, 0, 0, 2, 0, 2])
        Z = snell_envelope(U)
        rule = first_optimal_stop(Z, U)
        assert rule.stopping_nodes().tolist() == [0, 0, 0, 0]
        assert stopped_value(U, rule) == 1.0
        later = first_optimal_stop(Z, U, from_node=1)
        assert later.stopping_nodes().tolist() == [3, 4]
