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
import pytest

from optSwitch.generator import generate_problem
from optSwitch.lattice import ScenarioTree
from optSwitch.switching import SwitchingProblem

from .utils import files


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """
    Make sure a developer's ``.env`` cannot change the configuration seen by
    the tests
    """
    monkeypatch.delenv('SWITCH_THREADS', raising=False)
    monkeypatch.delenv('SWITCH_POLICY_LIMIT', raising=False)


@pytest.fixture
def p1_tree():
    """One deterministic step of length 1"""
    return ScenarioTree.from_branching(1, 1, dt=1.0)


@pytest.fixture
def p1(p1_tree):
    """
    Mode 1 earns nothing, mode 2 earns 1 per unit time and switching costs
    0.4 in either direction
    """
    return SwitchingProblem.from_constants(p1_tree, [0.0, 1.0],
                                           [[0.0, 0.4], [0.4, 0.0]],
                                           [0.0, 0.0])


@pytest.fixture
def binary_tree():
    """Two steps, two equally likely children per node (ids 0..6)"""
    return ScenarioTree.from_branching(2, 2)


@pytest.fixture
def make_problem():
    """Factory for seeded random problems"""
    def _make(seed, depth=2, branching=2, modes=2, costs='signed'):
        return generate_problem(seed, depth, branching, modes, costs=costs)
    return _make


@pytest.fixture
def golden():
    """Paths of the golden problem files"""
    return files
