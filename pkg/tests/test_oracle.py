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

from optSwitch.oracle import (MartingaleBoundReport,
                              check_cumulative_cost_identity,
                              check_discrete_martingale_bounds,
                              count_policies, count_strategies,
                              enumerate_policies, oracle_value)
from optSwitch.switching import (evaluate, extract_strategy, solve,
                                 solve_n_switches)
from optSwitch.utils import EnumerationGuardError
from optSwitch.validate import check_admissible

from .utils import small_instances

ORACLE_TOL = 1e-9


class TestEnumeration:
    def test_counts(self, p1, make_problem):
        assert count_policies(p1) == 16
        assert count_strategies(p1) == 2
        assert count_strategies(p1, node=1) == 1
        problem = make_problem(0, depth=2, branching=2, modes=3)
        assert count_strategies(problem) == 3 ** 3
        assert count_strategies(problem, node=1) == 3

    def test_p1_strategies(self, p1):
        strategies = list(enumerate_policies(p1, max_switches=1, mode=0))
        assert len(strategies) == 2
        values = sorted(evaluate(p1, s) for s in strategies)
        assert values == pytest.approx([0.0, 0.6])

    def test_every_mode(self, p1):
        strategies = list(enumerate_policies(p1, max_switches=1))
        assert sorted({s.start_mode for s in strategies}) == [0, 1]
        assert len(strategies) == 4

    def test_switch_limit(self, make_problem):
        problem = make_problem(1, depth=2, branching=1, modes=2)
        # the two decision nodes lie on one path
        assert len(list(enumerate_policies(problem, 0, mode=0))) == 1
        assert len(list(enumerate_policies(problem, 1, mode=0))) == 3
        assert len(list(enumerate_policies(problem, 2, mode=0))) == 4

    def test_enumerated_are_admissible(self, make_problem):
        problem = make_problem(2, depth=2, branching=2, modes=3)
        for s in enumerate_policies(problem, problem.horizon_steps, mode=1):
            assert check_admissible(s, problem) == []

    def test_guard(self, make_problem, monkeypatch):
        problem = make_problem(0, depth=2, branching=2, modes=3)
        monkeypatch.setenv('SWITCH_POLICY_LIMIT', '26')
        with pytest.raises(EnumerationGuardError) as e:
            oracle_value(problem)
        assert e.value.count == 27
        assert e.value.limit == 26
        with pytest.raises(EnumerationGuardError):
            next(enumerate_policies(problem, 1))
        monkeypatch.setenv('SWITCH_POLICY_LIMIT', '27')
        oracle_value(problem)


class TestOracleValue:
    def test_p1(self, p1):
        assert oracle_value(p1, mode=0) == pytest.approx(0.6)
        assert oracle_value(p1, mode=1) == pytest.approx(1.0)

    def test_no_switches(self, p1):
        assert oracle_value(p1, mode=0, max_switches=0) == 0.0
        assert oracle_value(p1, mode=1, max_switches=0) == 1.0

    def test_leaf_start(self, p1):
        assert oracle_value(p1, node=1, mode=1) == 0.0

    def test_batches_and_progress(self, make_problem):
        problem = make_problem(4, depth=2, branching=2, modes=3)
        full = oracle_value(problem, mode=2)
        assert oracle_value(problem, mode=2, batch_size=5,
                            progress=True) == pytest.approx(full, abs=1e-12)

    def test_matches_enumeration(self, make_problem):
        problem = make_problem(5, depth=2, branching=2, modes=2)
        best = max(evaluate(problem, s)
                   for s in enumerate_policies(problem, 2, mode=0))
        assert oracle_value(problem, mode=0) == \
            pytest.approx(best, abs=1e-12)

    @pytest.mark.parametrize('seed,depth,branching,modes,costs',
                             small_instances)
    def test_matches_solver(self, make_problem, seed, depth, branching,
                            modes, costs):
        problem = make_problem(seed, depth, branching, modes, costs)
        Y = solve(problem)
        for i in range(modes):
            assert oracle_value(problem, mode=i) == \
                pytest.approx(Y.value(problem.tree.root, i), abs=ORACLE_TOL)
        child = int(problem.tree.children(problem.tree.root)[0])
        assert oracle_value(problem, node=child, mode=0) == \
            pytest.approx(Y.value(child, 0), abs=ORACLE_TOL)

    @pytest.mark.parametrize('costs', ['signed', 'non-negative',
                                       'martingale'])
    def test_limited_switches_match_recursion(self, make_problem, costs):
        for seed in range(10):
            problem = make_problem(seed, depth=3, branching=2, modes=3,
                                   costs=costs)
            for n in (0, 1, 2):
                Y = solve_n_switches(problem, n)
                for i in range(problem.m):
                    assert oracle_value(problem, mode=i, max_switches=n) == \
                        pytest.approx(Y.value(0, i), abs=ORACLE_TOL)


class TestMartingaleChecks:
    def test_p1(self, p1):
        Y = solve(p1)
        s = extract_strategy(p1, Y, start_mode=0)
        assert check_cumulative_cost_identity(p1, Y, s) <= ORACLE_TOL
        report = check_discrete_martingale_bounds(p1, Y, s)
        assert isinstance(report, MartingaleBoundReport)
        # deterministic tree: the martingales are constant
        assert np.all(report.xi == 0.0)
        assert report.holds
        assert report.to_dict()['holds'] is True

    def test_no_decisions(self, p1):
        Y = solve(p1)
        s = extract_strategy(p1, Y, start_mode=1)
        assert check_cumulative_cost_identity(p1, Y, s) == 0.0
        report = check_discrete_martingale_bounds(p1, Y, s)
        assert report.xi.shape == (0, 1)
        assert report.sum_sq == 0.0
        assert report.holds

    @pytest.mark.parametrize('seed,depth,branching,modes,costs',
                             small_instances)
    def test_identity_and_bounds(self, make_problem, seed, depth, branching,
                                 modes, costs):
        problem = make_problem(seed, depth, branching, modes, costs)
        Y = solve(problem)
        for i in range(modes):
            s = extract_strategy(problem, Y, start_mode=i)
            assert check_cumulative_cost_identity(problem, Y, s) <= \
                ORACLE_TOL
            report = check_discrete_martingale_bounds(problem, Y, s)
            assert report.centred
            assert report.sum_sq_holds
            assert report.sup_sq_holds
            assert np.allclose(report.Q + report.R, report.X ** 2)
