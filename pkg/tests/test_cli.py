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
import csv
import json
import logging

import numpy as np
import pytest

from optSwitch import cli
from optSwitch.cli import main
from optSwitch.reports import PLOT_HEADER, _CustomEncoder


@pytest.fixture
def bad_json(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text('{"dt": 1.0, "modes": ', encoding='utf-8')
    return path


class TestSolve:
    def test_p1(self, golden, tmp_path, capsys):
        out = tmp_path / 'out'
        assert main(['solve', '--input', golden['P1'],
                     '--output', str(out)]) == cli.EXIT_OK
        assert {p.name for p in out.iterdir()} == \
            {'report.json', 'summary.txt', 'values.csv'}

        report = json.loads((out / 'report.json').read_text('utf-8'))
        assert report['modes'] == 2
        assert report['iterations'] == 2
        assert report['values']['1'][0] == pytest.approx(0.6)
        assert report['values']['2'][0] == pytest.approx(1.0)
        first = report['strategies'][0]
        assert first['start_mode'] == '1'
        assert first['J'] == pytest.approx(0.6)
        assert first['switches'] == {'1': [{'node': 0, 'time': 0,
                                            'to_mode': '2'}]}
        assert report['strategies'][1]['max_switches'] == 0

        stdout = capsys.readouterr().out
        assert 'solve report' in stdout
        assert stdout == (out / 'summary.txt').read_text('utf-8')

    def test_outputs_are_reproducible(self, make_problem, tmp_path):
        from optSwitch.problem_file import dump_problem
        problem_path = tmp_path / 'problem.json'
        dump_problem(make_problem(5, depth=3, branching=2, modes=3),
                     problem_path)
        for name in ('a', 'b'):
            assert main(['solve', '--input', str(problem_path),
                         '--output', str(tmp_path / name)]) == cli.EXIT_OK
        for f in ('report.json', 'summary.txt', 'values.csv'):
            assert (tmp_path / 'a' / f).read_bytes() == \
                (tmp_path / 'b' / f).read_bytes()

    def test_plot_csv(self, golden, tmp_path):
        out = tmp_path / 'out'
        main(['solve', '--input', golden['P1'], '--output', str(out)])
        with open(out / 'values.csv', newline='') as f:
            rows = list(csv.reader(f))
        assert tuple(rows[0]) == PLOT_HEADER
        assert len(rows) == 5
        assert rows[1][:2] == ['0', '1']
        assert float(rows[1][2]) == pytest.approx(0.6)
        assert rows[3] == ['1', '1', '0.0', '0.0', '0.0']

    def test_malformed_file(self, bad_json, capsys):
        assert main(['solve', '--input', str(bad_json)]) == cli.EXIT_PARSE
        assert 'not valid JSON' in capsys.readouterr().err

    @pytest.mark.parametrize('field,key,value', [
        ('psi', '1', [[0.0], [0.0]]),
        ('gamma', '2,1', [[0.4], [0.4]]),
    ])
    @pytest.mark.parametrize('command', ['solve', 'validate'])
    def test_nested_array(self, golden, tmp_path, capsys, field, key, value,
                          command):
        with open(golden['P1'], encoding='utf-8') as f:
            doc = json.load(f)
        doc[field][key] = value
        path = tmp_path / 'nested.json'
        path.write_text(json.dumps(doc), encoding='utf-8')
        assert main([command, '--input', str(path)]) == cli.EXIT_PARSE
        assert f'{field}[{key}] must be an array of 2 numbers' in \
            capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(['solve', '--input', str(tmp_path / 'none.json')]) == \
            cli.EXIT_PARSE

    def test_arbitrage(self, golden, capsys):
        assert main(['solve', '--input', golden['ARBITRAGE']]) == \
            cli.EXIT_ASSUMPTION
        assert '[triangle]' in capsys.readouterr().out

    def test_verbose_logging(self, golden, caplog):
        caplog.set_level(logging.INFO)
        assert main(['solve', '--input', golden['P1'], '-v']) == cli.EXIT_OK
        assert 'Converged after 2 sweep(s)' in caplog.text


class TestValidate:
    def test_p1(self, golden, capsys):
        assert main(['validate', '--input', golden['P1']]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert 'No-arbitrage conditions: OK' in out
        assert 'Hypothesis (M): case "two-mode Doob-Meyer"' in out
        assert 'Martingale family: OK' in out

    def test_non_negative(self, golden, capsys):
        assert main(['validate', '--input', golden['NON_NEGATIVE']]) == \
            cli.EXIT_OK
        assert 'case "non-negative"' in capsys.readouterr().out

    def test_terminal_violation(self, golden, capsys):
        assert main(['validate', '--input',
                     golden['TERMINAL_VIOLATION']]) == cli.EXIT_VIOLATIONS
        out = capsys.readouterr().out
        assert 'No-arbitrage conditions: 1 violation(s)' in out
        assert '[terminal] at node 1, modes (1,2)' in out

    def test_malformed_file(self, bad_json):
        assert main(['validate', '--input', str(bad_json)]) == \
            cli.EXIT_PARSE


class TestOracle:
    def test_p1(self, golden, capsys):
        assert main(['oracle', '--input', golden['P1']]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert 'against solve' in out
        assert 'max gap: ' in out

    def test_generated(self, make_problem, tmp_path):
        from optSwitch.problem_file import dump_problem
        path = tmp_path / 'problem.json'
        dump_problem(make_problem(11, depth=2, branching=2, modes=3), path)
        assert main(['oracle', '--input', str(path),
                     '--progress']) == cli.EXIT_OK

    def test_guard(self, golden, monkeypatch, capsys):
        monkeypatch.setenv('SWITCH_POLICY_LIMIT', '1')
        assert main(['oracle', '--input', golden['P1']]) == cli.EXIT_GUARD
        assert 'exceed the enumeration limit of 1' in capsys.readouterr().err

    def test_limited_switches(self, golden, capsys):
        assert main(['oracle', '--input', golden['P1'],
                     '--max-switches', '0']) == cli.EXIT_OK
        assert 'solve_n_switches(0)' in capsys.readouterr().out

    def test_negative_limit(self, golden):
        assert main(['oracle', '--input', golden['P1'],
                     '--max-switches', '-1']) == cli.EXIT_PARSE


class TestGen:
    def _gen(self, path, seed=3, depth=2, costs='signed'):
        return main(['gen', '--seed', str(seed), '--depth', str(depth),
                     '--branching', '2', '--modes', '2', '--costs', costs,
                     '--output', str(path)])

    def test_deterministic(self, tmp_path):
        assert self._gen(tmp_path / 'a.json') == cli.EXIT_OK
        assert self._gen(tmp_path / 'b.json') == cli.EXIT_OK
        assert (tmp_path / 'a.json').read_bytes() == \
            (tmp_path / 'b.json').read_bytes()

    @pytest.mark.parametrize('costs', ['signed', 'non-negative',
                                       'martingale'])
    def test_generated_problem_validates(self, tmp_path, costs):
        path = tmp_path / 'problem.json'
        assert self._gen(path, costs=costs) == cli.EXIT_OK
        assert main(['validate', '--input', str(path)]) == cli.EXIT_OK

    def test_oversized(self, tmp_path):
        path = tmp_path / 'big.json'
        assert self._gen(path, depth=20) == cli.EXIT_PARSE
        assert not path.exists()

    def test_bad_modes(self, tmp_path):
        assert main(['gen', '--seed', '1', '--depth', '1', '--branching',
                     '2', '--modes', '1', '--output',
                     str(tmp_path / 'p.json')]) == cli.EXIT_PARSE


class TestParser:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(['--version'])
        assert e.value.code == 0
        assert capsys.readouterr().out.startswith('optSwitch (version ')

    def test_requires_command(self):
        with pytest.raises(SystemExit) as e:
            main([])
        assert e.value.code == 2

    def test_verbosity(self):
        args = cli.build_parser().parse_args(['validate', '--input', 'x',
                                              '-vv'])
        assert cli.LOGGING_LEVELS[args.verbose] == logging.DEBUG


class TestCustomEncoder:
    def test_numpy_values(self):
        doc = {'a': np.int64(3), 'b': np.float64(0.5), 'c': np.bool_(True),
               'd': np.arange(3)}
        assert json.loads(json.dumps(doc, cls=_CustomEncoder)) == \
            {'a': 3, 'b': 0.5, 'c': True, 'd': [0, 1, 2]}

    def test_unknown_type(self):
        with pytest.raises(TypeError):
            json.dumps({'a': object()}, cls=_CustomEncoder)
