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
Shared helpers: logger setup, environment-driven configuration, the
:py:class:`Violation` record returned by the checkers, and the exception
hierarchy used throughout the package.
"""
import logging as _logging
import os as _os
from typing import Optional, Sequence, Tuple

_logger = _logging.getLogger(__name__)
_logger.setLevel(_logging.INFO)

DEFAULT_POLICY_LIMIT = 2 ** 24


def setup_loggers(log_level):
    """
    Set logging level of all optSwitch loggers

    Parameters
    ----------
    log_level : int
        The level of logging, such as ``logging.DEBUG``
    """
    _logging.basicConfig(format='%(asctime)s %(name)s %(levelname)s: '
                                '%(message)s',
                         level=log_level)
    loggers = [_logging.getLogger(name) for name in
               _logging.root.manager.loggerDict if 'optSwitch' in name]
    for logger in loggers:
        logger.setLevel(log_level)


def _int_from_env(name: str, default: int, minimum: int) -> int:
    raw = _os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        value = int(raw)
        if value < minimum:
            raise ValueError(raw)
    except ValueError:
        _logger.warning(
            f'The environment variable value of {name} ({raw}) could not be '
            f'understood as an integer >= {minimum}, so using the default '
            f'of {default}.')
        value = default
    return value


def get_thread_count() -> int:
    """
    Read the worker cap for the solver's mode-parallel map from the
    ``SWITCH_THREADS`` environment variable.

    Returns
    -------
    int
        The number of worker threads to use; ``0`` means serial evaluation
        (the default, also used when the variable cannot be parsed)
    """
    return _int_from_env('SWITCH_THREADS', 0, 0)


def get_policy_limit() -> int:
    """
    Read the brute-force enumeration guard from the ``SWITCH_POLICY_LIMIT``
    environment variable (default ``2**24``).

    Returns
    -------
    int
        The largest number of realised strategies the oracle will enumerate
        for a single start mode
    """
    return _int_from_env('SWITCH_POLICY_LIMIT', DEFAULT_POLICY_LIMIT, 1)


def mode_label(mode: int) -> str:
    """Human-facing (1-based) label for a 0-based mode index"""
    return str(int(mode) + 1)


class Violation:
    """
    A single failed check, reported as data rather than raised.

    Parameters
    ----------
    rule : str
        Short name of the rule that failed (e.g. ``'prob-sum'``,
        ``'triangle'``)
    message : str
        Human-readable description
    node : int or None
        The tree node at which the rule failed, if it is node-specific
    modes : tuple of int
        The (0-based) mode coordinates involved, if any
    """
    def __init__(self, rule: str, message: str,
                 node: Optional[int] = None,
                 modes: Sequence[int] = ()):
        self.rule = rule
        self.message = message
        self.node = None if node is None else int(node)
        self.modes: Tuple[int, ...] = tuple(int(m) for m in modes)

    def __repr__(self):
        return (f'Violation(rule={self.rule!r}, node={self.node}, '
                f'modes={self.modes})')

    def __str__(self):
        where = []
        if self.node is not None:
            where.append(f'node {self.node}')
        if self.modes:
            where.append('modes (' +
                         ','.join(mode_label(m) for m in self.modes) + ')')
        prefix = f'[{self.rule}]'
        if where:
            prefix += ' at ' + ', '.join(where)
        return f'{prefix}: {self.message}'

    def __eq__(self, other):
        if not isinstance(other, Violation):
            return NotImplemented
        return (self.rule, self.node, self.modes) == \
            (other.rule, other.node, other.modes)

    def __hash__(self):
        return hash((self.rule, self.node, self.modes))

    def to_dict(self) -> dict:
        return {'rule': self.rule,
                'node': self.node,
                'modes': [int(m) + 1 for m in self.modes],
                'message': self.message}


class SwitchError(Exception):
    """Base class for the exceptions raised by optSwitch"""
    def __init__(self, message):
        super().__init__(message)
        self.message = message


class NoChildrenError(SwitchError):
    """Raised when a conditional expectation is requested at a leaf"""


class TimeRangeError(SwitchError):
    """Raised when a time index falls outside ``0..N``"""


class InvalidTreeError(SwitchError):
    """Raised when a structure is built on a tree that fails validation"""
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class ProblemError(SwitchError):
    """Raised for a malformed :py:class:`~optSwitch.switching.SwitchingProblem`"""


class NotSupermartingaleError(SwitchError):
    """Raised by the Doob decomposition when its input is not a
    supermartingale"""
    def __init__(self, message, node):
        super().__init__(message)
        self.node = node


class ConvergenceError(SwitchError):
    """Raised when the switching fixed point is not reached within the
    iteration bound"""
    def __init__(self, message, iterations):
        super().__init__(message)
        self.iterations = iterations


class InadmissibleStrategyError(SwitchError):
    """Raised when evaluating a strategy that is not admissible"""
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class EnumerationGuardError(SwitchError):
    """Raised when a brute-force enumeration would exceed the policy limit"""
    def __init__(self, message, count, limit):
        super().__init__(message)
        self.count = count
        self.limit = limit


class ProblemFileError(SwitchError):
    """Raised when a problem file cannot be parsed"""
