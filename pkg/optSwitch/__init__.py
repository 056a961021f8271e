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
"""Exact optimal multiple switching on finite scenario trees.

This package solves finite-horizon optimal switching problems with signed
switching costs. The filtration is modelled by a finite scenario tree, the
value processes are obtained as a system of interconnected Snell envelopes,
and optimal strategies are read off from the solved values. Validators for
the no-arbitrage assumptions on the costs and for the martingale hypothesis
used to bound cumulative costs are included, as well as a brute-force oracle
that enumerates every adapted strategy on small trees.

Example
-------
Most uses go through the command line front end in
:py:mod:`~optSwitch.cli`:

.. code-block:: bash

    $ python -m optSwitch.cli gen --seed 1 --depth 3 --branching 2 \\
        --modes 2 --output problem.json
    $ python -m optSwitch.cli validate --input problem.json
    $ python -m optSwitch.cli solve --input problem.json --output results/

**Configuration variables**

The following variables can be defined as environment variables in your
session, or in the ``.env`` file in the root of this package's repository.

.. _switch-threads:

`SWITCH_THREADS`
    The maximum number of worker threads used to compute the per-mode Snell
    envelopes of one solver iteration concurrently. ``0`` (the default)
    computes them serially. Values that cannot be understood as a
    non-negative integer are ignored with a warning.

.. _switch-policy-limit:

`SWITCH_POLICY_LIMIT`
    The largest number of realised strategies (per start mode) that the
    brute-force oracle in :py:mod:`~optSwitch.oracle` is allowed to
    enumerate before refusing with an
    :py:class:`~optSwitch.utils.EnumerationGuardError`. Defaults to
    ``2**24``.
"""

import logging as _logging

from dotenv import load_dotenv

# load environment variables from a .env file if present
load_dotenv()

# set log message format
_logging.basicConfig(format='%(asctime)s %(name)s %(levelname)s: %(message)s')
