"""Acceptance criteria, one test each.

Every criterion prints a PASS/FAIL line with its tolerance check and its
time budget; the lines are repeated in the pytest terminal summary.
"""

import pytest

from fock_oplab.acceptance import CRITERIA

RESULT_LINES = []


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    res = CRITERIA[number](0)
    line = res.line()
    print(line)
    RESULT_LINES.append(line)
    assert res.passed, line
    assert res.in_time, f"over time budget: {line}"
