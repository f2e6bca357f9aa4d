"""The twelve acceptance criteria, one test each, one summary line each."""

import pytest

from qpcocycles import selftest


@pytest.mark.parametrize("number", [num for num, _, _ in selftest.CHECKS], ids=[name for _, name, _ in selftest.CHECKS])
def test_criterion(number, acceptance_log):
    res = selftest.run_check(number, seed=0)
    line = res.line()
    print(line)
    acceptance_log.append(line)
    assert res.passed, line
