"""The twelve acceptance criteria, one test each, at their stated limits."""

import pytest

from qsslab.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"{c[0]:02d}-{c[1]}" for c in CRITERIA])
def test_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.elapsed <= result.limit, result.line()
    assert result.passed, result.line()
