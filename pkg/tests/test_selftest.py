import pytest

from matchcast.core.selftest import CHECKS, run_selftest

FAST = ["worked-example", "scoring-golden", "propriety", "conjugacy", "leakage", "bivariate-poisson"]


def test_fast_checks_pass():
    results = run_selftest(2014, FAST)
    assert [r.name for r in results] == FAST
    failed = [f"{r.name}: {r.detail}" for r in results if not r.passed]
    assert not failed


def test_unknown_check():
    with pytest.raises(ValueError):
        run_selftest(1, ["nope"])


def test_streams_do_not_depend_on_selection():
    alone = run_selftest(5, ["leakage"])[0]
    together = run_selftest(5, ["worked-example", "leakage"])[1]
    assert alone.detail == together.detail


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(set(CHECKS) - set(FAST)))
def test_slow_checks_pass(name):
    [result] = run_selftest(2014, [name])
    assert result.passed, result.detail
