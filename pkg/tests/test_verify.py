import time

import pytest

from extprob.verify import CHECKS, run_suite


def test_suite_passes_quickly():
    t0 = time.perf_counter()
    report = run_suite()
    elapsed = time.perf_counter() - t0
    assert report["all_ok"]
    assert [c["identity"] for c in report["checks"]] == list(CHECKS)
    assert all(c["max_residual"] <= 1e-10 for c in report["checks"])
    assert elapsed < 1.0


@pytest.mark.parametrize("fault", CHECKS)
def test_each_fault_fails_only_its_check(fault):
    report = run_suite(fault=fault)
    failed = [c["identity"] for c in report["checks"] if not c["ok"]]
    assert failed == [fault]


def test_unachievable_tolerance_fails():
    assert not run_suite(tol=1e-30)["all_ok"]


def test_seed_changes_samples_not_verdict():
    a, b = run_suite(seed=1), run_suite(seed=2)
    assert a["all_ok"] and b["all_ok"]
    assert a != b
