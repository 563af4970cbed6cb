from dataclasses import replace

import pytest

from condent.verify import CHECKS, VerifyConfig, run_check, run_verification_suite, solver_examples

FAST = replace(VerifyConfig.quick(), n_classical=1, n_engineered=1, n_majorize=6, n_cross=2, n_monotone=2)


def test_report_is_deterministic():
    a = run_verification_suite(3, config=FAST)
    b = run_verification_suite(3, config=FAST)
    assert a.to_dict() == b.to_dict()


@pytest.mark.parametrize("seed", range(10))
def test_seed_variation_passes(seed):
    rep = run_verification_suite(seed, config=FAST)
    failed = [c for c in rep.cases if not c.passed]
    assert not failed, failed


def test_sizes_override():
    cases = run_check(1, 0, replace(FAST, ks=(5,)))
    hmin_case = next(c for c in cases if c.id == "1.k5.hmin")
    assert hmin_case.expected == pytest.approx(-2.321928, abs=1e-6)
    assert hmin_case.passed


def test_every_criterion_has_a_check():
    assert sorted(CHECKS) == list(range(1, 11))
    assert set(solver_examples()) == {"solve.psd_boundary", "solve.hmin_up_phi2", "solve.shifted_trace"}


def test_summary_counts():
    rep = run_verification_suite(0, sizes=[2], config=FAST)
    s = rep.summary
    assert s["total"] == len(rep.cases) == s["passed"] + s["failed"]
    assert rep.passed == (s["failed"] == 0)
