"""The ten acceptance criteria at full size and their stated tolerances.

Each test prints one ``criterion N: PASS`` or ``criterion N: FAIL`` line.
"""

import pytest

from condent.verify import VerifyConfig, run_check

TITLES = {
    1: "maximally entangled states attain -log2 k",
    2: "every conditional entropy is at least H_min",
    3: "reduction criterion holds iff H_min >= 0",
    4: "additivity, monotonicity, embedding invariance, product reduction",
    5: "channel-class predicates",
    6: "classical and quantum conditional majorization agree",
    7: "extremal conversion channels",
    8: "spectral majorization agrees with the unital-channel SDP",
    9: "conditional majorization implies entropy monotonicity",
    10: "solver unit battery",
}


@pytest.mark.parametrize("number", sorted(TITLES))
def test_criterion(number, capsys):
    cases = run_check(number, seed=0, config=VerifyConfig())
    failed = [c for c in cases if not c.passed]
    verdict = "PASS" if not failed else "FAIL"
    with capsys.disabled():
        print(f"\ncriterion {number}: {verdict} ({len(cases) - len(failed)}/{len(cases)} cases) - {TITLES[number]}")
        for c in failed:
            print(f"    {c.id}: expected {c.expected!r}, got {c.actual!r} (tolerance {c.tolerance:g})")
    assert not failed, [c.id for c in failed]
