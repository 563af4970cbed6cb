"""Run the verification checks one group at a time and report timings.

    python3 scripts/run_verification.py --seed 0 [--quick] [--out report.json]
"""

import argparse
import json
import time

from condent.verify import CHECKS, VerifyConfig, run_check


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--only", type=int, nargs="*", help="check numbers to run")
    ap.add_argument("--out", help="write the full case list as JSON")
    args = ap.parse_args()
    cfg = VerifyConfig.quick() if args.quick else VerifyConfig()
    numbers = args.only or sorted(CHECKS)
    rows = []
    all_ok = True
    for n in numbers:
        start = time.perf_counter()
        cases = run_check(n, args.seed, cfg)
        secs = time.perf_counter() - start
        bad = [c for c in cases if not c.passed]
        all_ok &= not bad
        print(f"check {n:2d}: {'PASS' if not bad else 'FAIL'}  {len(cases) - len(bad)}/{len(cases)} cases  {secs:7.2f}s")
        for c in bad:
            print(f"   {c.id}: {c.description}; expected {c.expected!r}, got {c.actual!r}")
        rows.append({"check": n, "seconds": secs, "cases": [vars(c) for c in cases]})
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rows, fh, indent=2, default=str)
    return 0 if all_ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
