#!/usr/bin/env python3
"""Run the full validation catalog and collect traces under out/validation.

Each scenario gets its own subdirectory with trace.csv and summary.txt; the
script exits nonzero if any scenario fails its built-in checks.  Useful for
regenerating all the CSV inputs the plotting tool consumes.
"""

import sys
from pathlib import Path

from cubli.cli import get_scenario, run_scenario, scenario_names


def main() -> int:
    base = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/validation")
    failed = []
    for name in scenario_names():
        out = base / name
        summary = run_scenario(get_scenario(name), out_dir=out)
        verdict = "PASS" if summary.passed else "FAIL"
        print(f"{verdict}  {name:<24} -> {out}")
        if not summary.passed:
            failed.append(name)
    if failed:
        print(f"failed scenarios: {', '.join(failed)}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
