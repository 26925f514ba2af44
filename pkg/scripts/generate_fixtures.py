#!/usr/bin/env python3
"""Regenerate the committed fixture PNGs and specs.json.

Run from the repo root:

    python3 scripts/generate_fixtures.py [fixtures-dir]

Generation is fully deterministic; reruns must be byte-identical to the
committed files (tests/test_fixtures.py enforces this).
"""

import sys
from pathlib import Path

from camoeval.fixtures import write_fixture_set


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures"
    for path in write_fixture_set(out):
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
