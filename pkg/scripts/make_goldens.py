#!/usr/bin/env python3
"""Regenerate the golden CLI outputs under tests/goldens/.

The goldens pin the on-disk serialization: tests re-run the CLI on the
committed fixture corpus and byte-compare against these files, so any
change to JSON layout, rounding, or schema shows up as a diff. Rerun
this script only when such a change is intentional, and commit the
result together with the code change.
"""

from __future__ import annotations

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from annotated_corpus import write_jsonl  # noqa: E402

from stylodiv.cli import main as cli_main  # noqa: E402


def main() -> None:
    golden_dir = REPO / "tests" / "goldens"
    golden_dir.mkdir(parents=True, exist_ok=True)
    corpus = golden_dir / "annotated.jsonl"
    write_jsonl(corpus)

    rc = cli_main(
        [
            "baseline", "--input", str(corpus),
            "--label", "annotated-fixture",
            "--out", str(golden_dir / "annotated-baseline.json"),
        ]
    )
    assert rc == 0, "baseline build failed"

    rc = cli_main(
        [
            "extract", "--input", str(corpus),
            "--out", str(golden_dir / "annotated-features.json"),
        ]
    )
    assert rc == 0, "extraction failed"

    for name in ("annotated.jsonl", "annotated-baseline.json", "annotated-features.json"):
        print(f"wrote {golden_dir / name}")


if __name__ == "__main__":
    main()
