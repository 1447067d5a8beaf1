#!/usr/bin/env python3
"""Regenerate the shipped synthetic corpora and prompt files.

Everything is seeded, so rerunning this script reproduces the checked-in
files byte for byte. Corpus files hold one document per line; prompt files
hold one prompt per line, sampled as contiguous windows from the matching
corpus.
"""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from speclab.corpora import (  # noqa: E402
    high_entropy_corpus,
    iid_difficulty_corpus,
    mixed_corpus,
    periodic_corpus,
    sample_prompts,
)

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "workloads", "data")


def write_lines(name: str, lines: list[str]) -> None:
    path = os.path.join(DATA_DIR, name)
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")
    print(f"{name}: {len(lines)} lines, {sum(len(l) for l in lines)} chars")


def main() -> None:
    os.makedirs(DATA_DIR, exist_ok=True)

    periodic = periodic_corpus()
    write_lines("periodic.txt", periodic)
    write_lines("periodic_prompts.txt", sample_prompts(periodic, 20, length=12, seed=1))

    high_entropy = high_entropy_corpus()
    write_lines("high_entropy.txt", high_entropy)
    write_lines("high_entropy_prompts.txt", sample_prompts(high_entropy, 20, length=12, seed=2))

    mixed = mixed_corpus()
    write_lines("mixed.txt", mixed)
    write_lines("mixed_prompts.txt", sample_prompts(mixed, 40, length=12, seed=3))

    iid = iid_difficulty_corpus()
    write_lines("iid.txt", iid)
    write_lines(
        "iid_prompts.txt",
        sample_prompts(iid[:1], 40, length=12, seed=7, max_start=len(iid[0]) - 20),
    )


if __name__ == "__main__":
    main()
