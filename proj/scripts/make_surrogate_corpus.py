#!/usr/bin/env python3
"""Build a Tiny-Shakespeare-shaped surrogate corpus from public-domain plays.

Used when the real input.txt cannot be fetched. Reads the Gutenberg play texts
shipped in the `shakespeare` PyPI sdist, rewrites speaker headings as
"NAME:" lines, restricts the alphabet to the 65 characters of Tiny
Shakespeare and truncates to the same character count.

    pip download --no-deps shakespeare==0.6 && tar xzf shakespeare-0.6.tar.gz
    python3 scripts/make_surrogate_corpus.py shakespeare-0.6/shksprdata/texts data/shakespeare_surrogate.txt
"""
import pathlib
import re
import sys

ALPHABET = set("\n !$&',-.3:;?ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz")
TARGET_CHARS = 1_115_394
PLAYS = [
    "coriolanus", "richard_iii", "romeo_and_juliet", "richard_ii", "henry_vi_part_3",
    "winters_tale", "measure_for_measure", "taming_of_the_shrew", "tempest",
    "henry_vi_part_2", "julius_caesar", "hamlet", "macbeth", "lear", "othello",
]
SPEAKER = re.compile(r"^([A-Z][A-Z' ]+[A-Z])\.\s*$")


def convert(text):
    out, started = [], False
    for raw in text.splitlines():
        line = raw.rstrip()
        m = SPEAKER.match(line)
        if m:
            started = True
            if out and out[-1] != "":
                out.append("")
            out.append(m.group(1) + ":")
            continue
        if not started or line.startswith(("[", "ACT ", "SCENE ", "Enter ", "Exit", "Re-enter")):
            continue
        if not line:
            continue
        line = line.replace("--", " - ").replace("_", "")
        line = "".join(c for c in line if c in ALPHABET).strip()
        line = re.sub(r" {2,}", " ", line)
        if line:
            out.append(line)
    return "\n".join(out) + "\n\n"


def main():
    src, dst = pathlib.Path(sys.argv[1]), pathlib.Path(sys.argv[2])
    body = "".join(convert((src / f"{p}_gut.txt").read_text(encoding="utf-8", errors="ignore")) for p in PLAYS)
    body = body[:TARGET_CHARS]
    # Guarantee the full 65-character alphabet is present.
    missing = sorted(ALPHABET - set(body))
    if missing:
        body = body[: TARGET_CHARS - len(missing) - 1] + "".join(missing) + "\n"
    dst.write_text(body, encoding="ascii")
    print(f"{len(body)} chars, vocab {len(set(body))}")


if __name__ == "__main__":
    main()
