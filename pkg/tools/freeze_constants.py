"""Regenerate src/ptfdl/constants.txt by running the amplifier sweep per bucket.

Usage: python tools/freeze_constants.py [n_max]
"""

import sys
from fractions import Fraction
from pathlib import Path

from ptfdl.amplifier import build_amplifier, tune_amplifier, write_constants

OUT = Path(__file__).resolve().parents[1] / "src" / "ptfdl" / "constants.txt"


def main() -> None:
    n_max = int(sys.argv[1]) if len(sys.argv) > 1 else 64
    table, extra = {}, {}
    for eps in (Fraction(1, 100), Fraction(1, 200)):
        for n in range(3, n_max + 1):
            p = tune_amplifier(n, 2, eps)
            amp = build_amplifier(p)
            key = (n, 2, eps)
            table[key] = p
            extra[key] = {"degree": amp.degree, "worst_ratio": f"{float(amp.validation.worst_ratio()):.4f}"}
            print(n, eps, p.as_dict(), amp.degree, flush=True)
    OUT.write_text(write_constants(table, extra))


if __name__ == "__main__":
    main()
