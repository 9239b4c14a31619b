#!/usr/bin/env python3
"""Time a cyclic family over a (tasks x precision) grid and print the CSV.

Example:

    python3 scripts/bench_grid.py cyclic5 --tasks 1,8 --precision d,dd \
        --csv /tmp/cyclic5.csv

The absolute numbers are machine-specific; the interesting content is the
shape of the grid and the overhead-factor row (single-task times relative
to plain double precision).
"""

import sys

from polycont.cli import cli_main


def main() -> None:
    sys.exit(cli_main(["bench", *sys.argv[1:]]))


if __name__ == "__main__":
    main()
