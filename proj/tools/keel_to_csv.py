#!/usr/bin/env python3
"""Convert a KEEL .dat file into the CSV layout read by the moods loader.

The KEEL imbalanced collection (keel.es) redistributes UCI datasets as
binary problems.  Usage:

    keel_to_csv.py ecoli4.dat data/ecoli.csv --skip-first-row

--skip-first-row drops the first data record.  The published class counts
for the Ecoli, Yeast and Winequality benchmarks are one majority row short
of the KEEL files, consistent with the first record having been consumed as
a header.
"""
import argparse
import csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("src")
    ap.add_argument("dst")
    ap.add_argument("--skip-first-row", action="store_true")
    args = ap.parse_args()

    names, rows = [], []
    with open(args.src) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("@attribute"):
                names.append(line.split()[1])
            elif not line.startswith("@"):
                rows.append([c.strip() for c in line.split(",")])
    if args.skip_first_row:
        rows = rows[1:]
    names[-1] = "class"
    with open(args.dst, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(names)
        w.writerows(rows)


if __name__ == "__main__":
    main()
