#!/usr/bin/env python3
"""Convert downloaded raw files into the edge-list format under data/external/.

  prepare_datasets.py yamanishi gpcr  bind_orfhsa_drug_gpcr.txt
  prepare_datasets.py admat     gpcr  gpcr_admat_dgc.txt
  prepare_datasets.py ml100k    ml100k ml-100k/u.data
  prepare_datasets.py ml1m      ml1m   ml-1m/ratings.dat
"""

import argparse
import sys
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "data" / "external"


def pairs_from_interaction_list(path):
    # "<target> <drug>" per line; targets are the Left side.
    for line in Path(path).read_text().splitlines():
        fields = line.split()
        if len(fields) >= 2:
            yield fields[0], fields[1]


def pairs_from_admat(path):
    # First row holds drug ids, first column target ids, cells are 0/1.
    rows = [l.split() for l in Path(path).read_text().splitlines() if l.strip()]
    drugs = rows[0]
    for row in rows[1:]:
        target, cells = row[0], row[1:]
        if len(cells) != len(drugs):
            sys.exit(f"{path}: row {target} has {len(cells)} cells, expected {len(drugs)}")
        for drug, cell in zip(drugs, cells):
            if cell == "1":
                yield target, drug


def pairs_from_movielens(path, sep):
    for line in Path(path).read_text(encoding="latin-1").splitlines():
        fields = line.split(sep)
        if len(fields) >= 2:
            yield "u" + fields[0], "m" + fields[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("format", choices=["yamanishi", "admat", "ml100k", "ml1m"])
    ap.add_argument("id", help="dataset id; output goes to data/external/<id>.txt")
    ap.add_argument("source")
    args = ap.parse_args()

    if args.format == "yamanishi":
        pairs = pairs_from_interaction_list(args.source)
    elif args.format == "admat":
        pairs = pairs_from_admat(args.source)
    else:
        pairs = pairs_from_movielens(args.source, "\t" if args.format == "ml100k" else "::")

    seen = set()
    for p in pairs:
        seen.add(p)
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    out = OUT_DIR / f"{args.id}.txt"
    with out.open("w") as f:
        f.write(f"# converted from {Path(args.source).name}\n")
        for left, right in sorted(seen):
            f.write(f"{left} {right}\n")
    lefts = {l for l, _ in seen}
    rights = {r for _, r in seen}
    print(f"{out}: {len(lefts) + len(rights)} nodes, {len(seen)} edges")


if __name__ == "__main__":
    main()
