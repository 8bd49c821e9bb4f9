#!/usr/bin/env python3
"""Regenerate the synthetic PT embeddings used by the test fixtures.

Terms that share a reference cluster are drawn around a common random
center; unclustered terms get independent directions. Output is written both
as CSV and as the SHEM binary format, with float32 values so the two files
load to identical stores.
"""
import argparse
import csv
import struct

import numpy as np


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reference", default="tests/data/table1_reference.csv")
    ap.add_argument("--out-csv", default="tests/data/table1_embeddings.csv")
    ap.add_argument("--out-bin", default="tests/data/table1_embeddings.shem")
    ap.add_argument("--dim", type=int, default=32)
    ap.add_argument("--noise", type=float, default=0.45)
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()

    ref = list(csv.DictReader(open(args.reference, encoding="utf-8")))
    rng = np.random.default_rng(args.seed)
    clusters = sorted(set(r["cluster"] for r in ref))
    centers = {c: rng.normal(size=args.dim) for c in clusters}

    vecs = []
    for r in ref:
        c = r["cluster"]
        if c == "None":
            v = rng.normal(size=args.dim)
        else:
            v = centers[c] + args.noise * rng.normal(size=args.dim)
        vecs.append((v / np.linalg.norm(v)).astype(np.float32))

    with open(args.out_csv, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        for r, v in zip(ref, vecs):
            w.writerow([r["pt"]] + [str(x) for x in v])

    with open(args.out_bin, "wb") as f:
        f.write(b"SHEM")
        f.write(struct.pack("<II", len(vecs), args.dim))
        for r, v in zip(ref, vecs):
            name = r["pt"].encode("utf-8")
            f.write(struct.pack("<H", len(name)))
            f.write(name)
            f.write(v.astype("<f4").tobytes())


if __name__ == "__main__":
    main()
