#!/usr/bin/env python3
"""Convert the CIFAR-10 test batch plus CIFAR-10H annotation counts into the
input files the `concest` CLI consumes.

Inputs
------
* CIFAR-10 python-version archive, specifically the ``test_batch`` pickle
  (from cifar-10-batches-py/). Pixels are uint8 in [0, 255]; they are
  normalized to [0, 1] float32 so that perturbation budgets like 8/255 are
  expressed on the usual scale.
* CIFAR-10H per-image annotation counts, ``cifar10h-counts.npy`` with shape
  (10000, 10) (one row per test image, one column per class). Counts are
  normalized per row to annotator frequencies, which serve as the soft-label
  distribution. A pre-normalized ``cifar10h-probs.npy`` also works; rows
  already summing to 1 pass through unchanged.

Outputs (in --out-dir)
----------------------
* points.cpts     canonical binary point file, 10000 x 3072 float32
* labels.csv      id,label rows using the CIFAR-10 test-set labels
* softlabels.csv  id,p0..p9 rows of annotator frequencies

Usage
-----
    python3 scripts/ingest_cifar10.py \
        --test-batch cifar-10-batches-py/test_batch \
        --counts cifar10h-counts.npy \
        --out-dir data/cifar10h

Then, for example:

    CONCEST_CIFAR_DIR=data/cifar10h pytest tests/test_acceptance.py
"""

import argparse
import os
import pickle
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from concest.dataset import (LabelSet, PointSet, SoftLabelSet, write_labels,
                             write_points, write_soft_labels)

NUM_IMAGES = 10_000
NUM_CLASSES = 10
IMAGE_DIM = 3072


def load_test_batch(path):
    with open(path, "rb") as f:
        batch = pickle.load(f, encoding="bytes")
    data = np.asarray(batch[b"data"], dtype=np.uint8)
    labels = np.asarray(batch[b"labels"], dtype=np.int64)
    if data.shape != (NUM_IMAGES, IMAGE_DIM):
        raise SystemExit(f"{path}: expected {NUM_IMAGES}x{IMAGE_DIM} pixel data, "
                         f"got {data.shape}")
    return data.astype(np.float32) / 255.0, labels


def load_counts(path):
    counts = np.load(path)
    if counts.shape != (NUM_IMAGES, NUM_CLASSES):
        raise SystemExit(f"{path}: expected shape ({NUM_IMAGES}, {NUM_CLASSES}), "
                         f"got {counts.shape}")
    counts = counts.astype(np.float64)
    totals = counts.sum(axis=1, keepdims=True)
    if np.any(totals <= 0):
        raise SystemExit(f"{path}: some rows have no annotations")
    return counts / totals


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--test-batch", required=True,
                    help="CIFAR-10 python-version test_batch pickle")
    ap.add_argument("--counts", required=True,
                    help="CIFAR-10H counts (or probabilities) .npy, 10000x10")
    ap.add_argument("--out-dir", required=True)
    args = ap.parse_args()

    pixels, labels = load_test_batch(args.test_batch)
    soft = load_counts(args.counts)
    ids = [str(i) for i in range(NUM_IMAGES)]

    os.makedirs(args.out_dir, exist_ok=True)
    write_points(os.path.join(args.out_dir, "points.cpts"), PointSet(pixels))
    write_labels(os.path.join(args.out_dir, "labels.csv"),
                 LabelSet(labels, NUM_CLASSES), ids)
    write_soft_labels(os.path.join(args.out_dir, "softlabels.csv"),
                      SoftLabelSet(soft), ids)
    print(f"wrote points.cpts, labels.csv, softlabels.csv to {args.out_dir}")


if __name__ == "__main__":
    main()
