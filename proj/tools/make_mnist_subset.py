#!/usr/bin/env python3
"""Build IDX files for the 5,000-digit MNIST subset bundled with mlxtend.

The subset (500 digits per class, taken from the original MNIST training
set) ships inside the mlxtend wheel as a CSV. This script pulls the wheel
with pip, converts the CSV into the standard IDX containers and gzips them
with a fixed mtime so the output is byte-reproducible.

Usage: tools/make_mnist_subset.py [output_dir]
"""
import csv
import glob
import gzip
import io
import os
import struct
import subprocess
import sys
import tempfile
import zipfile

CSV_MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def fetch_rows():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, "mlxtend==0.24.0"],
            check=True,
        )
        wheel = glob.glob(os.path.join(tmp, "mlxtend-*.whl"))[0]
        with zipfile.ZipFile(wheel) as zf:
            raw = gzip.decompress(zf.read(CSV_MEMBER)).decode("ascii")
    return [list(map(int, row)) for row in csv.reader(io.StringIO(raw)) if row]


def write_gz(path, payload):
    with open(path, "wb") as fh:
        with gzip.GzipFile(fileobj=fh, mode="wb", mtime=0, filename="") as gz:
            gz.write(payload)


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "data", "mnist-5k")
    os.makedirs(out, exist_ok=True)
    rows = fetch_rows()
    n = len(rows)
    pixels = bytearray()
    labels = bytearray()
    for row in rows:
        assert len(row) == 785
        pixels.extend(row[:784])
        labels.append(row[784])
    write_gz(os.path.join(out, "train-images-idx3-ubyte.gz"), struct.pack(">IIII", 2051, n, 28, 28) + bytes(pixels))
    write_gz(os.path.join(out, "train-labels-idx1-ubyte.gz"), struct.pack(">II", 2049, n) + bytes(labels))
    print(f"wrote {n} samples to {out}")


if __name__ == "__main__":
    main()
