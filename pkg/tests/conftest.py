import gzip
import struct
from pathlib import Path

import numpy as np
import pytest

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def boston_csv():
    path = DATA_DIR / "boston_housing.csv"
    assert path.exists(), "bundled housing CSV missing"
    return path


@pytest.fixture(scope="session")
def mnist_paths():
    d = DATA_DIR / "mnist"
    paths = {
        "train_images": d / "train3000-images.idx3-ubyte.gz",
        "train_labels": d / "train3000-labels.idx1-ubyte.gz",
        "test_images": d / "t10k-images.idx3-ubyte.gz",
        "test_labels": d / "t10k-labels.idx1-ubyte.gz",
    }
    missing = [k for k, p in paths.items() if not p.exists()]
    if missing:
        pytest.skip(f"bundled MNIST files missing: {missing}")
    return paths


def write_idx_images(path, images, gzipped=False):
    """images: uint8 array (n, rows, cols)."""
    images = np.asarray(images, dtype=np.uint8)
    n, r, c = images.shape
    blob = struct.pack(">IIII", 0x803, n, r, c) + images.tobytes()
    opener = gzip.open if gzipped else open
    with opener(path, "wb") as f:
        f.write(blob)
    return path


def write_idx_labels(path, labels, gzipped=False, magic=0x801):
    labels = np.asarray(labels, dtype=np.uint8)
    blob = struct.pack(">II", magic, len(labels)) + labels.tobytes()
    opener = gzip.open if gzipped else open
    with opener(path, "wb") as f:
        f.write(blob)
    return path
