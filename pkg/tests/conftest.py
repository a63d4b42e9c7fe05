import gzip
import os
from pathlib import Path

import pytest

import advguard as ag

MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def mnist_dir():
    default = Path(__file__).resolve().parent.parent / "data" / "mnist"
    return Path(os.environ.get("ADVGUARD_MNIST_DIR", default))


def _read_maybe_gz(base):
    if base.is_file():
        return base.read_bytes()
    gz = base.with_name(base.name + ".gz")
    if gz.is_file():
        return gzip.decompress(gz.read_bytes())
    return None


@pytest.fixture(scope="session")
def mnist_dataset():
    """The official MNIST IDX files, or None when they are not on disk.

    Tests that need the data call require_mnist() so the skip message is
    emitted from inside the test itself.
    """
    d = mnist_dir()
    blobs = {key: _read_maybe_gz(d / name) for key, name in MNIST_FILES.items()}
    if any(v is None for v in blobs.values()):
        return None
    return {
        "train_images": ag.read_idx_images(blobs["train_images"]),
        "train_labels": ag.read_idx_labels(blobs["train_labels"]),
        "test_images": ag.read_idx_images(blobs["test_images"]),
        "test_labels": ag.read_idx_labels(blobs["test_labels"]),
    }


def require_mnist(dataset):
    if dataset is None:
        pytest.skip(
            f"MNIST IDX files not found under {mnist_dir()} (this sandbox has "
            "no network access; place the four official files there, "
            "optionally gzipped, to enable the MNIST criteria)"
        )
    return dataset
