"""Feed-forward softmax classifier with exact input gradients, plus adapters.

The built-in model is a single hidden rectified-linear layer trained by
mini-batch gradient descent on cross-entropy; training is bitwise
deterministic for a fixed seed. An external-command adapter lets any
off-the-shelf classifier plug into detection unchanged: it must print one
whitespace-separated confidence per class for the image path it is given.
"""

import shlex
import struct
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .image import FloatImage, Image, to_float, write_pgm_ppm

MODEL_MAGIC = b"ADVG"
MODEL_VERSION = 1


class ExternalClassifierError(RuntimeError):
    """The external classifier command failed or produced invalid output."""


class PredictionVector:
    """Per-class confidences; the label is the argmax, lowest index on ties."""

    __slots__ = ("confidences",)

    def __init__(self, confidences, tol=1e-6):
        arr = np.asarray(confidences, dtype=np.float64).ravel()
        if arr.size == 0:
            raise ValueError("prediction vector is empty")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("confidences must be finite and nonnegative")
        total = float(arr.sum())
        if abs(total - 1.0) > tol:
            raise ValueError(f"confidences sum to {total:.6f}, expected 1 within {tol}")
        self.confidences = arr

    def label(self):
        return int(np.argmax(self.confidences))

    def __len__(self):
        return self.confidences.size

    def __repr__(self):
        return f"PredictionVector(label={self.label()}, n={len(self)})"


@dataclass(eq=False)
class ClassifierModel:
    """Weights of the input->hidden (relu) ->output (softmax) network."""

    w1: np.ndarray  # (d, h)
    b1: np.ndarray  # (h,)
    w2: np.ndarray  # (h, n)
    b2: np.ndarray  # (n,)

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            setattr(self, name, arr)

    @property
    def input_size(self):
        return self.w1.shape[0]

    @property
    def hidden_size(self):
        return self.w1.shape[1]

    @property
    def n_classes(self):
        return self.w2.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    batch_size: int = 32
    learning_rate: float = 0.1
    seed: int = 42
    init_range: float = 0.05

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be positive")
        if self.learning_rate <= 0 or self.init_range <= 0:
            raise ValueError("learning rate and init range must be positive")


def _flatten_input(x):
    if isinstance(x, Image):
        x = to_float(x)  # byte-domain inputs always enter the net as [0, 1]
    if isinstance(x, FloatImage):
        return x.pixels.ravel()
    return np.asarray(x, dtype=np.float64).ravel()


def _softmax(z):
    e = np.exp(z - z.max())
    return e / e.sum()


def _softmax_rows(z):
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def forward(model, x):
    """Run the network on a flattened input; returns a PredictionVector."""
    v = _flatten_input(x)
    if v.size != model.input_size:
        raise ValueError(f"dimension mismatch: input has {v.size} values, model expects {model.input_size}")
    a1 = np.maximum(v @ model.w1 + model.b1, 0.0)
    return PredictionVector(_softmax(a1 @ model.w2 + model.b2))


def loss(model, x, c):
    """Cross-entropy of the prediction against class c, clamped above log 0."""
    if not 0 <= c < model.n_classes:
        raise ValueError(f"class index {c} out of range 0..{model.n_classes - 1}")
    p = forward(model, x).confidences[c]
    return float(-np.log(max(p, 1e-300)))


def _backprop(model, v, c):
    z1 = v @ model.w1 + model.b1
    a1 = np.maximum(z1, 0.0)
    p = _softmax(a1 @ model.w2 + model.b2)
    dz2 = p.copy()
    dz2[c] -= 1.0
    dw2 = np.outer(a1, dz2)
    da1 = model.w2 @ dz2
    dz1 = da1 * (z1 > 0.0)
    dw1 = np.outer(v, dz1)
    dx = model.w1 @ dz1
    return dw1, dz1, dw2, dz2, dx


def input_gradient(model, x, c):
    """Exact gradient of the loss with respect to each input pixel.

    The result has the shape of the input (image shape for FloatImage
    inputs, flat otherwise).
    """
    if not 0 <= c < model.n_classes:
        raise ValueError(f"class index {c} out of range 0..{model.n_classes - 1}")
    v = _flatten_input(x)
    if v.size != model.input_size:
        raise ValueError(f"dimension mismatch: input has {v.size} values, model expects {model.input_size}")
    dx = _backprop(model, v, c)[4]
    if isinstance(x, (FloatImage, Image)):
        return dx.reshape(x.pixels.shape)
    return dx


def parameter_gradients(model, x, c):
    """Gradients of the loss with respect to (w1, b1, w2, b2)."""
    if not 0 <= c < model.n_classes:
        raise ValueError(f"class index {c} out of range 0..{model.n_classes - 1}")
    v = _flatten_input(x)
    dw1, db1, dw2, db2, _ = _backprop(model, v, c)
    return dw1, db1, dw2, db2


def _as_matrix(images):
    """Stack Images/FloatImages/arrays into an (n, d) float64 matrix."""
    if isinstance(images, np.ndarray) and images.ndim == 2:
        return np.asarray(images, dtype=np.float64)
    rows = [_flatten_input(im) for im in images]
    if not rows:
        return np.empty((0, 0))
    return np.stack(rows)


def train(images, labels, config=None, hidden=128, classes=10):
    """Train the network by mini-batch gradient descent on cross-entropy.

    Images may be Images (converted to [0, 1]), FloatImages, or an (n, d)
    array. The run is a pure function of data and config.seed: weights are
    initialized uniformly in [-init_range, init_range] and every epoch's
    shuffle comes from the same seeded generator, so identical inputs give
    bitwise-identical models.
    """
    if config is None:
        config = TrainConfig()
    X = _as_matrix(images)
    y = np.asarray(labels, dtype=np.int64)
    n = X.shape[0]
    if n == 0:
        raise ValueError("empty dataset")
    if y.shape != (n,):
        raise ValueError("images and labels are not aligned")
    if y.min() < 0 or y.max() >= classes:
        raise ValueError(f"label out of range 0..{classes - 1}")

    rng = np.random.default_rng(config.seed)
    r = config.init_range
    d = X.shape[1]
    w1 = rng.uniform(-r, r, size=(d, hidden))
    b1 = np.zeros(hidden)
    w2 = rng.uniform(-r, r, size=(hidden, classes))
    b2 = np.zeros(classes)
    onehot = np.eye(classes)

    lr = config.learning_rate
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            Xb, Yb = X[batch], onehot[y[batch]]
            z1 = Xb @ w1 + b1
            a1 = np.maximum(z1, 0.0)
            p = _softmax_rows(a1 @ w2 + b2)
            g2 = (p - Yb) / len(batch)
            g1 = (g2 @ w2.T) * (z1 > 0.0)
            w2 -= lr * (a1.T @ g2)
            b2 -= lr * g2.sum(axis=0)
            w1 -= lr * (Xb.T @ g1)
            b1 -= lr * g1.sum(axis=0)
    return ClassifierModel(w1, b1, w2, b2)


def accuracy(model, images, labels):
    """Fraction of images whose predicted label matches."""
    X = _as_matrix(images)
    z1 = np.maximum(X @ model.w1 + model.b1, 0.0)
    pred = np.argmax(z1 @ model.w2 + model.b2, axis=1)
    return float(np.mean(pred == np.asarray(labels)))


def save_model(model, path):
    """Write the model file: magic, version, layer sizes, float64 parameters.

    Little-endian throughout; parameters in row-major w1, b1, w2, b2 order.
    """
    d, h, n = model.input_size, model.hidden_size, model.n_classes
    blob = MODEL_MAGIC + struct.pack("<IIII", MODEL_VERSION, d, h, n)
    for arr in (model.w1, model.b1, model.w2, model.b2):
        blob += np.ascontiguousarray(arr, dtype="<f8").tobytes()
    Path(path).write_bytes(blob)


def load_model(path):
    """Read a model file written by save_model; exact round-trip."""
    data = Path(path).read_bytes()
    if len(data) < 20 or data[:4] != MODEL_MAGIC:
        raise ValueError("not a model file (bad magic)")
    version, d, h, n = struct.unpack("<IIII", data[4:20])
    if version != MODEL_VERSION:
        raise ValueError(f"unsupported model format version {version}")
    counts = (d * h, h, h * n, n)
    if len(data) - 20 != 8 * sum(counts):
        raise ValueError("model file length mismatch")
    flat = np.frombuffer(data, dtype="<f8", offset=20)
    parts, pos = [], 0
    for cnt in counts:
        parts.append(flat[pos:pos + cnt].copy())
        pos += cnt
    return ClassifierModel(parts[0].reshape(d, h), parts[1], parts[2].reshape(h, n), parts[3])


def external_classify(command, image_path):
    """Run `command <image_path>` and parse its stdout as a prediction vector.

    The command must exit 0 and print whitespace-separated nonnegative
    confidences summing to 1 within 1e-3.
    """
    argv = shlex.split(command) + [str(image_path)]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as e:
        raise ExternalClassifierError(f"cannot run {argv[0]!r}: {e}") from e
    if proc.returncode != 0:
        raise ExternalClassifierError(
            f"classifier command exited {proc.returncode}: {proc.stderr.strip()[:200]}"
        )
    try:
        values = [float(tok) for tok in proc.stdout.split()]
    except ValueError:
        raise ExternalClassifierError(f"unparsable classifier output: {proc.stdout[:200]!r}") from None
    if not values:
        raise ExternalClassifierError("classifier printed no confidences")
    total = sum(values)
    if not 0.999 <= total <= 1.001:
        raise ExternalClassifierError(f"confidences sum to {total:.6f}, outside [0.999, 1.001]")
    try:
        return PredictionVector(values, tol=1e-3)
    except ValueError as e:
        raise ExternalClassifierError(str(e)) from None


class ModelClassifier:
    """Adapter: classify stored Images with a built-in model."""

    def __init__(self, model):
        self.model = model

    def __call__(self, img):
        return forward(self.model, to_float(img))


class ExternalClassifier:
    """Adapter: classify stored Images through an external command.

    Each call writes the image to a temporary PGM/PPM file and hands the
    path to the command.
    """

    def __init__(self, command):
        self.command = command

    def __call__(self, img):
        suffix = ".pgm" if img.planes == 1 else ".ppm"
        with tempfile.NamedTemporaryFile(suffix=suffix, delete=True) as f:
            f.write(write_pgm_ppm(img))
            f.flush()
            return external_classify(self.command, f.name)
