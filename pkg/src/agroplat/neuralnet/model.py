"""Network construction, inference, loss gradients, and the weight container."""
from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import FormatError, ShapeError, SpecError
from . import architecture as arch
from .layers import ConvLayer, DenseLayer, DropoutLayer, FlattenLayer, MaxPoolLayer

MAGIC = b"AGPLNET\x00"
CONTAINER_VERSION = 1


@dataclass
class Model:
    spec: arch.NetworkSpec
    layers: list
    version_id: str = ""
    shapes: list = field(default_factory=list)

    def parameter_arrays(self):
        out = []
        for layer in self.layers:
            out.extend(layer.params)
        return out

    def gradient_arrays(self):
        out = []
        for layer in self.layers:
            out.extend(layer.grads)
        return out

    def zero_grads(self):
        for g in self.gradient_arrays():
            g[...] = 0.0


def build_network(spec: arch.NetworkSpec, seed: int = 0) -> Model:
    """Instantiate runtime layers with Glorot-uniform weights and zero biases.

    Raises SpecError if the layer list does not chain.
    """
    shapes = arch.output_shapes(spec)
    rng = np.random.default_rng(seed)
    layers = []
    shape = spec.input_shape
    for layer_spec, out_shape in zip(spec.layers, shapes):
        if isinstance(layer_spec, arch.Conv2D):
            k, cin, cout = layer_spec.kernel, shape[2], layer_spec.filters
            fan_in = k * k * cin
            fan_out = k * k * cout
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-limit, limit, size=(k, k, cin, cout))
            layers.append(ConvLayer(w, np.zeros(cout), layer_spec.stride, layer_spec.activation))
        elif isinstance(layer_spec, arch.MaxPool2D):
            layers.append(MaxPoolLayer(layer_spec.window))
        elif isinstance(layer_spec, arch.Dropout):
            layers.append(DropoutLayer(layer_spec.rate))
        elif isinstance(layer_spec, arch.Flatten):
            layers.append(FlattenLayer())
        elif isinstance(layer_spec, arch.Dense):
            n_in, n_out = shape[0], layer_spec.units
            limit = math.sqrt(6.0 / (n_in + n_out))
            w = rng.uniform(-limit, limit, size=(n_in, n_out))
            layers.append(DenseLayer(w, np.zeros(n_out), layer_spec.activation))
        shape = out_shape
    model = Model(spec=spec, layers=layers, shapes=shapes)
    model.version_id = fingerprint(model)
    return model


def forward(model: Model, x: np.ndarray, train: bool = False, rng=None) -> np.ndarray:
    if tuple(x.shape) != tuple(model.spec.input_shape):
        raise ShapeError(f"input shape {x.shape} does not match network input "
                         f"{model.spec.input_shape}")
    out = np.asarray(x, dtype=np.float64)
    for layer in model.layers:
        out = layer.forward(out, train=train, rng=rng)
    return out


@dataclass(frozen=True)
class CnnPrediction:
    label: str
    class_index: int
    probabilities: tuple
    model_version: str


def predict(model: Model, x: np.ndarray) -> CnnPrediction:
    """Inference pass; argmax ties resolve to the lowest class index."""
    probs = forward(model, x, train=False)
    idx = int(np.argmax(probs))
    if len(probs) == len(arch.CLASS_LABELS):
        label = arch.CLASS_LABELS[idx]
    else:
        label = f"class_{idx}"
    return CnnPrediction(label=label, class_index=idx,
                         probabilities=tuple(float(p) for p in probs),
                         model_version=model.version_id)


def loss_and_grads(model: Model, x: np.ndarray, class_index: int, rng=None) -> float:
    """One training example: cross-entropy loss, gradients accumulated in place.

    Softmax and cross-entropy are differentiated together, so the gradient
    fed to the head is probs - onehot.
    """
    probs = forward(model, x, train=True, rng=rng)
    p = max(float(probs[class_index]), 1e-12)  # guard log(0)
    loss = -math.log(p)
    dlogits = probs.copy()
    dlogits[class_index] -= 1.0
    grad = dlogits
    for layer in reversed(model.layers):
        grad = layer.backward(grad)
    return loss


def save_model(model: Model) -> bytes:
    arrays = model.parameter_arrays()
    header = {
        "spec": arch.spec_to_dict(model.spec),
        "arrays": [list(a.shape) for a in arrays],
        "dtype": "<f8",
    }
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    parts = [MAGIC, struct.pack("<II", CONTAINER_VERSION, len(hbytes)), hbytes]
    for a in arrays:
        parts.append(np.ascontiguousarray(a, dtype="<f8").tobytes())
    return b"".join(parts)


def load_model(data: bytes) -> Model:
    if len(data) < 16 or data[:8] != MAGIC:
        raise FormatError("not a model container (bad magic)")
    version, hlen = struct.unpack("<II", data[8:16])
    if version != CONTAINER_VERSION:
        raise FormatError(f"unsupported container version: expected "
                          f"{CONTAINER_VERSION}, found {version}")
    if len(data) < 16 + hlen:
        raise FormatError("truncated container header")
    try:
        header = json.loads(data[16:16 + hlen])
        spec = arch.spec_from_dict(header["spec"])
        shapes = [tuple(s) for s in header["arrays"]]
    except (ValueError, KeyError, TypeError, SpecError) as exc:
        raise FormatError(f"bad container header: {exc}") from exc
    need = sum(int(np.prod(s)) * 8 for s in shapes)
    body = data[16 + hlen:]
    if len(body) != need:
        raise FormatError(f"container payload is {len(body)} bytes, expected {need}")
    model = build_network(spec, seed=0)
    arrays = model.parameter_arrays()
    if [tuple(a.shape) for a in arrays] != shapes:
        raise FormatError("stored array shapes do not match the stored spec")
    off = 0
    for a in arrays:
        n = a.size * 8
        a[...] = np.frombuffer(body[off:off + n], dtype="<f8").reshape(a.shape)
        off += n
    model.version_id = _digest(data)
    return model


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:12]


def fingerprint(model: Model) -> str:
    """Short content hash of the serialized model; save/load preserves it."""
    return _digest(save_model(model))
