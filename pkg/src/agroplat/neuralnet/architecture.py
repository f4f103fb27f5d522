"""Layer specifications, shape chaining, and parameter counting.

A network is described declaratively as an ordered layer list plus an input
shape; the runtime engine in layers.py/model.py is built from it. Shapes are
channels-last (height, width, channels).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from ..errors import SpecError

# Output order of the disease classifier head; index = class id.
CLASS_LABELS = (
    "alternaria",
    "acarus",
    "canker",
    "magnesium_deficiency",
    "zinc_deficiency",
    "healthy",
)


@dataclass(frozen=True)
class Conv2D:
    filters: int
    kernel: int = 3
    stride: int = 1
    activation: str = "relu"


@dataclass(frozen=True)
class MaxPool2D:
    window: int = 2


@dataclass(frozen=True)
class Dropout:
    rate: float = 0.5


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Dense:
    units: int
    activation: str = "linear"


LayerSpec = Union[Conv2D, MaxPool2D, Dropout, Flatten, Dense]

_ACTIVATIONS = ("relu", "linear", "softmax")


@dataclass(frozen=True)
class NetworkSpec:
    input_shape: tuple
    layers: tuple

    def __post_init__(self):
        object.__setattr__(self, "input_shape", tuple(self.input_shape))
        object.__setattr__(self, "layers", tuple(self.layers))


def disease_classifier_spec(input_size: int = 224) -> NetworkSpec:
    """The platform's citrus disease classifier.

    Three same-padded 3x3 ReLU convolution blocks (16/32/64 filters) each
    followed by 2x2 max pooling, then dropout, flatten, a 128-unit ReLU dense
    layer, and a softmax head one unit per class.
    """
    return NetworkSpec(
        input_shape=(input_size, input_size, 3),
        layers=(
            Conv2D(16), MaxPool2D(),
            Conv2D(32), MaxPool2D(),
            Conv2D(64), MaxPool2D(),
            Dropout(0.5),
            Flatten(),
            Dense(128, activation="relu"),
            Dense(len(CLASS_LABELS), activation="softmax"),
        ),
    )


def output_shapes(spec: NetworkSpec) -> list[tuple]:
    """Shape after each layer, validating that the layer list chains.

    Raises SpecError on any inconsistency (dense fed a 3-d tensor, pooling a
    flattened vector, non-positive sizes, unknown activations...).
    """
    shape = spec.input_shape
    shapes = []
    for i, layer in enumerate(spec.layers):
        if isinstance(layer, Conv2D):
            if len(shape) != 3:
                raise SpecError(f"layer {i}: conv2d requires a 3-d input, got {shape}")
            if layer.filters < 1 or layer.kernel < 1 or layer.stride < 1:
                raise SpecError(f"layer {i}: bad conv2d geometry {layer}")
            if layer.activation not in _ACTIVATIONS:
                raise SpecError(f"layer {i}: unknown activation {layer.activation!r}")
            h, w, _ = shape
            shape = (math.ceil(h / layer.stride), math.ceil(w / layer.stride), layer.filters)
        elif isinstance(layer, MaxPool2D):
            if len(shape) != 3:
                raise SpecError(f"layer {i}: max-pool requires a 3-d input, got {shape}")
            h, w, c = shape
            if layer.window < 1 or h < layer.window or w < layer.window:
                raise SpecError(f"layer {i}: pool window {layer.window} exceeds input {shape}")
            shape = (h // layer.window, w // layer.window, c)
        elif isinstance(layer, Dropout):
            if not 0.0 <= layer.rate < 1.0:
                raise SpecError(f"layer {i}: dropout rate must be in [0, 1), got {layer.rate}")
        elif isinstance(layer, Flatten):
            n = 1
            for d in shape:
                n *= d
            shape = (n,)
        elif isinstance(layer, Dense):
            if len(shape) != 1:
                raise SpecError(f"layer {i}: dense requires a flat input, got {shape}")
            if layer.units < 1:
                raise SpecError(f"layer {i}: dense units must be positive")
            if layer.activation not in _ACTIVATIONS:
                raise SpecError(f"layer {i}: unknown activation {layer.activation!r}")
            shape = (layer.units,)
        else:
            raise SpecError(f"layer {i}: unknown layer type {type(layer).__name__}")
        shapes.append(shape)
    return shapes


def count_parameters(spec: NetworkSpec) -> int:
    """Trainable parameter count from the closed-form per-layer sums."""
    output_shapes(spec)  # chaining check
    shape = spec.input_shape
    total = 0
    for layer in spec.layers:
        if isinstance(layer, Conv2D):
            h, w, cin = shape
            total += layer.kernel * layer.kernel * cin * layer.filters + layer.filters
            shape = (math.ceil(h / layer.stride), math.ceil(w / layer.stride), layer.filters)
        elif isinstance(layer, MaxPool2D):
            h, w, c = shape
            shape = (h // layer.window, w // layer.window, c)
        elif isinstance(layer, Flatten):
            n = 1
            for d in shape:
                n *= d
            shape = (n,)
        elif isinstance(layer, Dense):
            total += shape[0] * layer.units + layer.units
            shape = (layer.units,)
    return total


def spec_to_dict(spec: NetworkSpec) -> dict:
    layers = []
    for layer in spec.layers:
        if isinstance(layer, Conv2D):
            layers.append({"type": "conv2d", "filters": layer.filters,
                           "kernel": layer.kernel, "stride": layer.stride,
                           "activation": layer.activation})
        elif isinstance(layer, MaxPool2D):
            layers.append({"type": "maxpool2d", "window": layer.window})
        elif isinstance(layer, Dropout):
            layers.append({"type": "dropout", "rate": layer.rate})
        elif isinstance(layer, Flatten):
            layers.append({"type": "flatten"})
        elif isinstance(layer, Dense):
            layers.append({"type": "dense", "units": layer.units,
                           "activation": layer.activation})
    return {"input_shape": list(spec.input_shape), "layers": layers}


def spec_from_dict(doc: dict) -> NetworkSpec:
    layers = []
    for entry in doc["layers"]:
        kind = entry["type"]
        if kind == "conv2d":
            layers.append(Conv2D(entry["filters"], entry["kernel"],
                                 entry["stride"], entry["activation"]))
        elif kind == "maxpool2d":
            layers.append(MaxPool2D(entry["window"]))
        elif kind == "dropout":
            layers.append(Dropout(entry["rate"]))
        elif kind == "flatten":
            layers.append(Flatten())
        elif kind == "dense":
            layers.append(Dense(entry["units"], entry["activation"]))
        else:
            raise SpecError(f"unknown layer type {kind!r} in stored spec")
    return NetworkSpec(input_shape=tuple(doc["input_shape"]), layers=tuple(layers))
