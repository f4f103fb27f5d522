"""Stratified splitting and the SGD-with-momentum training loop."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateDataset, SpecError
from . import model as modeling
from .architecture import CLASS_LABELS
from .augment import augment
from .dataset import LabeledDataset, image_to_input


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    train_fraction: float = 0.8
    batch_size: int = 16
    learning_rate: float = 1e-3
    momentum: float = 0.9
    seed: int = 0
    augment: bool = True
    flip: bool = True
    rotation_degrees: float = 15.0
    zoom_low: float = 0.9
    zoom_high: float = 1.1

    def __post_init__(self):
        if self.epochs < 1:
            raise SpecError("epochs must be at least 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise SpecError("train_fraction must be strictly between 0 and 1")
        if self.batch_size < 1:
            raise SpecError("batch_size must be at least 1")
        if self.learning_rate <= 0:
            raise SpecError("learning_rate must be positive")
        if not 0.0 < self.zoom_low <= self.zoom_high:
            raise SpecError("zoom bounds must satisfy 0 < low <= high")


def stratified_split(dataset: LabeledDataset, train_fraction: float, seed: int = 0):
    """Per-class random split; round(fraction * n) of each class goes to train.

    Raises DegenerateDataset when any present class would land entirely on
    one side, since that makes the held-out metrics for it meaningless.
    """
    if not 0.0 < train_fraction < 1.0:
        raise SpecError("train_fraction must be strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    by_class = {}
    for i, (_, label) in enumerate(dataset.items):
        by_class.setdefault(label, []).append(i)
    train_idx, held_idx = [], []
    for label in CLASS_LABELS:
        idxs = by_class.get(label)
        if not idxs:
            continue
        n_train = round(train_fraction * len(idxs))
        if n_train == 0 or n_train == len(idxs):
            raise DegenerateDataset(
                f"class {label!r} has {len(idxs)} item(s); fraction "
                f"{train_fraction} leaves one split empty")
        order = rng.permutation(len(idxs))
        train_idx.extend(idxs[j] for j in order[:n_train])
        held_idx.extend(idxs[j] for j in order[n_train:])
    train = LabeledDataset([dataset.items[i] for i in sorted(train_idx)])
    held = LabeledDataset([dataset.items[i] for i in sorted(held_idx)])
    return train, held


def train(model: modeling.Model, train_set: LabeledDataset, cfg: TrainConfig) -> list:
    """Optimize the model in place; returns the per-epoch mean loss trace.

    Mini-batch SGD with classical momentum (v = m*v - lr*g, w += v); batch
    gradients are the mean over the batch. Identical data, config, and seed
    reproduce the exact same weights.
    """
    if len(train_set) == 0:
        raise DegenerateDataset("training set is empty")
    head = model.shapes[-1]
    if head != (len(CLASS_LABELS),):
        raise SpecError(f"network head {head} does not match {len(CLASS_LABELS)} classes")
    rng = np.random.default_rng(cfg.seed)
    params = model.parameter_arrays()
    grads = model.gradient_arrays()
    velocity = [np.zeros_like(p) for p in params]
    items = train_set.items
    trace = []
    for _ in range(cfg.epochs):
        order = rng.permutation(len(items))
        epoch_losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            model.zero_grads()
            for i in batch:
                img, label = items[i]
                if cfg.augment:
                    img = augment(img, rng, flip=cfg.flip,
                                  rotation_degrees=cfg.rotation_degrees,
                                  zoom_low=cfg.zoom_low, zoom_high=cfg.zoom_high)
                x = image_to_input(img, model.spec.input_shape)
                loss = modeling.loss_and_grads(model, x, CLASS_LABELS.index(label), rng=rng)
                epoch_losses.append(loss)
            scale = 1.0 / len(batch)
            for p, g, v in zip(params, grads, velocity):
                v *= cfg.momentum
                v -= cfg.learning_rate * scale * g
                p += v
        trace.append(float(np.mean(epoch_losses)))
    model.version_id = modeling.fingerprint(model)
    return trace
