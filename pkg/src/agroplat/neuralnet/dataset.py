"""Labeled photo collections for training and evaluation."""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import DecodeError, SpecError
from ..images import RgbImage, decode_rgb, resize
from .architecture import CLASS_LABELS

_IMAGE_EXTS = (".png", ".jpg", ".jpeg", ".bmp")

# folder-name spellings accepted when ingesting a directory tree
_ALIASES = {
    "alternaria": "alternaria",
    "acarus": "acarus",
    "canker": "canker",
    "citruscanker": "canker",
    "magnesiumdeficiency": "magnesium_deficiency",
    "magnesium": "magnesium_deficiency",
    "zincdeficiency": "zinc_deficiency",
    "zinc": "zinc_deficiency",
    "healthy": "healthy",
}


def normalize_label(name: str) -> str:
    key = "".join(ch for ch in name.lower() if ch.isalnum())
    if key not in _ALIASES:
        raise SpecError(f"unknown class label {name!r}; expected one of {CLASS_LABELS}")
    return _ALIASES[key]


@dataclass
class LabeledDataset:
    """Pairs of (image, class label). Labels must be canonical class names."""

    items: list = field(default_factory=list)

    def __post_init__(self):
        for _, label in self.items:
            if label not in CLASS_LABELS:
                raise SpecError(f"unknown class label {label!r}")

    def __len__(self):
        return len(self.items)

    def add(self, img: RgbImage, label: str):
        if label not in CLASS_LABELS:
            raise SpecError(f"unknown class label {label!r}")
        self.items.append((img, label))

    def class_counts(self) -> dict:
        counts = {label: 0 for label in CLASS_LABELS}
        for _, label in self.items:
            counts[label] += 1
        return counts

    @classmethod
    def from_directory(cls, root: str, image_size: int = None) -> "LabeledDataset":
        """Ingest a tree of class-named folders of image files.

        Subdirectory names map onto canonical labels (a few spellings are
        accepted); files that fail to decode raise DecodeError. When
        image_size is given every photo is resized to that square size.
        """
        ds = cls()
        if not os.path.isdir(root):
            raise SpecError(f"dataset root {root!r} is not a directory")
        for entry in sorted(os.listdir(root)):
            sub = os.path.join(root, entry)
            if not os.path.isdir(sub):
                continue
            label = normalize_label(entry)
            for fname in sorted(os.listdir(sub)):
                if not fname.lower().endswith(_IMAGE_EXTS):
                    continue
                with open(os.path.join(sub, fname), "rb") as fh:
                    data = fh.read()
                try:
                    img = decode_rgb(data)
                except DecodeError as exc:
                    raise DecodeError(f"{os.path.join(entry, fname)}: {exc}") from exc
                if image_size is not None and img.pixels.shape[:2] != (image_size, image_size):
                    img = resize(img, image_size, image_size)
                ds.add(img, label)
        return ds


def image_to_input(img: RgbImage, input_shape: tuple) -> np.ndarray:
    """Scale a photo onto the network input grid as reflectance in [0, 1]."""
    h, w, _ = input_shape
    if img.pixels.shape[:2] != (h, w):
        img = resize(img, h, w)
    return img.pixels.astype(np.float64) / 255.0
