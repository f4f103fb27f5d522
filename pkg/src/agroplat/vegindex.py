"""Vegetation-index computation over crop photos.

Camera channels stand in for spectral reflectance: R -> rho_670, G -> rho_550,
B -> rho_480, each rescaled to [0, 1] by dividing by 255. Two indices are
supported:

  tgi   triangular greenness, -0.5 * [190*(r670 - r550) - 120*(r670 - r480)];
        a triangle-area proxy that tracks leaf chlorophyll content.
  grvi  normalized green-red difference, (g - r) / (g + r), in [-1, 1];
        sensitive to phenological state.

Index maps carry a validity mask; grvi pixels with g + r == 0 (black photo
borders are common) are masked out rather than raising.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMask
from .images import RgbImage, decode_rgb, encode_png

__all__ = [
    "RgbImage", "ReflectanceImage", "IndexMap", "IndexSummary",
    "decode_rgb", "to_reflectance", "compute_index", "summarize_index",
    "render_heatmap", "INDEX_KINDS", "PERCENTILES", "REFLECTANCE_SCALE",
]

INDEX_KINDS = ("tgi", "grvi")
PERCENTILES = (5, 25, 50, 75, 95)

# Pinned platform-wide so stored summaries stay comparable.
REFLECTANCE_SCALE = "rgb/255"

MASK_GRAY = (128, 128, 128)


@dataclass
class ReflectanceImage:
    """Per-pixel reflectance proxies, (h, w, 3) float64 in [0, 1].

    Channel order is (rho_670, rho_550, rho_480) = camera (R, G, B).
    """

    values: np.ndarray

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass
class IndexMap:
    kind: str
    values: np.ndarray  # (h, w) float64
    valid: np.ndarray   # (h, w) bool

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass
class IndexSummary:
    """Valid-pixel statistics condensing an index map for the report."""

    kind: str
    mean: float
    minimum: float
    maximum: float
    percentiles: dict[int, float]
    valid_fraction: float

    def to_document(self) -> dict:
        """Flat key-value form used for storage and API payloads."""
        doc = {
            "kind": self.kind,
            "mean": self.mean,
            "min": self.minimum,
            "max": self.maximum,
            "valid_fraction": self.valid_fraction,
            "scale": REFLECTANCE_SCALE,
        }
        for p, v in self.percentiles.items():
            doc[f"p{p}"] = v
        return doc


def to_reflectance(img: RgbImage) -> ReflectanceImage:
    """Map 8-bit camera channels onto [0, 1] reflectance proxies."""
    return ReflectanceImage(img.pixels.astype(np.float64) / 255.0)


def compute_index(refl: ReflectanceImage, kind: str) -> IndexMap:
    v = refl.values
    r670, r550, r480 = v[:, :, 0], v[:, :, 1], v[:, :, 2]
    if kind == "tgi":
        values = -0.5 * (190.0 * (r670 - r550) - 120.0 * (r670 - r480))
        valid = np.ones(values.shape, dtype=bool)
    elif kind == "grvi":
        green, red = r550, r670
        denom = green + red
        valid = denom != 0.0
        values = np.zeros(denom.shape, dtype=np.float64)
        np.divide(green - red, denom, out=values, where=valid)
    else:
        raise ValueError(f"unknown index kind {kind!r}")
    return IndexMap(kind=kind, values=values, valid=valid)


def _nearest_rank(sorted_values: np.ndarray, pct: int) -> float:
    n = len(sorted_values)
    rank = int(np.ceil(pct / 100.0 * n))
    return float(sorted_values[max(rank, 1) - 1])


def summarize_index(index_map: IndexMap) -> IndexSummary:
    """Statistics over valid pixels only; percentiles by nearest-rank."""
    vals = index_map.values[index_map.valid]
    if vals.size == 0:
        raise EmptyMask("index map has no valid pixels")
    vals = np.sort(vals)
    return IndexSummary(
        kind=index_map.kind,
        mean=float(vals.mean()),
        minimum=float(vals[0]),
        maximum=float(vals[-1]),
        percentiles={p: _nearest_rank(vals, p) for p in PERCENTILES},
        valid_fraction=float(vals.size / index_map.values.size),
    )


def _diverging_ramp(t: np.ndarray) -> np.ndarray:
    """Map t in [0, 1] onto red -> white -> blue; returns (..., 3) uint8."""
    lo = t <= 0.5
    ramp_up = np.clip(np.rint(510.0 * t), 0, 255)
    ramp_down = np.clip(np.rint(510.0 * (1.0 - t)), 0, 255)
    r = np.where(lo, 255, ramp_down)
    g = np.where(lo, ramp_up, ramp_down)
    b = np.where(lo, ramp_up, 255)
    return np.stack([r, g, b], axis=-1).astype(np.uint8)


def render_heatmap(index_map: IndexMap) -> bytes:
    """Render the index map as a PNG.

    Valid values are ranked linearly between the map's own min and max onto a
    diverging ramp, low values red and high values blue; masked pixels render
    mid-gray. A constant map renders white.
    """
    valid = index_map.valid
    vals = index_map.values
    if not valid.any():
        raise EmptyMask("index map has no valid pixels")

    lo = vals[valid].min()
    hi = vals[valid].max()
    if hi > lo:
        t = (vals - lo) / (hi - lo)
    else:
        t = np.full(vals.shape, 0.5)
    rgb = _diverging_ramp(np.clip(t, 0.0, 1.0))
    rgb[~valid] = MASK_GRAY
    return encode_png(rgb)
