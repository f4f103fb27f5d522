"""Photo decoding and raster helpers shared by the analysis and training code.

All images in the platform are 8-bit RGB held channels-last in numpy arrays.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError

# Pillow modes that carry more than 8 bits per sample; their values are
# reduced by high-byte truncation (value >> 8), not rescaling.
_DEEP_MODES = {"I;16", "I;16B", "I;16L", "I;16N", "I"}


@dataclass
class RgbImage:
    """Decoded photo: (height, width, 3) uint8, row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise DecodeError(f"not an RGB pixel buffer: shape {px.shape}")
        self.pixels = px

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def decode_rgb(data: bytes) -> RgbImage:
    """Decode a PNG or JPEG byte stream to 8-bit RGB.

    Alpha is discarded, grayscale is expanded to three channels, and deep
    (16-bit) samples are truncated to their high byte.
    """
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"cannot decode image: {exc}") from exc

    if img.mode in _DEEP_MODES:
        arr = np.asarray(img, dtype=np.int64)
        arr = np.clip(arr >> 8, 0, 255).astype(np.uint8)
        arr = np.repeat(arr[:, :, None], 3, axis=2)
        return RgbImage(arr)

    if img.mode != "RGB":
        img = img.convert("RGB")
    return RgbImage(np.asarray(img, dtype=np.uint8))


def encode_png(image) -> bytes:
    """Encode an RgbImage or (h, w, 3) uint8 array as PNG bytes."""
    pixels = image.pixels if isinstance(image, RgbImage) else image
    buf = io.BytesIO()
    Image.fromarray(np.asarray(pixels, dtype=np.uint8), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def _bilinear_sample(px: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Sample float pixel coordinates with bilinear filtering, edge-replicated."""
    h, w = px.shape[:2]
    ys = np.clip(ys, 0.0, h - 1.0)
    xs = np.clip(xs, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[..., None]
    fx = (xs - x0)[..., None]

    p = px.astype(np.float64)
    top = p[y0, x0] * (1 - fx) + p[y0, x1] * fx
    bot = p[y1, x0] * (1 - fx) + p[y1, x1] * fx
    return top * (1 - fy) + bot * fy


def resize(img: RgbImage, height: int, width: int) -> RgbImage:
    """Bilinear resize to (height, width)."""
    if (img.height, img.width) == (height, width):
        return RgbImage(img.pixels.copy())
    ys = (np.arange(height) + 0.5) * (img.height / height) - 0.5
    xs = (np.arange(width) + 0.5) * (img.width / width) - 0.5
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    out = _bilinear_sample(img.pixels, grid_y, grid_x)
    return RgbImage(np.clip(np.rint(out), 0, 255).astype(np.uint8))


def warp(img: RgbImage, angle_deg: float = 0.0, zoom: float = 1.0,
         flip: bool = False) -> RgbImage:
    """Rotate/zoom about the image center and optionally mirror horizontally.

    Output dimensions equal input dimensions; samples outside the frame
    replicate the nearest edge pixel. angle_deg=0, zoom=1, flip=False is the
    identity.
    """
    px = img.pixels
    if flip:
        px = px[:, ::-1, :]
    if angle_deg == 0.0 and zoom == 1.0:
        return RgbImage(px.copy())

    h, w = px.shape[:2]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    theta = np.deg2rad(angle_deg)
    cos_t, sin_t = np.cos(theta), np.sin(theta)

    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    dy, dx = yy - cy, xx - cx
    # inverse map: rotate by -theta then un-zoom
    src_y = cy + (sin_t * dx + cos_t * dy) / zoom
    src_x = cx + (cos_t * dx - sin_t * dy) / zoom
    out = _bilinear_sample(px, src_y, src_x)
    return RgbImage(np.clip(np.rint(out), 0, 255).astype(np.uint8))
