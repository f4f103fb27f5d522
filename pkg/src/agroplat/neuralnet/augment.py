"""Random photo augmentation for training."""
from __future__ import annotations

from ..images import RgbImage, warp


def augment(img: RgbImage, rng, flip: bool = True, rotation_degrees: float = 15.0,
            zoom_low: float = 0.9, zoom_high: float = 1.1) -> RgbImage:
    """Random horizontal flip (p=0.5), rotation within +/-rotation_degrees,
    and zoom within [zoom_low, zoom_high]. Output dimensions equal the input.

    Draws are consumed in a fixed order (flip, angle, zoom) so runs with the
    same rng state are reproducible.
    """
    do_flip = flip and rng.random() < 0.5
    angle = rng.uniform(-rotation_degrees, rotation_degrees)
    zoom = rng.uniform(zoom_low, zoom_high)
    return warp(img, angle_deg=angle, zoom=zoom, flip=do_flip)
