import numpy as np
import pytest

from agroplat.config import Config
from agroplat.images import RgbImage, encode_png
from agroplat.neuralnet import CLASS_LABELS, LabeledDataset
from agroplat.runtime import Platform


class FakeClock:
    """Manually advanced clock for deterministic expiry/deadline tests."""

    def __init__(self, start: float = 1_700_000_000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float):
        self.now += seconds


def make_platform(tmp_path, clock=None, **overrides) -> Platform:
    cfg = Config(data_dir=str(tmp_path / "data"), scrypt_log_n=4,
                 model_input_size=16, listen_port=0, sweep_interval=0.05)
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return Platform(cfg, clock=clock or FakeClock())


@pytest.fixture
def platform(tmp_path):
    p = make_platform(tmp_path)
    yield p
    p.stop()


@pytest.fixture
def live_platform(tmp_path):
    """Platform on the real clock (for sweeper/server tests)."""
    import time
    p = make_platform(tmp_path, clock=time.time)
    yield p
    p.stop()


def solid_png(rgb, size=8) -> bytes:
    return encode_png(np.full((size, size, 3), rgb, dtype=np.uint8))


def random_png(seed=0, size=16) -> bytes:
    rng = np.random.default_rng(seed)
    return encode_png((rng.random((size, size, 3)) * 255).astype(np.uint8))


_PATCH_COLORS = ((200, 30, 30), (30, 200, 30), (30, 30, 200),
                 (200, 200, 30), (30, 200, 200), (200, 30, 200))


def color_patch_dataset(size=16, per_class=2) -> LabeledDataset:
    """Synthetic patches: one saturated color family per class."""
    items = []
    for ci, (r, g, b) in enumerate(_PATCH_COLORS):
        for k in range(per_class):
            shade = 25 * k
            px = np.full((size, size, 3), (r - shade, g - shade, b - shade),
                         dtype=np.uint8)
            items.append((RgbImage(px), CLASS_LABELS[ci]))
    return LabeledDataset(items)


def register_trio(platform):
    """One farmer, agronomist, merchant; returns their accounts."""
    reg = platform.registry
    farmer, _ = reg.register("fay", "farmer",
                             {"phone": "+1", "locality": "valley"}, "longsecret")
    agro, _ = reg.register("ann", "agronomist",
                           {"phone": "+2", "locality": "city"}, "longsecret")
    merchant, _ = reg.register("mel", "merchant",
                               {"phone": "+3", "locality": "port"}, "longsecret")
    return farmer, agro, merchant


class EventRecorder:
    """Bus sink capturing events for assertions."""

    def __init__(self, bus):
        self.events = []
        self._detach = bus.attach(self.events.append)

    def of_type(self, frame_type):
        return [e for e in self.events if e.type == frame_type]

    def close(self):
        self._detach()
