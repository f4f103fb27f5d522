import datetime
import io
import math

import numpy as np
import pytest
from PIL import Image

from agroplat.analytics import (LoessFit, TimeSeries, compute_usage_stats,
                                download_series, loess_fit, record_download,
                                trend_png, usage_csv)
from agroplat.errors import BadSpan, SpecError, TooFewPoints
from agroplat.seeds import USAGE_COUNTS, seed_downloads, seed_usage

from conftest import register_trio


def day_series(values, start="2024-01-01"):
    d0 = datetime.date.fromisoformat(start)
    days = tuple((d0 + datetime.timedelta(days=i)).isoformat()
                 for i in range(len(values)))
    return TimeSeries(days=days, counts=tuple(values))


# --- usage statistics -------------------------------------------------------

def test_usage_stats_empty_store(platform):
    stats = compute_usage_stats(platform.store)
    assert stats.users_total == 0
    assert all(value == 0 for _, value in stats.as_rows())


def test_usage_stats_count_live_objects(platform):
    farmer, agro, _ = register_trio(platform)
    farm = platform.registry.create_farm(farmer.id, "North", "valley")
    platform.registry.create_crop(farmer.id, farm.id, "lemon")
    platform.registry.create_crop(farmer.id, farm.id, "orange")
    thread = platform.chat.open_thread(farmer.id, agro.id)
    platform.chat.send_message(farmer.id, thread.id, "hi")
    platform.chat.send_message(agro.id, thread.id, "hello")

    stats = compute_usage_stats(platform.store)
    assert stats.users_total == 3
    assert stats.farmers == stats.agronomists == stats.merchants == 1
    assert stats.chats == 1
    assert stats.messages == 2
    assert stats.farms == 1
    assert stats.crops == 2
    assert stats.samples == 0
    assert stats.products == 0


def test_usage_stats_match_seeded_fixture(platform):
    seed_usage(platform.store, platform.blobs, clock=platform.clock)
    stats = compute_usage_stats(platform.store)
    assert stats.farmers == USAGE_COUNTS["farmers"] == 146
    assert stats.agronomists == USAGE_COUNTS["agronomists"] == 9
    assert stats.merchants == USAGE_COUNTS["merchants"] == 12
    assert stats.users_total == 146 + 9 + 12 == 167
    assert stats.chats == USAGE_COUNTS["chats"] == 171
    assert stats.samples == USAGE_COUNTS["samples"] == 38
    assert stats.products == USAGE_COUNTS["products"] == 65
    assert stats.messages == USAGE_COUNTS["messages"] == 1350
    assert stats.farms == USAGE_COUNTS["farms"] == 80
    assert stats.crops == USAGE_COUNTS["crops"] == 275


def test_usage_stats_respond_to_new_registration(platform):
    seed_usage(platform.store, platform.blobs, clock=platform.clock)
    before = compute_usage_stats(platform.store)
    platform.registry.register("newcomer", "farmer",
                               {"phone": "+0", "locality": "valley"}, "longsecret")
    after = compute_usage_stats(platform.store)
    assert after.farmers == before.farmers + 1
    assert after.users_total == before.users_total + 1
    assert after.merchants == before.merchants


def test_usage_csv_layout(platform):
    register_trio(platform)
    csv = usage_csv(compute_usage_stats(platform.store))
    lines = csv.strip().split("\n")
    assert lines[0] == "metric,value"
    assert len(lines) == 11
    assert "users_total,3" in lines
    assert "farmers,1" in lines


# --- download counters ------------------------------------------------------

def test_record_download_accumulates(platform):
    record_download(platform.store, "2024-03-05")
    record_download(platform.store, "2024-03-05")
    series = record_download(platform.store, "2024-03-04")
    assert series.days == ("2024-03-04", "2024-03-05")
    assert series.counts == (1, 2)


def test_record_download_rejects_bad_day(platform):
    with pytest.raises(ValueError):
        record_download(platform.store, "not-a-day")
    with pytest.raises(ValueError):
        record_download(platform.store, "2024-13-40")
    assert len(download_series(platform.store)) == 0


def test_seed_downloads_is_deterministic(platform):
    total = seed_downloads(platform.store)
    series = download_series(platform.store)
    assert sum(series.counts) == total
    # zero-download days record nothing, so the series may skip a few
    assert 80 <= len(series) <= 90
    assert series.days[0] >= "2024-01-01"
    assert series.days[-1] <= "2024-03-30"
    assert all(c >= 1 for c in series.counts)
    assert list(series.days) == sorted(series.days)


# --- loess ------------------------------------------------------------------

def test_loess_argument_validation():
    series = day_series([1, 2, 3, 4, 5, 6])
    with pytest.raises(SpecError):
        loess_fit(series, degree=3)
    with pytest.raises(BadSpan):
        loess_fit(series, span=0.0)
    with pytest.raises(BadSpan):
        loess_fit(series, span=1.5)
    with pytest.raises(TooFewPoints):
        loess_fit(day_series([1, 2, 3]), degree=2)
    with pytest.raises(TooFewPoints):
        loess_fit(day_series([1, 2]), degree=1)


@pytest.mark.parametrize("degree", [1, 2])
@pytest.mark.parametrize("span", [0.3, 0.75, 1.0])
def test_loess_reproduces_polynomials_of_its_degree(degree, span):
    # a local polynomial fit is exact on data that already is a polynomial
    # of the same (or lower) degree, whatever the weights are
    n = 40
    t = np.arange(n, dtype=float)
    coeffs = (3.0, -0.5, 0.02)[:degree + 1]
    y = sum(c * t ** k for k, c in enumerate(coeffs))
    fit = loess_fit(day_series(y.tolist()), span=span, degree=degree)
    assert np.allclose(fit.fitted, y, atol=1e-9)


def test_loess_shift_equivariance():
    rng = np.random.default_rng(3)
    y = (rng.random(50) * 20).tolist()
    base = loess_fit(day_series(y), span=0.5, degree=2)
    shifted = loess_fit(day_series([v + 1000.0 for v in y]), span=0.5, degree=2)
    assert np.allclose(np.array(shifted.fitted) - 1000.0, base.fitted, atol=1e-9)
    assert np.allclose(np.array(shifted.lower) - 1000.0, base.lower, atol=1e-9)
    assert np.allclose(np.array(shifted.upper) - 1000.0, base.upper, atol=1e-9)


def test_loess_constant_series_has_zero_band():
    fit = loess_fit(day_series([7.0] * 20), span=0.6, degree=2)
    assert np.allclose(fit.fitted, 7.0, atol=1e-9)
    assert np.allclose(fit.lower, 7.0, atol=1e-9)
    assert np.allclose(fit.upper, 7.0, atol=1e-9)


def test_loess_band_brackets_the_fit():
    rng = np.random.default_rng(9)
    y = (10 + rng.standard_normal(60) * 2).tolist()
    fit = loess_fit(day_series(y))
    for lo, mid, hi in zip(fit.lower, fit.fitted, fit.upper):
        assert lo <= mid <= hi


def loess_probe_oracle(series, span, degree, i):
    """Independent local fit at point i: weighted least squares solved as a
    direct lstsq on the sqrt-weight scaled design, value = intercept."""
    x = np.array([datetime.date.fromisoformat(d).toordinal()
                  for d in series.days], dtype=float)
    y = np.asarray(series.counts, dtype=float)
    n = len(x)
    r = min(n, max(degree + 2, math.ceil(span * n)))
    d = np.abs(x - x[i])
    neighbors = np.argsort(d, kind="stable")[:r]
    dmax = d[neighbors].max()
    w = np.ones(r) if dmax == 0 else (1 - np.minimum(d[neighbors] / dmax, 1) ** 3) ** 3
    z = x[neighbors] - x[i]
    design = np.column_stack([z ** k for k in range(degree + 1)])
    sw = np.sqrt(w)
    beta, *_ = np.linalg.lstsq(design * sw[:, None], y[neighbors] * sw, rcond=None)
    return float(beta[0])


def test_loess_agrees_with_direct_least_squares_probes():
    rng = np.random.default_rng(42)
    t = np.arange(90, dtype=float)
    y = 12 + 0.25 * t + 6 * np.sin(2 * np.pi * t / 7) + rng.standard_normal(90)
    series = day_series(y.tolist())
    for span, degree in ((0.3, 1), (0.75, 2)):
        fit = loess_fit(series, span=span, degree=degree)
        for i in (0, 17, 44, 71, 89):
            want = loess_probe_oracle(series, span, degree, i)
            assert fit.fitted[i] == pytest.approx(want, abs=1e-6), (span, degree, i)


def test_loess_handles_irregular_spacing():
    days = ("2024-01-01", "2024-01-02", "2024-01-05", "2024-01-11",
            "2024-01-12", "2024-01-20", "2024-02-01", "2024-02-02")
    series = TimeSeries(days=days, counts=(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0))
    fit = loess_fit(series, span=0.8, degree=1)
    assert len(fit.fitted) == len(days)
    assert all(np.isfinite(v) for v in fit.fitted)


# --- figure and export -------------------------------------------------------

def png_size(data):
    img = Image.open(io.BytesIO(data))
    return img.size


def test_trend_png_dimensions_with_fit(platform):
    seed_downloads(platform.store)
    series = download_series(platform.store)
    fit = loess_fit(series)
    png = trend_png(series, fit)
    assert png[:8] == b"\x89PNG\r\n\x1a\n"
    assert png_size(png) == (800, 500)


def test_trend_png_empty_series_renders_axes():
    png = trend_png(TimeSeries(days=(), counts=()))
    assert png_size(png) == (800, 500)


def test_trend_png_without_fit():
    png = trend_png(day_series([1, 2, 3]))
    assert png_size(png) == (800, 500)
