"""Usage aggregation, download counters, and local-regression trend fitting."""
from __future__ import annotations

import datetime
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadSpan, NotFound, SpecError, TooFewPoints, VersionConflict
from .registry import ROLE_AGRONOMIST, ROLE_FARMER, ROLE_MERCHANT
from .store import DocumentStore

DEFAULT_SPAN = 0.75
DEFAULT_DEGREE = 2


@dataclass(frozen=True)
class UsageStats:
    users_total: int
    farmers: int
    agronomists: int
    merchants: int
    chats: int
    samples: int
    products: int
    messages: int
    farms: int
    crops: int

    def as_rows(self) -> list:
        return [
            ("users_total", self.users_total),
            ("farmers", self.farmers),
            ("agronomists", self.agronomists),
            ("merchants", self.merchants),
            ("chats", self.chats),
            ("samples", self.samples),
            ("products", self.products),
            ("messages", self.messages),
            ("farms", self.farms),
            ("crops", self.crops),
        ]


@dataclass(frozen=True)
class TimeSeries:
    days: tuple   # ISO dates, strictly increasing
    counts: tuple

    def __len__(self):
        return len(self.days)


@dataclass(frozen=True)
class LoessFit:
    days: tuple
    fitted: tuple
    lower: tuple
    upper: tuple
    span: float
    degree: int


def compute_usage_stats(store: DocumentStore) -> UsageStats:
    """Exact counts by scanning the store; a pure function of its contents."""
    role_counts = {ROLE_FARMER: 0, ROLE_AGRONOMIST: 0, ROLE_MERCHANT: 0}
    for doc in store.list("users"):
        role = doc.payload.get("role")
        if role in role_counts:
            role_counts[role] += 1
    threads = store.list("threads")
    messages = sum(len(d.payload.get("messages", [])) for d in threads)
    return UsageStats(
        users_total=sum(role_counts.values()),
        farmers=role_counts[ROLE_FARMER],
        agronomists=role_counts[ROLE_AGRONOMIST],
        merchants=role_counts[ROLE_MERCHANT],
        chats=len(threads),
        samples=len(store.list("samples")),
        products=len(store.list("listings")),
        messages=messages,
        farms=len(store.list("farms")),
        crops=len(store.list("crops")),
    )


def record_download(store: DocumentStore, day: str) -> TimeSeries:
    """Increment the download counter for a calendar day (ISO format)."""
    datetime.date.fromisoformat(day)  # ValueError on a bad day is a usage bug
    while True:
        try:
            doc = store.get("downloads", day)
            payload = {"count": doc.payload["count"] + 1}
            expected = doc.version
        except NotFound:
            payload = {"count": 1}
            expected = 0
        try:
            store.put("downloads", day, payload, expected)
            break
        except VersionConflict:
            continue
    return download_series(store)


def download_series(store: DocumentStore) -> TimeSeries:
    docs = store.list("downloads")
    pairs = sorted((d.id, d.payload["count"]) for d in docs)
    return TimeSeries(days=tuple(p[0] for p in pairs),
                      counts=tuple(p[1] for p in pairs))


def loess_fit(series: TimeSeries, span: float = DEFAULT_SPAN,
              degree: int = DEFAULT_DEGREE) -> LoessFit:
    """Tricube-weighted local polynomial regression with a pointwise 95% band.

    At each point the ceil(span*n) nearest neighbors (at least degree+2, so
    the local system stays determined after the boundary weight hits zero)
    get tricube weights w=(1-(d/dmax)^3)^3 and a degree-`degree` polynomial
    is fitted; the band is fitted +/- 1.96*SE where SE comes from the
    smoother-row norm and the residual variance RSS/(n - tr(L)).
    """
    if degree not in (1, 2):
        raise SpecError(f"degree must be 1 or 2, got {degree}")
    if not 0.0 < span <= 1.0:
        raise BadSpan(f"span must be in (0, 1], got {span}")
    n = len(series)
    if n < degree + 2:
        raise TooFewPoints(f"need at least {degree + 2} points, got {n}")
    x = np.array([datetime.date.fromisoformat(d).toordinal() for d in series.days],
                 dtype=np.float64)
    y = np.asarray(series.counts, dtype=np.float64)
    r = min(n, max(degree + 2, math.ceil(span * n)))
    fitted = np.empty(n)
    row_norm_sq = np.empty(n)  # squared norm of each smoother row
    trace_l = 0.0
    for i in range(n):
        d = np.abs(x - x[i])
        idx = np.argsort(d, kind="stable")[:r]
        dmax = d[idx].max()
        if dmax == 0:
            w = np.ones(r)
        else:
            w = (1.0 - np.minimum(d[idx] / dmax, 1.0) ** 3) ** 3
        z = x[idx] - x[i]
        basis = np.vander(z, degree + 1, increasing=True)  # columns 1, z, z^2
        bw = basis * w[:, None]
        # row of the linear smoother: fitted_i = e0^T (B^T W B)^+ B^T W y
        gram = basis.T @ bw
        sol = np.linalg.pinv(gram) @ bw.T
        li = sol[0]
        fitted[i] = li @ y[idx]
        row_norm_sq[i] = float(li @ li)
        trace_l += float(li[np.nonzero(idx == i)[0][0]]) if i in idx else 0.0
    rss = float(np.sum((y - fitted) ** 2))
    df = max(1.0, n - trace_l)
    sigma2 = rss / df
    se = np.sqrt(sigma2 * row_norm_sq)
    margin = 1.96 * se
    return LoessFit(days=series.days,
                    fitted=tuple(float(v) for v in fitted),
                    lower=tuple(float(v) for v in fitted - margin),
                    upper=tuple(float(v) for v in fitted + margin),
                    span=span, degree=degree)


def usage_csv(stats: UsageStats) -> str:
    lines = ["metric,value"]
    lines.extend(f"{name},{value}" for name, value in stats.as_rows())
    return "\n".join(lines) + "\n"


def trend_png(series: TimeSeries, fit: LoessFit = None) -> bytes:
    """Scatter of daily downloads with the loess line and shaded band.

    800x500 pixels; an empty series renders bare axes.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 5), dpi=100)
    try:
        if len(series):
            xs = [datetime.date.fromisoformat(d) for d in series.days]
            ax.scatter(xs, series.counts, s=12, color="#4a7", label="downloads")
            if fit is not None:
                ax.fill_between(xs, fit.lower, fit.upper, color="#77c",
                                alpha=0.3, linewidth=0, label="95% band")
                ax.plot(xs, fit.fitted, color="#225", linewidth=1.6, label="trend")
            ax.legend(loc="upper left")
            fig.autofmt_xdate()
        ax.set_xlabel("day")
        ax.set_ylabel("downloads")
        ax.set_title("Downloads per day")
        buf = io.BytesIO()
        fig.savefig(buf, format="png")
        return buf.getvalue()
    finally:
        plt.close(fig)
