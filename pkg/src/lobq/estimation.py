"""Ingest tick-event logs and estimate order-flow parameters.

Log format: CSV with header
``timestamp,side,kind,bid_queue_after,ask_queue_after,bid_price_after``
where timestamp is in seconds from session start, side is bid/ask, kind is
limit/market/cancel and queue sizes are in unit batches. Gzip-compressed
files (suffix .gz) are accepted. Queue sizes recorded in shares can be
rescaled to batches at ingestion with batch_size.

Estimators are count-based: per-side event counts over the covered span for
the intensities, and the histogram of post-change queue snapshots for the
replenishment law. Under the mirrored down-move law, down-move snapshots are
pooled into the up-move histogram with swapped coordinates.
"""

from __future__ import annotations

import gzip
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import QueueDist

__all__ = [
    "EventRecord",
    "EstimationError",
    "ParseReport",
    "EstimationResult",
    "parse_event_log",
    "parse_event_log_with_report",
    "estimate_intensities",
    "estimate_replenishment",
    "realized_volatility",
    "predicted_vs_realized",
]

_SIDES = ("bid", "ask")
_KINDS = ("limit", "market", "cancel")


class EstimationError(RuntimeError):
    """Raised for unusable logs (unreadable, empty, or too many bad rows)."""


@dataclass(slots=True)
class EventRecord:
    """One parsed order-book event row."""

    timestamp: float
    side: str
    kind: str
    bid_queue_after: int
    ask_queue_after: int
    bid_price_after: float


@dataclass
class ParseReport:
    """Malformed-row accounting for one parsed file."""

    total_rows: int = 0
    malformed: list = field(default_factory=list)  # (line_number, reason)

    @property
    def malformed_fraction(self) -> float:
        return len(self.malformed) / self.total_rows if self.total_rows else 0.0


@dataclass
class EstimationResult:
    """Count-based intensity estimates over one log window."""

    lambda_hat: float
    mu_theta_hat: float
    window: tuple[float, float]
    counts: dict
    per_side: dict
    balance_diagnostic: float
    f_hat: Optional[QueueDist] = None

    def to_json(self) -> str:
        d = {
            "lambda_hat": self.lambda_hat,
            "mu_theta_hat": self.mu_theta_hat,
            "window": list(self.window),
            "counts": self.counts,
            "per_side": self.per_side,
            "balance_diagnostic": self.balance_diagnostic,
        }
        if self.f_hat is not None:
            d["f_hat"] = [[i, j, p] for i, j, p in self.f_hat.items()]
        return json.dumps(d, sort_keys=True)


def parse_event_log(path: str, batch_size: float = 1.0) -> list[EventRecord]:
    """Parse a tick-event CSV into records ordered by timestamp.

    Malformed rows below 1% of the file are skipped with a warning carrying
    their line numbers; above 1% the file is rejected. batch_size rescales
    recorded queue sizes (shares per batch) to unit batches.
    """
    records, report = parse_event_log_with_report(path, batch_size)
    if report.malformed:
        shown = ", ".join(f"line {ln}: {why}" for ln, why in report.malformed[:5])
        warnings.warn(
            f"{len(report.malformed)} malformed rows skipped ({shown}...)", stacklevel=2
        )
    return records


def parse_event_log_with_report(
    path: str, batch_size: float = 1.0
) -> tuple[list[EventRecord], ParseReport]:
    """parse_event_log returning the malformed-row report alongside the rows."""
    if batch_size <= 0:
        raise ValueError("batch_size must be positive")
    opener = gzip.open if str(path).endswith(".gz") else open
    try:
        fh = opener(path, "rt", encoding="utf-8")
    except OSError as exc:
        raise EstimationError(f"cannot read event log {path}: {exc}") from exc

    report = ParseReport()
    records: list[EventRecord] = []
    with fh:
        header = fh.readline().strip()
        expected = "timestamp,side,kind,bid_queue_after,ask_queue_after,bid_price_after"
        if header and header.replace(" ", "") != expected:
            raise EstimationError(f"unexpected header {header!r}")
        last_t = -math.inf
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            report.total_rows += 1
            parts = line.split(",")
            if len(parts) != 6:
                report.malformed.append((line_no, f"{len(parts)} fields"))
                continue
            try:
                t = float(parts[0])
                side = parts[1].strip().lower()
                kind = parts[2].strip().lower()
                qb = int(round(int(parts[3]) / batch_size))
                qa = int(round(int(parts[4]) / batch_size))
                px = float(parts[5])
            except ValueError as exc:
                report.malformed.append((line_no, str(exc)))
                continue
            if side not in _SIDES or kind not in _KINDS:
                report.malformed.append((line_no, f"bad side/kind {side}/{kind}"))
                continue
            if qb < 0 or qa < 0:
                report.malformed.append((line_no, "negative queue"))
                continue
            if t < last_t:
                report.malformed.append((line_no, "timestamp decreased"))
                continue
            last_t = t
            records.append(EventRecord(t, side, kind, qb, qa, px))

    if report.total_rows and report.malformed_fraction > 0.01:
        raise EstimationError(
            f"{len(report.malformed)} of {report.total_rows} rows malformed (> 1%); "
            f"first: {report.malformed[:5]}"
        )
    return records, report


def estimate_intensities(
    log: Sequence[EventRecord], span: Optional[float] = None
) -> EstimationResult:
    """Per-side count estimators of the limit and removal intensities.

    lambda_hat averages the per-side limit-order rates; mu_theta_hat does
    the same for market orders plus cancellations. The span defaults to the
    last timestamp (timestamps are measured from session start). The balance
    diagnostic |mu_theta_hat - lambda_hat| / lambda_hat is small for liquid
    order flow.
    """
    if not log:
        raise EstimationError("empty event log")
    T = float(log[-1].timestamp) if span is None else float(span)
    if not T > 0.0:
        raise EstimationError(f"nonpositive time span {T}")
    counts = {(s, k): 0 for s in _SIDES for k in _KINDS}
    for r in log:
        counts[(r.side, r.kind)] += 1
    lam_side = {s: counts[(s, "limit")] / T for s in _SIDES}
    mt_side = {s: (counts[(s, "market")] + counts[(s, "cancel")]) / T for s in _SIDES}
    lam = 0.5 * (lam_side["bid"] + lam_side["ask"])
    mt = 0.5 * (mt_side["bid"] + mt_side["ask"])
    if mt == 0.0:
        warnings.warn("log contains no market orders or cancellations", stacklevel=2)
    return EstimationResult(
        lambda_hat=lam,
        mu_theta_hat=mt,
        window=(0.0, T),
        counts={f"{s}_{k}": counts[(s, k)] for s in _SIDES for k in _KINDS},
        per_side={
            "lambda": lam_side,
            "mu_theta": mt_side,
        },
        balance_diagnostic=abs(mt - lam) / lam if lam > 0 else math.inf,
    )


def _price_changes(log: Sequence[EventRecord], tick: Optional[float]):
    """Yield (index, direction_in_ticks) for rows where the bid price moved."""
    if tick is None:
        diffs = sorted(
            {
                round(abs(log[i].bid_price_after - log[i - 1].bid_price_after), 12)
                for i in range(1, len(log))
            }
            - {0.0}
        )
        if not diffs:
            raise EstimationError("no price changes found in log")
        tick = diffs[0]
    out = []
    for i in range(1, len(log)):
        d = log[i].bid_price_after - log[i - 1].bid_price_after
        if d == 0.0:
            continue
        out.append((i, d / tick))
    return out, tick


def estimate_replenishment(
    log: Sequence[EventRecord],
    tick: Optional[float] = None,
    pool_symmetric: bool = True,
) -> QueueDist:
    """Histogram of (bid, ask) queue sizes right after a price increase.

    Price changes are detected from consecutive bid_price_after values; the
    tick is inferred from the smallest nonzero move when not given.
    Multi-tick jumps (book gaps) are counted, reported and excluded. With
    pool_symmetric, snapshots after price decreases enter with swapped
    coordinates, which is exact when the down-move law mirrors the up-move
    law.
    """
    changes, tick = _price_changes(log, tick)
    if not changes:
        raise EstimationError("no price changes found in log")
    counts: dict[tuple[int, int], int] = {}
    n_up = n_down = n_jump = n_zero = 0
    for i, move in changes:
        if abs(abs(move) - 1.0) > 0.5:
            n_jump += 1
            continue
        r = log[i]
        if r.bid_queue_after < 1 or r.ask_queue_after < 1:
            n_zero += 1
            continue
        if move > 0:
            key = (r.bid_queue_after, r.ask_queue_after)
            n_up += 1
        else:
            if not pool_symmetric:
                n_down += 1
                continue
            key = (r.ask_queue_after, r.bid_queue_after)
            n_down += 1
        counts[key] = counts.get(key, 0) + 1
    if n_jump:
        warnings.warn(
            f"excluded {n_jump} multi-tick jumps from the replenishment histogram",
            stacklevel=2,
        )
    if n_zero:
        warnings.warn(f"excluded {n_zero} post-change rows with empty queues", stacklevel=2)
    total = sum(counts.values())
    if total == 0:
        raise EstimationError("no usable one-tick price changes in log")
    return QueueDist((i, j, c / total) for (i, j), c in sorted(counts.items()))


def realized_volatility(times, prices, window: float) -> float:
    """Sample standard deviation of non-overlapping window price increments.

    times/prices describe a right-continuous step function (price level as
    of each timestamp, in currency units); window is in seconds. Requires
    the series to span at least two full windows.
    """
    t = np.asarray(times, dtype=float)
    p = np.asarray(prices, dtype=float)
    if t.size == 0 or t.size != p.size:
        raise EstimationError("times and prices must be equal-length and nonempty")
    if window <= 0.0:
        raise ValueError("window must be positive (seconds)")
    n_win = int(t[-1] // window)
    if n_win < 2:
        raise EstimationError(
            f"series spans {t[-1]:.3f} s, need at least two windows of {window} s"
        )
    edges = window * np.arange(0, n_win + 1)
    idx = np.searchsorted(t, edges, side="right") - 1
    levels = np.where(idx >= 0, p[np.maximum(idx, 0)], p[0])
    inc = np.diff(levels)
    return float(np.std(inc, ddof=1))


def _window_index(window: float, span: float, lam: float, depth_f: float) -> float:
    """Window rescaling index n such that pi lam n / D is the expected number
    of price moves per window of a log covering [0, span].

    The move count over the whole span solves N log N = span pi lam / D (the
    heavy-tailed renewal norming of balanced flow); windows then hold the
    span-average share N window / span. For span = window this reduces to
    n log(n pi lam / D) = window. The span dependence matters: move arrivals
    thin out logarithmically along a balanced log, so windows late in a long
    record are quieter than fresh ones.
    """
    ratio = math.pi * lam / depth_f
    big_n = max(span * ratio, 2.0)
    for _ in range(60):
        big_n = span * ratio / math.log(max(big_n, 2.0))
    return big_n * (window / span) / ratio


def predicted_vs_realized(
    log: Sequence[EventRecord] | dict[str, Sequence[EventRecord]],
    window: float,
    tick: Optional[float] = None,
) -> dict:
    """Model-predicted vs realized window volatility from one or more logs.

    Per asset, emits sqrt(lambda_hat / D(f_hat)), the realized window
    standard deviation, the predicted one tick * sqrt(pi n lambda_hat /
    D(f_hat)) with n the self-consistent window index, and their ratios.
    The realized-to-sqrt ratio should sit near the constant
    tick * sqrt(pi n).
    """
    if isinstance(log, dict):
        assets = log
    else:
        assets = {"asset": log}
    rows = []
    for name, records in assets.items():
        if not records:
            raise EstimationError(f"empty log for {name!r}")
        res = estimate_intensities(records)
        f_hat = estimate_replenishment(records, tick=tick)
        changes, tck = _price_changes(records, tick)
        d = float(np.sum(f_hat.bid * f_hat.ask * f_hat.prob))
        times = [r.timestamp for r in records]
        prices = [r.bid_price_after for r in records]
        realized = realized_volatility(times, prices, window)
        n_idx = _window_index(window, res.window[1], res.lambda_hat, d)
        predicted = tck * math.sqrt(math.pi * n_idx * res.lambda_hat / d)
        ratio_base = math.sqrt(res.lambda_hat / d)
        rows.append(
            {
                "asset": name,
                "lambda_hat": res.lambda_hat,
                "mu_theta_hat": res.mu_theta_hat,
                "depth_hat": d,
                "tick": tck,
                "window": window,
                "n_index": n_idx,
                "sqrt_lambda_over_depth": ratio_base,
                "predicted_sigma": predicted,
                "realized_sigma": realized,
                "realized_over_sqrt": realized / ratio_base,
                "expected_ratio_constant": tck * math.sqrt(math.pi * n_idx),
                "realized_over_predicted": realized / predicted,
            }
        )
    return {"window": window, "assets": rows}
