"""Scalar-proxy detection of Milne-like and Kasner-like regimes.

Closeness to a model flow is measured with the scalars that define the model
classes for homogeneous data:

* Kasner: ``n L = 1``, ``t^2 R = 0``, ``|K|^2 = H^2``
* Milne: ``L = 1``, ``K0 = 0``, ``t^2 R = -n (n - 1)``

A score is the largest deviation over the rescaled window ``(eps, 1/eps)``,
i.e. over Hubble times ``[eps t_c, t_c / eps]``.  All analysis is in Hubble
gauge with ``tau = log(t0 / t)``.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .flow_core import FlowError, Gauge, Trajectory, spatial_scalar_curvature, trace_split


class InsufficientDataError(FlowError):
    pass


class Model(str, enum.Enum):
    MILNE = "milne"
    KASNER = "kasner"


# ---------------------------------------------------------------------------
# pointwise and windowed scores


def _require_hubble(traj: Trajectory):
    if traj.gauge is not Gauge.HUBBLE:
        raise FlowError("regime detection works in Hubble-time gauge; reindex first")


def pointwise_scores(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample ``(milne, kasner)`` deviations (no window)."""
    _require_hubble(traj)
    n = traj.n
    milne, kasner = [], []
    for s in traj:
        H, _, k0sq = trace_split(s.second_form, s.metric)
        t2R = s.t * s.t * spatial_scalar_curvature(s.metric)
        ksq_over_h2 = float(np.sum(s.K_hat**2)) / (H * H)
        kasner.append(max(abs(n * s.L - 1), abs(t2R) / n**2, abs(ksq_over_h2 - 1)))
        milne.append(max(abs(s.L - 1), s.t * s.t * k0sq, abs(t2R + n * (n - 1)) / n**2))
    return np.array(milne), np.array(kasner)


def _sliding_max(log_t: np.ndarray, values: np.ndarray, half_width: float) -> np.ndarray:
    # max over |log t_j - log t_i| <= half_width; log_t increasing; monotone deque
    m = len(values)
    out = np.empty(m)
    dq: deque[int] = deque()
    hi = 0
    lo = 0
    for i in range(m):
        while hi < m and log_t[hi] <= log_t[i] + half_width * (1 + 1e-14):
            while dq and values[dq[-1]] <= values[hi]:
                dq.pop()
            dq.append(hi)
            hi += 1
        while log_t[lo] < log_t[i] - half_width * (1 + 1e-14):
            lo += 1
        while dq[0] < lo:
            dq.popleft()
        out[i] = values[dq[0]]
    return out


def windowed_scores(traj: Trajectory, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Milne and Kasner scores at every sample, window clipped to the data."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    milne, kasner = pointwise_scores(traj)
    log_t = np.log(traj.times)
    hw = math.log(1 / eps)
    return _sliding_max(log_t, milne, hw), _sliding_max(log_t, kasner, hw)


def model_closeness(traj: Trajectory, u_center: float, eps: float, model: Model | str) -> float:
    """Score of the flow rescaled at ``u_center`` against the model class on ``(eps, 1/eps)``."""
    model = Model(model)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    t = traj.times
    lo, hi = eps * u_center, u_center / eps
    slack = 1e-12
    if t[0] > lo * (1 + slack) or t[-1] < hi * (1 - slack):
        raise InsufficientDataError(
            f"window [{lo:g}, {hi:g}] is not covered by the trajectory [{t[0]:g}, {t[-1]:g}]")
    milne, kasner = pointwise_scores(traj)
    mask = (t >= lo * (1 - slack)) & (t <= hi * (1 + slack))
    vals = (milne if model is Model.MILNE else kasner)[mask]
    return float(vals.max())


# ---------------------------------------------------------------------------
# epoch set and the interval statistic


@dataclass(frozen=True)
class EpochSet:
    """``S_eps``: closed tau-intervals where the Kasner score exceeds ``eps``."""

    intervals: tuple[tuple[float, float], ...]
    tau_max: float
    eps: float

    def __bool__(self):
        return bool(self.intervals)


def epoch_set(traj: Trajectory, eps: float = 0.05, kasner_scores: np.ndarray | None = None) -> EpochSet:
    """``kasner_scores`` may pass precomputed windowed scores for ``traj``."""
    _require_hubble(traj)
    kasner = windowed_scores(traj, eps)[1] if kasner_scores is None else np.asarray(kasner_scores)
    tau = np.log(traj.t0 / traj.times)
    keep = tau >= -1e-12
    tau, flags = tau[keep], kasner[keep] > eps
    # ascending in tau
    order = np.argsort(tau)
    tau, flags = tau[order], flags[order]
    intervals = []
    start = None
    for i, f in enumerate(flags):
        if f and start is None:
            start = tau[i]
        if not f and start is not None:
            intervals.append((float(max(start, 0.0)), float(max(tau[i - 1], 0.0))))
            start = None
    if start is not None:
        intervals.append((float(max(start, 0.0)), float(tau[-1])))
    return EpochSet(tuple(intervals), float(tau[-1]) if len(tau) else 0.0, eps)


def interval_statistic(S: EpochSet, N: int) -> tuple[int, float]:
    """``F(N)``: number of unit intervals ``[k, k+1]``, ``k < N``, meeting ``S``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if S.tau_max < N - 1e-9:
        raise InsufficientDataError(f"tau range {S.tau_max:.6g} is shorter than N = {N}")
    hit = set()
    for a, b in S.intervals:
        k0 = max(0, math.ceil(a) - 1)
        k1 = min(N - 1, math.floor(b))
        for k in range(k0, k1 + 1):
            if a <= k + 1 and b >= k:
                hit.add(k)
    F = len(hit)
    return F, F / N


def fn_table(S: EpochSet, Ns: Sequence[int] | None = None) -> list[tuple[int, int, float]]:
    """Rows ``(N, F(N), F(N)/N)``; by default powers of two up to the tau range."""
    if Ns is None:
        top = int(math.floor(S.tau_max + 1e-9))
        Ns = [2**k for k in range(0, max(1, top).bit_length()) if 2**k <= top]
    return [(int(N), *interval_statistic(S, int(N))) for N in Ns]


# ---------------------------------------------------------------------------
# volume exponent


def volume_exponent(traj: Trajectory, window: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Sliding least-squares slope of ``log dvol`` against ``log t``.

    ``window`` is the full window width in decades of ``t``.  Returns
    ``(log t of window centres, slopes)``; windows run from the small-t end
    with half-window overlap.
    """
    _require_hubble(traj)
    if not window > 0:
        raise ValueError("window must be positive")
    x = np.log(traj.times)
    y = np.array([0.5 * sum(math.log(v) for v in s.metric.diag) for s in traj])
    width = window * math.log(10)
    if x[-1] - x[0] < width * (1 - 1e-12):
        starts = [x[0]]
        width = x[-1] - x[0]
    else:
        starts = np.arange(x[0], x[-1] - width * (1 - 1e-12), width / 2)
    centres, slopes = [], []
    for a in starts:
        m = (x >= a - 1e-12) & (x <= a + width + 1e-12)
        if m.sum() < 2 or np.ptp(x[m]) == 0:
            raise InsufficientDataError(f"degenerate volume window at log t = {a:.6g}")
        slopes.append(float(np.polyfit(x[m], y[m], 1)[0]))
        centres.append(float(a + width / 2))
    return np.array(centres), np.array(slopes)


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class DetectorConfig:
    eps: float = 0.05
    slope_tol: float = 0.1
    #: excess over slope 1 still accepted as Mixmaster
    beta: float = 0.5
    #: volume window in decades of t
    window: float = 1.0
    #: epoch intervals (after the first) needed to call the flow oscillatory
    min_bounces: int = 2
    Ns: tuple[int, ...] | None = None


@dataclass(frozen=True)
class RegimeReport:
    eps: float
    n: int
    tau: tuple[float, ...]
    milne_score: tuple[float, ...]
    kasner_score: tuple[float, ...]
    epoch_set: tuple[tuple[float, float], ...]
    fn_table: tuple[tuple[int, int, float], ...]
    volume_log_t: tuple[float, ...]
    volume_exponent: tuple[float, ...]
    classification: str
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "n": self.n,
            "classification": self.classification,
            "epoch_set": [list(iv) for iv in self.epoch_set],
            "fn_table": [{"N": N, "F": F, "F_over_N": r} for N, F, r in self.fn_table],
            "volume_exponent": {"log_t": list(self.volume_log_t), "slope": list(self.volume_exponent)},
            "scores": {"tau": list(self.tau), "milne": list(self.milne_score), "kasner": list(self.kasner_score)},
            "checks": self.checks,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def fn_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "F", "F_over_N"])
        for N, F, r in self.fn_table:
            w.writerow([N, F, repr(r)])
        return buf.getvalue()


def classify(n: int, slopes: np.ndarray, S: EpochSet, cfg: DetectorConfig) -> str:
    """Regime hypothesis from the small-t volume slope and the recurrence of S_eps.

    * ``milne``: slope within ``slope_tol`` of ``n``
    * ``mixmaster``: slope in ``[1 - tol, 1 + beta)`` and at least
      ``min_bounces`` epoch intervals after the initial transient
    * ``kasner``: slope within ``slope_tol`` of 1 otherwise
    * ``undetermined``: anything else
    """
    if len(slopes) == 0:
        return "undetermined"
    tail = float(slopes[0])
    if abs(tail - n) <= cfg.slope_tol:
        return "milne"
    later = [iv for iv in S.intervals if iv[0] > 0.0]
    if 1 - cfg.slope_tol <= tail < 1 + cfg.beta and len(later) >= cfg.min_bounces:
        return "mixmaster"
    if abs(tail - 1) <= cfg.slope_tol:
        return "kasner"
    return "undetermined"


def detect(traj: Trajectory, cfg: DetectorConfig | None = None, checks: dict | None = None) -> RegimeReport:
    cfg = cfg or DetectorConfig()
    _require_hubble(traj)
    milne, kasner = windowed_scores(traj, cfg.eps)
    tau = np.log(traj.t0 / traj.times)
    S = epoch_set(traj, cfg.eps, kasner)
    table = fn_table(S, cfg.Ns) if S.tau_max >= 1 else []
    centres, slopes = volume_exponent(traj, cfg.window)
    return RegimeReport(
        eps=cfg.eps,
        n=traj.n,
        tau=tuple(float(x) for x in tau),
        milne_score=tuple(float(x) for x in milne),
        kasner_score=tuple(float(x) for x in kasner),
        epoch_set=S.intervals,
        fn_table=tuple(table),
        volume_log_t=tuple(float(x) for x in centres),
        volume_exponent=tuple(float(x) for x in slopes),
        classification=classify(traj.n, slopes, S, cfg),
        checks=dict(checks or {}),
    )
