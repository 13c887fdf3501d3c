"""Closed-form example families used as oracles and regression fixtures.

Each family produces a :class:`~kasner_lab.flow_core.Trajectory` with exact
lapse, metric and second fundamental form at the requested times.  The two
NUT families have no closed form here; they are integrated as locally
rotationally symmetric Bianchi IX / VIII data (``N2 = N3``, ``Sigma- = 0``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from . import bianchi_ode as wh
from .flow_core import (
    FlowError,
    FlowSample,
    FrameMetric,
    Gauge,
    SecondForm,
    Trajectory,
    hubble_reindex,
)

__all__ = [
    "Family",
    "FamilySpec",
    "DomainError",
    "generate",
    "hubble_reindex",
    "gowdy_exponents",
    "gowdy_asymptotic_checks",
    "kantowski_sachs_mean_curvature",
]


class DomainError(FlowError):
    """Requested time outside the family's domain."""


class Family(str, enum.Enum):
    CONE = "cone"
    CONE_TIMES_TORUS = "cone_times_torus"
    KASNER = "kasner"
    KANTOWSKI_SACHS = "kantowski_sachs"
    TAUB_NUT = "taub_nut"
    BIANCHI_VIII_NUT = "bianchi_viii_nut"
    GOWDY_ASYMPTOTIC = "gowdy_asymptotic"


_DEFAULTS: dict[Family, dict] = {
    Family.CONE: {"n": 3},
    Family.CONE_TIMES_TORUS: {"n": 3, "n_torus": 1},
    Family.KASNER: {"p": [2 / 3, 2 / 3, -1 / 3]},
    Family.KANTOWSKI_SACHS: {"m": 0.5},
    Family.TAUB_NUT: {"n1": 0.1, "n2": 1.0, "sigma_sign": 1},
    Family.BIANCHI_VIII_NUT: {"n1": -0.1, "n2": 0.5, "sigma_sign": 1},
    Family.GOWDY_ASYMPTOTIC: {"pi": 3.0, "alpha": 0.0, "omega": 0.0},
}

#: what the generator's time argument means for each family
TIME_KIND = {
    Family.CONE: "hubble",
    Family.CONE_TIMES_TORUS: "hubble",
    Family.KASNER: "hubble",
    Family.KANTOWSKI_SACHS: "areal",
    Family.TAUB_NUT: "wh_tau",
    Family.BIANCHI_VIII_NUT: "wh_tau",
    Family.GOWDY_ASYMPTOTIC: "gowdy",
}


@dataclass(frozen=True)
class FamilySpec:
    family: Family
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        unknown = set(self.params) - set(_DEFAULTS[fam])
        if unknown:
            raise FlowError(f"unknown parameters for {fam.value}: {sorted(unknown)}")
        p = {**_DEFAULTS[fam], **self.params}
        if fam is Family.CONE:
            if int(p["n"]) < 2:
                raise FlowError("cone needs n >= 2")
            p["n"] = int(p["n"])
        elif fam is Family.CONE_TIMES_TORUS:
            p["n"], p["n_torus"] = int(p["n"]), int(p["n_torus"])
            if not 1 <= p["n_torus"] < p["n"]:
                raise FlowError("cone x torus needs 1 <= n_torus < n")
        elif fam is Family.KASNER:
            ps = [float(x) for x in p["p"]]
            if len(ps) < 2:
                raise FlowError("Kasner needs at least two exponents")
            if abs(sum(ps) - 1) > 1e-12 or abs(sum(x * x for x in ps) - 1) > 1e-12:
                raise FlowError(f"Kasner exponents {ps} violate Tr M = Tr M^2 = 1")
            p["p"] = tuple(ps)
        elif fam is Family.KANTOWSKI_SACHS:
            p["m"] = float(p["m"])
            if not p["m"] > 0:
                raise FlowError("Kantowski-Sachs needs m > 0")
        elif fam in (Family.TAUB_NUT, Family.BIANCHI_VIII_NUT):
            p["n1"], p["n2"], p["sigma_sign"] = float(p["n1"]), float(p["n2"]), int(p["sigma_sign"])
            want = 1.0 if fam is Family.TAUB_NUT else -1.0
            if not (math.copysign(1.0, p["n1"]) == want and p["n1"] != 0 and p["n2"] > 0):
                raise FlowError(f"{fam.value} needs n1 with sign {int(want):+d} and n2 > 0")
            if p["sigma_sign"] not in (-1, 1):
                raise FlowError("sigma_sign must be +1 or -1")
        else:
            p = {k: float(v) for k, v in p.items()}
        object.__setattr__(self, "params", MappingProxyType(p))

    @property
    def n(self) -> int:
        if self.family is Family.KASNER:
            return len(self.params["p"])
        if self.family in (Family.CONE, Family.CONE_TIMES_TORUS):
            return self.params["n"]
        return 3

    def to_dict(self) -> dict:
        return {"family": self.family.value,
                "params": {k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()}}


# ---------------------------------------------------------------------------
# generators


def _check_times(times, lo=0.0, hi=math.inf, what="time"):
    ts = np.asarray(sorted(float(x) for x in times))
    if ts.size == 0:
        raise DomainError("no sample times given")
    if np.any(~np.isfinite(ts)) or ts[0] <= lo or ts[-1] >= hi:
        raise DomainError(f"{what} must lie in ({lo}, {hi}); got [{ts[0]}, {ts[-1]}]")
    return ts


def _flat_curvature(n):
    if n == 3:
        return {"structure": (0, 0, 0)}
    return {"structure": None, "sectional": tuple((0.0,) * n for _ in range(n))}


def _cone(n, times):
    # h = t^2 g_hyp, K = -(1/t) h, L = 1; sectional curvature -1/t^2
    out = []
    for t in _check_times(times):
        sec = tuple(tuple(0.0 if i == j else -1.0 / t**2 for j in range(n)) for i in range(n))
        out.append(FlowSample(1.0, FrameMetric((t * t,) * n, structure=None, sectional=sec),
                              SecondForm((-t,) * n), t, Gauge.HUBBLE))
    return out


def _cone_torus(n, n_torus, times):
    # proper time T = (m/n) t_H on the cone factor of dimension m = n - n'
    m = n - n_torus
    c = m / n
    out = []
    for t in _check_times(times):
        T = c * t
        sec = tuple(tuple(-1.0 / T**2 if (i != j and i < m and j < m) else 0.0 for j in range(n))
                    for i in range(n))
        h = (T * T,) * m + (1.0,) * n_torus
        k = (-T,) * m + (0.0,) * n_torus
        out.append(FlowSample(c, FrameMetric(h, structure=None, sectional=sec), SecondForm(k), t, Gauge.HUBBLE))
    return out


def _kasner(p, times):
    # g = -(1/n^2) dt^2 + sum t^{2 p_i} dx_i^2 ;  K_i = -n p_i t^{2 p_i - 1}
    n = len(p)
    out = []
    for t in _check_times(times):
        h = tuple(t ** (2 * pi) for pi in p)
        k = tuple(-n * pi * t ** (2 * pi - 1) for pi in p)
        out.append(FlowSample(1.0 / n, FrameMetric(h, **_flat_curvature(n)), SecondForm(k), t, Gauge.HUBBLE))
    return out


def kantowski_sachs_mean_curvature(m: float, t: float) -> float:
    """``H = -(3m - 2t) / (t^{3/2} (2m - t)^{1/2})`` in areal time ``t``."""
    return -(3 * m - 2 * t) / (t**1.5 * math.sqrt(2 * m - t))


def _kantowski_sachs(m, times):
    # Schwarzschild interior in areal time: h = (f, t^2, t^2), f = 2m/t - 1, L = f^{-1/2}
    out = []
    for t in _check_times(times, 0.0, 2 * m, "areal time"):
        f = 2 * m / t - 1
        rf = math.sqrt(f)
        sec = ((0.0, 0.0, 0.0), (0.0, 0.0, 1.0 / t**2), (0.0, 1.0 / t**2, 0.0))
        out.append(FlowSample(1.0 / rf, FrameMetric((f, t * t, t * t), structure=None, sectional=sec),
                              SecondForm((m * rf / t**2, -t * rf, -t * rf)), t, Gauge.PROPER))
    return out


def nut_initial_state(spec: FamilySpec, tau: float = 0.0) -> wh.WHState:
    """LRS data ``N2 = N3``, ``Sigma- = 0`` with ``Sigma+`` solved from the constraint."""
    n1, n2 = spec.params["n1"], spec.params["n2"]
    # 3/4 [N1^2 + 2 N2^2 - 2 (2 N1 N2 + N2^2)] = 3/4 (N1^2 - 4 N1 N2)
    rest = 1.0 - 0.75 * (n1 * n1 - 4 * n1 * n2)
    if rest <= 0:
        raise FlowError("NUT parameters leave no room for shear on the constraint surface")
    return wh.WHState.from_values(spec.params["sigma_sign"] * math.sqrt(rest), 0.0, n1, n2, n2, tau=tau)


def _nut(spec, times, opts):
    taus = np.asarray(sorted(float(x) for x in times))
    if taus.size < 2:
        raise DomainError("NUT families need at least two tau values")
    s0 = nut_initial_state(spec, tau=float(taus[-1]))
    o = opts or wh.IntegrationOptions()
    o = wh.IntegrationOptions(**{**o.__dict__, "t_eval": tuple(taus[:-1])})
    states = wh.integrate_wh(s0, (taus[-1], taus[0]), o)
    structure = (1, 1, 1) if spec.family is Family.TAUB_NUT else (-1, 1, 1)
    return list(wh.reconstruct_flow(states, structure=structure)), states


def gowdy_exponents(pi: float) -> tuple[float, float, float]:
    """Limit exponents ``((pi^2 - 1), (2 - 2 pi), (2 + 2 pi)) / (pi^2 + 3)``."""
    d = pi * pi + 3
    return ((pi * pi - 1) / d, (2 - 2 * pi) / d, (2 + 2 * pi) / d)


def _gowdy(pi, alpha, omega, times):
    # g = e^{2a}(-dt^2 + dθ^2) + t (e^W dx^2 + e^{-W} dy^2) with the leading-order
    # a = (1 - pi^2) tau / 4 + alpha, W = pi tau + omega, t = e^{-tau}
    out = []
    for t in _check_times(times, what="Gowdy time"):
        tau = -math.log(t)
        a = (1 - pi * pi) * tau / 4 + alpha
        W = pi * tau + omega
        L = math.exp(a)
        h = (math.exp(2 * a), t * math.exp(W), t * math.exp(-W))
        # d log h_i / dt
        dlog = ((pi * pi - 1) / (2 * t), (1 - pi) / t, (1 + pi) / t)
        k = tuple(-hi * d / (2 * L) for hi, d in zip(h, dlog))
        out.append(FlowSample(L, FrameMetric(h, (0, 0, 0)), SecondForm(k), t, Gauge.PROPER))
    return out


def generate(spec: FamilySpec, times: Sequence[float], opts: "wh.IntegrationOptions | None" = None) -> Trajectory:
    """Trajectory of ``spec`` sampled at ``times`` (interpreted per :data:`TIME_KIND`).

    Cone, cone x torus and Kasner come out in Hubble gauge; Kantowski-Sachs and
    the Gowdy model in their native time (use :func:`hubble_reindex`); the NUT
    families in Wainwright-Hsu time.
    """
    fam = spec.family
    p = spec.params
    meta = {"family": fam.value, "time_kind": TIME_KIND[fam]}
    if fam is Family.CONE:
        samples = _cone(p["n"], times)
    elif fam is Family.CONE_TIMES_TORUS:
        samples = _cone_torus(p["n"], p["n_torus"], times)
    elif fam is Family.KASNER:
        samples = _kasner(p["p"], times)
    elif fam is Family.KANTOWSKI_SACHS:
        samples = _kantowski_sachs(p["m"], times)
    elif fam in (Family.TAUB_NUT, Family.BIANCHI_VIII_NUT):
        samples, _ = _nut(spec, times, opts)
        meta["limit_exponents"] = (1.0, 0.0, 0.0)
    else:
        samples = _gowdy(p["pi"], p["alpha"], p["omega"], times)
        meta["limit_exponents"] = gowdy_exponents(p["pi"])
        meta["limit_model"] = True
    return Trajectory.from_samples(samples, meta=meta)


# ---------------------------------------------------------------------------
# Gowdy report


@dataclass(frozen=True)
class GowdyReport:
    pi: float
    exponents: tuple[float, float, float]
    sum_residual: float
    sum_sq_residual: float
    #: modeled rate in t_H ~ exp(-rate * tau)
    hubble_rate: float
    #: least-squares rate measured on the model trajectory
    hubble_rate_measured: float
    volume_exponent: float
    volume_exponent_measured: float
    #: measured exponents from the reindexed model, max deviation from the formula
    exponent_deviation: float
    limit_model: bool = True

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def gowdy_asymptotic_checks(spec: FamilySpec, tau_range=(5.0, 25.0), samples: int = 41) -> GowdyReport:
    """Limit exponents plus the Hubble-time and volume laws, each measured on
    the leading-order fiber metric as an independent check."""
    if spec.family is not Family.GOWDY_ASYMPTOTIC:
        raise FlowError("gowdy_asymptotic_checks needs a GowdyAsymptotic spec")
    pi = spec.params["pi"]
    ex = gowdy_exponents(pi)
    taus = np.linspace(tau_range[0], tau_range[1], samples)
    traj = hubble_reindex(generate(spec, np.exp(-taus)))
    # reindexing sorts by t_H, which decreases with tau
    tH = traj.times
    tau_sorted = np.sort(taus)[::-1]
    rate = -np.polyfit(tau_sorted, np.log(tH), 1)[0]
    log_dvol = np.array([0.5 * sum(math.log(x) for x in s.metric.diag) for s in traj])
    vol = np.polyfit(np.log(tH), log_dvol, 1)[0]
    measured = traj[0].K_hat / traj[0].H
    dev = float(np.max(np.abs(measured - np.asarray(ex))))
    return GowdyReport(
        pi=pi,
        exponents=ex,
        sum_residual=abs(sum(ex) - 1),
        sum_sq_residual=abs(sum(x * x for x in ex) - 1),
        hubble_rate=(pi * pi + 3) / 4,
        hubble_rate_measured=float(rate),
        volume_exponent=1.0,
        volume_exponent_measured=float(vol),
        exponent_deviation=dev,
    )
