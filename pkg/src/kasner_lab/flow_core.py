"""Data model and gauge-independent diagnostics for homogeneous CMC Einstein flows.

A flow is sampled slice by slice.  Each slice stores the lapse, the diagonal
spatial metric and second fundamental form in a fixed coframe, and the time
coordinate.  Spatial curvature comes either from class-A structure constants
(three dimensions) or from an explicit table of sectional curvatures in the
orthonormal frame (closed-form families such as cones and Kantowski-Sachs).

Sign conventions follow ``dh/dt = -2 L K`` so an expanding flow has ``H < 0``,
and the Hubble time is ``t = -n / H``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid


class FlowError(ValueError):
    """Base class for invalid flow data."""


class InvalidMetricError(FlowError):
    pass


class GaugeError(FlowError):
    pass


class EmptyTrajectoryError(FlowError):
    pass


class Gauge(str, enum.Enum):
    #: natural coordinate time of a closed-form family (not necessarily proper time)
    PROPER = "proper"
    HUBBLE = "hubble"
    #: dimensionless Wainwright-Hsu time, singularity at tau -> -inf
    WH = "wh"


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class FrameMetric:
    """Diagonal metric ``h = sum h_i sigma^i (x) sigma^i``.

    Exactly one curvature source must be given: ``structure`` (class-A sign
    pattern, three dimensions only) or ``sectional`` (symmetric table of
    orthonormal-frame sectional curvatures, zero diagonal).
    """

    diag: tuple[float, ...]
    structure: tuple[int, int, int] | None = (0, 0, 0)
    sectional: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        diag = tuple(float(x) for x in self.diag)
        object.__setattr__(self, "diag", diag)
        if not diag or not all(math.isfinite(x) and x > 0 for x in diag):
            raise InvalidMetricError(f"metric entries must be positive and finite, got {diag}")
        if (self.structure is None) == (self.sectional is None):
            raise InvalidMetricError("give exactly one of structure / sectional")
        if self.structure is not None:
            st = tuple(int(s) for s in self.structure)
            if len(st) != 3 or len(diag) != 3 or any(s not in (-1, 0, 1) for s in st):
                raise InvalidMetricError(f"invalid class-A pattern {self.structure} for {len(diag)}-d metric")
            object.__setattr__(self, "structure", st)
        else:
            sec = tuple(tuple(float(x) for x in row) for row in self.sectional)
            n = len(diag)
            if len(sec) != n or any(len(row) != n for row in sec):
                raise InvalidMetricError("sectional table must be n x n")
            for i, j in itertools.product(range(n), repeat=2):
                if sec[i][j] != sec[j][i] or (i == j and sec[i][i] != 0.0):
                    raise InvalidMetricError("sectional table must be symmetric with zero diagonal")
            object.__setattr__(self, "sectional", sec)

    @property
    def n(self) -> int:
        return len(self.diag)

    @property
    def dvol(self) -> float:
        return math.exp(0.5 * sum(math.log(x) for x in self.diag))

    @property
    def bianchi_type(self) -> str | None:
        if self.structure is None:
            return None
        key = tuple(sorted(abs(s) for s in self.structure))
        nonzero = [s for s in self.structure if s]
        if key == (0, 0, 0):
            return "I"
        if key == (0, 0, 1):
            return "II"
        if key == (0, 1, 1):
            return "VII0" if nonzero[0] == nonzero[1] else "VI0"
        return "IX" if len(set(nonzero)) == 1 else "VIII"


@dataclass(frozen=True)
class SecondForm:
    diag: tuple[float, ...]

    def __post_init__(self):
        diag = tuple(float(x) for x in self.diag)
        if not all(math.isfinite(x) for x in diag):
            raise FlowError(f"second fundamental form must be finite, got {diag}")
        object.__setattr__(self, "diag", diag)


@dataclass(frozen=True)
class FlowSample:
    L: float
    metric: FrameMetric
    second_form: SecondForm
    t: float
    gauge: Gauge = Gauge.HUBBLE

    def __post_init__(self):
        if not (self.L > 0 and math.isfinite(self.L)):
            raise FlowError(f"lapse must be positive, got {self.L}")
        if len(self.second_form.diag) != self.metric.n:
            raise FlowError("metric and second form have different dimensions")
        object.__setattr__(self, "gauge", Gauge(self.gauge))
        if self.gauge is Gauge.HUBBLE:
            if not self.t > 0:
                raise GaugeError("Hubble time must be positive")
            H = mean_curvature(self.second_form, self.metric)
            n = self.metric.n
            if not math.isclose(H * self.t, -n, rel_tol=1e-9):
                raise GaugeError(f"Hubble gauge requires H = -n/t; got H*t = {H * self.t}")

    @property
    def n(self) -> int:
        return self.metric.n

    @property
    def H(self) -> float:
        return mean_curvature(self.second_form, self.metric)

    @property
    def K_hat(self) -> np.ndarray:
        """Eigenvalues of K with respect to h (orthonormal-frame components)."""
        return np.asarray(self.second_form.diag) / np.asarray(self.metric.diag)


@dataclass(frozen=True)
class Trajectory:
    """Samples ordered by strictly increasing time, all in one gauge."""

    samples: tuple[FlowSample, ...]
    t0: float | None = None
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        samples = tuple(self.samples)
        if not samples:
            raise EmptyTrajectoryError("trajectory has no samples")
        gauges = {s.gauge for s in samples}
        if len(gauges) != 1:
            raise GaugeError(f"mixed gauges in one trajectory: {sorted(g.value for g in gauges)}")
        if len({s.n for s in samples}) != 1:
            raise FlowError("mixed spatial dimensions in one trajectory")
        ts = [s.t for s in samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise FlowError("trajectory times must be strictly increasing")
        object.__setattr__(self, "samples", samples)
        if self.t0 is None:
            object.__setattr__(self, "t0", ts[-1])
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    @property
    def n(self) -> int:
        return self.samples[0].n

    @property
    def gauge(self) -> Gauge:
        return self.samples[0].gauge

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @classmethod
    def from_samples(cls, samples: Iterable[FlowSample], t0=None, meta=None) -> "Trajectory":
        """Build a trajectory from samples in any time order."""
        ordered = sorted(samples, key=lambda s: s.t)
        return cls(tuple(ordered), t0=t0, meta=meta or {})


# ---------------------------------------------------------------------------
# algebra on a slice


def mean_curvature(k: SecondForm, h: FrameMetric) -> float:
    return float(sum(ki / hi for ki, hi in zip(k.diag, h.diag)))


def trace_split(k: SecondForm, h: FrameMetric) -> tuple[float, SecondForm, float]:
    """Return ``(H, K0, |K0|^2)`` with ``K0 = K - (H/n) h``."""
    if not isinstance(h, FrameMetric):
        h = FrameMetric(tuple(h))
    n = h.n
    H = mean_curvature(k, h)
    k0 = tuple(ki - H / n * hi for ki, hi in zip(k.diag, h.diag))
    k0_hat = [a / b for a, b in zip(k0, h.diag)]
    # subtract the mean again so the traceless part is exact in floating point
    mean = sum(k0_hat) / n
    k0_hat = [x - mean for x in k0_hat]
    k0 = tuple(x * hi for x, hi in zip(k0_hat, h.diag))
    return H, SecondForm(k0), float(sum(x * x for x in k0_hat))


def kasner_exponents_of(sample: FlowSample) -> np.ndarray:
    """Instantaneous exponents ``K_hat_i / H`` (sum to one)."""
    return sample.K_hat / sample.H


# ---------------------------------------------------------------------------
# spatial curvature


_EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k in itertools.permutations(range(3)):
    _EPS3[_i, _j, _k] = np.linalg.det(np.eye(3)[[_i, _j, _k]])


def structure_constants_on(h: FrameMetric) -> np.ndarray:
    """Orthonormal-frame structure constants ``n_i = n_hat_i h_i / sqrt(det h)``."""
    d = np.asarray(h.diag)
    return np.asarray(h.structure, dtype=float) * d / math.sqrt(float(np.prod(d)))


def _connection(n_on: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # [e_i, e_j] = eps_ijk n_k e_k ; c[i, j, k] = <[e_i, e_j], e_k>
    c = _EPS3 * n_on[None, None, :]
    # Koszul with constant frame products: 2 G_ijk = c_ijk - c_jki + c_kij
    gamma = 0.5 * (c - np.einsum("jki->ijk", c) + np.einsum("kij->ijk", c))
    return c, gamma


def riemann_on(h: FrameMetric) -> np.ndarray:
    """Spatial Riemann tensor ``R[i,j,k,l] = <R(e_i,e_j)e_k, e_l>`` in the orthonormal frame.

    With this ordering the sectional curvature of the (i, j) plane is ``R[i,j,j,i]``.
    """
    n = h.n
    if h.structure is None:
        sec = np.asarray(h.sectional)
        R = np.zeros((n, n, n, n))
        for i, j in itertools.permutations(range(n), 2):
            R[i, j, j, i] = sec[i, j]
            R[i, j, i, j] = -sec[i, j]
        return R
    c, G = _connection(structure_constants_on(h))
    # R(e_i,e_j)e_k = (G_jkm G_imp - G_ikm G_jmp - c_ijm G_mkp) e_p
    return (np.einsum("jkm,imp->ijkp", G, G)
            - np.einsum("ikm,jmp->ijkp", G, G)
            - np.einsum("ijm,mkp->ijkp", c, G))


def ricci_on(h: FrameMetric) -> np.ndarray:
    return np.einsum("ijki->jk", riemann_on(h))


def spatial_scalar_curvature(h: FrameMetric) -> float:
    """Scalar curvature of the homogeneous metric.

    For class-A data this is ``-(1/2)[sum n_i^2 - 2 sum_{i<j} n_i n_j]`` in terms
    of the orthonormal-frame structure constants.
    """
    if h.structure is None:
        sec = np.asarray(h.sectional)
        return float(sec.sum())
    n1, n2, n3 = structure_constants_on(h)
    return float(-0.5 * (n1 * n1 + n2 * n2 + n3 * n3 - 2.0 * (n1 * n2 + n2 * n3 + n3 * n1)))


def constraint_residual(s: FlowSample, R: float | None = None) -> float:
    """Hamiltonian constraint ``R - |K0|^2 + (1 - 1/n) H^2``.

    The momentum constraint vanishes identically for diagonal data and is not
    evaluated.
    """
    if R is None:
        R = spatial_scalar_curvature(s.metric)
    H, _, k0sq = trace_split(s.second_form, s.metric)
    n = s.n
    return float(R - k0sq + (1.0 - 1.0 / n) * H * H)


def constraint_scale(s: FlowSample, R: float | None = None) -> float:
    """Natural magnitude ``|R| + |K0|^2 + H^2`` for relative constraint checks."""
    if R is None:
        R = spatial_scalar_curvature(s.metric)
    H, _, k0sq = trace_split(s.second_form, s.metric)
    return abs(R) + k0sq + H * H


def hubble_lapse_homogeneous(R: float, t: float, n: int = 3) -> float:
    """Exact lapse in Hubble-time gauge for a spatially homogeneous flow.

    Follows from ``dH/dt = L (H^2 + R)`` with ``H = -n/t``.
    """
    denom = n * n + t * t * R
    if not denom > 0:
        raise GaugeError(f"Hubble gauge breaks down: n^2 + t^2 R = {denom}")
    return n / denom


# ---------------------------------------------------------------------------
# trajectory operations


def rescale_sample(s: FlowSample, scale: float) -> FlowSample:
    h = s.metric
    metric = replace(
        h,
        diag=tuple(x / scale**2 for x in h.diag),
        sectional=None if h.sectional is None else tuple(tuple(x * scale**2 for x in row) for row in h.sectional),
    )
    return FlowSample(
        L=s.L,
        metric=metric,
        second_form=SecondForm(tuple(x / scale for x in s.second_form.diag)),
        t=s.t / scale,
        gauge=s.gauge,
    )


def rescale_flow(traj: Trajectory, s: float, window: tuple[float, float] | None = None) -> Trajectory:
    """Rescaled flow ``E_s``: ``L_s(u) = L(su)``, ``h_s(u) = h(su)/s^2``, ``K_s(u) = K(su)/s``.

    ``window`` optionally restricts the result to rescaled times ``u`` in
    ``[u_min, u_max]``.
    """
    if not s > 0:
        raise ValueError("scale must be positive")
    if traj.gauge is Gauge.WH:
        raise GaugeError("rescaling needs a time coordinate that scales; reindex to Hubble time first")
    samples = [rescale_sample(x, s) for x in traj]
    if window is not None:
        lo, hi = window
        samples = [x for x in samples if lo <= x.t <= hi]
    if not samples:
        raise EmptyTrajectoryError("no samples of the rescaled flow fall inside the requested window")
    return Trajectory(tuple(samples), t0=traj.t0 / s, meta=traj.meta)


def hubble_reindex(traj: Trajectory) -> Trajectory:
    """Reparametrize a homogeneous flow by Hubble time ``t = -n/H``.

    The lapse for the new time is exact: ``L = n / (n^2 + t^2 R)``.
    """
    n = traj.n
    Hs = np.array([x.H for x in traj])
    if np.any(Hs >= 0):
        raise GaugeError("Hubble time needs H < 0 on every slice")
    dH = np.diff(Hs)
    if len(dH) and not (np.all(dH > 0) or np.all(dH < 0)):
        raise GaugeError("H is not monotone along the trajectory")
    out = []
    for x, H in zip(traj, Hs):
        t = -n / H
        R = spatial_scalar_curvature(x.metric)
        L = hubble_lapse_homogeneous(R, t, n)
        # H * t = -n to round-off; rebuild t from H so the gauge check is exact
        out.append(FlowSample(L=L, metric=x.metric, second_form=x.second_form, t=t, gauge=Gauge.HUBBLE))
    return Trajectory.from_samples(out, meta=traj.meta)


@dataclass(frozen=True)
class MonotoneDensities:
    """Per-sample monotone quantities along a Hubble-gauge trajectory.

    Densities are normalized to one at ``t0`` and stored as logs because the
    Milne density of a long run overflows a double.
    """

    t: np.ndarray
    log_milne_density: np.ndarray
    log_kasner_density: np.ndarray
    milne_defect: np.ndarray
    kasner_defect: np.ndarray
    #: |Simpson - trapezoid| on the defects, a conservative quadrature error bound
    quadrature_error: float

    @property
    def milne_density(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_milne_density)

    @property
    def kasner_density(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_kasner_density)

    def identity_gaps(self) -> tuple[float, float]:
        """Max of ``|log md - milne_defect|`` and ``|log kd + kasner_defect|``."""
        return (float(np.max(np.abs(self.log_milne_density - self.milne_defect))),
                float(np.max(np.abs(self.log_kasner_density + self.kasner_defect))))


def _cumulative_from_top(y: np.ndarray, x: np.ndarray, simpson: bool = False) -> np.ndarray:
    # integral from x[i] to x[-1]
    if len(x) < 2:
        return np.zeros_like(x)
    if simpson and len(x) >= 3:
        fwd = cumulative_simpson(y, x=x, initial=0.0)
    else:
        fwd = cumulative_trapezoid(y, x=x, initial=0.0)
    return fwd[-1] - fwd


def monotone_densities(traj: Trajectory) -> MonotoneDensities:
    """Milne/Kasner densities and their defect integrals in log t.

    ``log md = milne_defect`` and ``log kd = -kasner_defect`` hold up to
    quadrature error.  Defects use cumulative Simpson; the trapezoid rule is
    evaluated alongside as the error estimate.
    """
    if traj.gauge is not Gauge.HUBBLE:
        raise GaugeError("monotone densities are defined in Hubble-time gauge")
    n = traj.n
    t = traj.times
    log_t = np.log(t)
    log_dvol = np.array([0.5 * sum(math.log(x) for x in s.metric.diag) for s in traj])
    L = np.array([s.L for s in traj])
    ref = int(np.argmin(np.abs(t - traj.t0)))
    log_md = (log_dvol - log_dvol[ref]) - n * (log_t - log_t[ref])
    log_kd = (log_dvol - log_dvol[ref]) - (log_t - log_t[ref])
    md_t = n * _cumulative_from_top(1.0 - L, log_t)
    kd_t = n * _cumulative_from_top(L - 1.0 / n, log_t)
    md = n * _cumulative_from_top(1.0 - L, log_t, simpson=True)
    kd = n * _cumulative_from_top(L - 1.0 / n, log_t, simpson=True)
    # re-anchor the defects at t0 when t0 is not the last sample
    md, kd, md_t, kd_t = (a - a[ref] for a in (md, kd, md_t, kd_t))
    err = float(max(np.max(np.abs(md - md_t)), np.max(np.abs(kd - kd_t))))
    return MonotoneDensities(t, log_md, log_kd, md, kd, err)


# ---------------------------------------------------------------------------
# spacetime curvature


def _norm(arr: np.ndarray) -> float:
    m = float(np.max(np.abs(arr))) if arr.size else 0.0
    if m == 0.0:
        return 0.0
    return m * float(np.sqrt(np.sum((arr / m) ** 2)))


def spacetime_riemann_T(s: FlowSample, k_dot: Sequence[float] | None = None,
                        rtol: float = 1e-8) -> np.ndarray:
    """Spacetime Riemann tensor in the frame ``(T, e_1, ..., e_n)``.

    Spatial block from the Gauss equation, mixed block from Codazzi (computed
    from the frame connection; it vanishes for explicit-curvature families),
    and the ``R_{0i0j}`` block from the vacuum condition.  When ``k_dot`` (the
    coordinate rate ``dK_i/dt`` in the sample's gauge) is supplied, the
    ``R_{0i0j}`` block is taken from the evolution equation instead and
    checked against the vacuum value.
    """
    h = s.metric
    n = h.n
    kh = s.K_hat
    H = float(kh.sum())
    Rs = riemann_on(h)
    K = np.diag(kh)
    R4 = np.zeros((n + 1,) * 4)
    # Gauss: R4_ijkl = R_ijkl + K_il K_jk - K_ik K_jl  (R_ijji = sectional)
    R4[1:, 1:, 1:, 1:] = Rs + np.einsum("il,jk->ijkl", K, K) - np.einsum("ik,jl->ijkl", K, K)
    # Codazzi: B_ijk = (nabla_j K)_ik - (nabla_k K)_ij, with e_j(K) = 0 on a homogeneous slice
    if h.structure is not None:
        _, G = _connection(structure_constants_on(h))
        dK = -np.einsum("jim,mk->jik", G, K) - np.einsum("jkm,im->jik", G, K)
        B = dK.transpose(1, 0, 2) - dK.transpose(1, 2, 0)
    else:
        B = np.zeros((n, n, n))
    # electric part from Ric4 = 0: E_ij = R_ij + H K_ij - (K K)_ij
    ric = np.einsum("ijki->jk", Rs)
    E = ric + H * K - K @ K
    if k_dot is not None:
        kd = np.asarray(k_dot, dtype=float)
        if kd.shape != (n,):
            raise GaugeError("k_dot must have one entry per frame direction")
        E_evo = np.diag(kd / (s.L * np.asarray(h.diag)) + kh * kh)
        scale = _norm(E) + _norm(K @ K) + abs(H) ** 2
        if _norm(E_evo - E) > rtol * scale:
            raise GaugeError("k_dot is inconsistent with the sample's lapse and the evolution equations")
        E = E_evo
    R4[0, 1:, 0, 1:] = E
    R4[1:, 0, 1:, 0] = E
    R4[0, 1:, 1:, 0] = -E
    R4[1:, 0, 0, 1:] = -E
    R4[0, 1:, 1:, 1:] = B
    R4[1:, 0, 1:, 1:] = -B
    R4[1:, 1:, 0, 1:] = B.transpose(1, 2, 0)
    R4[1:, 1:, 1:, 0] = -B.transpose(1, 2, 0)
    return R4


def curvature_norm_T(s: FlowSample, k_dot: Sequence[float] | None = None) -> float:
    """``|Rm|_T``: Euclidean norm of the spacetime curvature in the frame adapted to T."""
    return _norm(spacetime_riemann_T(s, k_dot))


def scale_invariants(s: FlowSample) -> dict[str, float]:
    """Scale-invariant scalars of a Hubble-gauge sample."""
    H, _, k0sq = trace_split(s.second_form, s.metric)
    t = s.t
    R = spatial_scalar_curvature(s.metric)
    ksq = float(np.sum(s.K_hat**2))
    return {
        "L": s.L,
        "t2R": t * t * R,
        "t2K2": t * t * ksq,
        "t2K0sq": t * t * k0sq,
        "t2Rm": t * t * curvature_norm_T(s),
    }
