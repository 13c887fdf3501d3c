"""Wainwright-Hsu dynamics for vacuum Bianchi class-A flows.

Variables are the expansion-normalized shear ``(Sigma+, Sigma-)``, the
normalized structure variables ``(N1, N2, N3)``, the expansion
``theta = -H`` (kept as ``log theta``) and the dimensionless time ``tau``
with ``dt/dtau = 3/theta``.  The singularity sits at ``tau -> -inf``.

The evolution system::

    N1'  = (q - 4 S+) N1
    N2'  = (q + 2 S+ + 2 sqrt3 S-) N2
    N3'  = (q + 2 S+ - 2 sqrt3 S-) N3
    S+'  = -(2 - q) S+ - 3 s+
    S-'  = -(2 - q) S- - 3 s-
    (log theta)' = -(1 + q)

with ``q = 2 (S+^2 + S-^2)``, ``s+ = [(N2 - N3)^2 - N1 (2 N1 - N2 - N3)] / 2``,
``s- = sqrt3/2 (N3 - N2)(N1 - N2 - N3)`` and the vacuum constraint
``S+^2 + S-^2 + 3/4 [sum N_i^2 - 2 sum_{i<j} N_i N_j] = 1``.

Internally the integrator carries ``log|N_i|`` with a frozen sign pattern:
near the Kasner circle the inactive ``N_i`` decay like ``exp(-c |tau|)`` and
would underflow a double within a handful of Kasner epochs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import brentq

from . import _rk
from .flow_core import (
    FlowError,
    FlowSample,
    FrameMetric,
    Gauge,
    SecondForm,
    Trajectory,
    mean_curvature,
    structure_constants_on,
)

SQRT3 = math.sqrt(3.0)

#: unit vectors e_i with Sigma_i = -2 <Sigma, e_i>; Taub points are -e_i
_E = np.array([[1.0, 0.0], [-0.5, -SQRT3 / 2], [-0.5, SQRT3 / 2]])
TAUB_POINTS = tuple(tuple(-e) for e in _E)


class WHError(FlowError):
    pass


class ConstraintViolation(WHError):
    pass


class IntegrityError(WHError):
    """Constraint drift above the hard cap during integration."""

    def __init__(self, msg, last_state=None):
        super().__init__(msg)
        self.last_state = last_state


class StiffnessError(WHError):
    """Step size underflow; carries the last accepted state."""

    def __init__(self, msg, last_state=None):
        super().__init__(msg)
        self.last_state = last_state


class SignPatternError(WHError):
    pass


class TaubPointError(WHError):
    """The Kasner map is undefined at the Taub points."""


# ---------------------------------------------------------------------------
# state


@dataclass(frozen=True)
class WHState:
    sigma_plus: float
    sigma_minus: float
    log_abs_n: tuple[float, float, float]
    signs: tuple[int, int, int]
    log_theta: float
    tau: float = 0.0

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if any(s not in (-1, 0, 1) for s in signs):
            raise WHError(f"invalid sign pattern {self.signs}")
        logs = tuple(-math.inf if s == 0 else float(v) for s, v in zip(signs, self.log_abs_n))
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "log_abs_n", logs)

    @classmethod
    def from_values(cls, sigma_plus, sigma_minus, n1, n2, n3, log_theta=0.0, tau=0.0) -> "WHState":
        ns = (n1, n2, n3)
        signs = tuple(int(np.sign(x)) for x in ns)
        logs = tuple(math.log(abs(x)) if x != 0 else -math.inf for x in ns)
        return cls(float(sigma_plus), float(sigma_minus), logs, signs, float(log_theta), float(tau))

    @property
    def n(self) -> tuple[float, float, float]:
        return tuple(s * math.exp(v) if s else 0.0 for s, v in zip(self.signs, self.log_abs_n))

    @property
    def n1(self) -> float:
        return self.n[0]

    @property
    def n2(self) -> float:
        return self.n[1]

    @property
    def n3(self) -> float:
        return self.n[2]

    @property
    def theta(self) -> float:
        return math.exp(self.log_theta)

    @property
    def q(self) -> float:
        return 2.0 * (self.sigma_plus**2 + self.sigma_minus**2)

    @property
    def sigma(self) -> tuple[float, float]:
        return (self.sigma_plus, self.sigma_minus)

    def constraint(self) -> float:
        return wh_constraint(self.sigma_plus, self.sigma_minus, *self.n)


def wh_constraint(sp, sm, n1, n2, n3) -> float:
    return sp * sp + sm * sm + 0.75 * (n1 * n1 + n2 * n2 + n3 * n3 - 2.0 * (n1 * n2 + n2 * n3 + n3 * n1)) - 1.0


def _constraint_grad(sp, sm, n1, n2, n3) -> np.ndarray:
    return np.array([2 * sp, 2 * sm, 1.5 * (n1 - n2 - n3), 1.5 * (n2 - n1 - n3), 1.5 * (n3 - n1 - n2)])


def wh_rhs(s: WHState) -> np.ndarray:
    """Rate ``d/dtau`` of ``(S+, S-, N1, N2, N3, log theta)``."""
    sp, sm = s.sigma_plus, s.sigma_minus
    n1, n2, n3 = s.n
    q = 2.0 * (sp * sp + sm * sm)
    s_p = 0.5 * ((n2 - n3) ** 2 - n1 * (2 * n1 - n2 - n3))
    s_m = 0.5 * SQRT3 * (n3 - n2) * (n1 - n2 - n3)
    return np.array([
        -(2 - q) * sp - 3 * s_p,
        -(2 - q) * sm - 3 * s_m,
        (q - 4 * sp) * n1,
        (q + 2 * sp + 2 * SQRT3 * sm) * n2,
        (q + 2 * sp - 2 * SQRT3 * sm) * n3,
        -(1 + q),
    ])


def wh_scalar_curvature(s: WHState) -> float:
    """Normalized spatial scalar curvature ``R / H^2``; ``R = (R/H^2) theta^2``."""
    n1, n2, n3 = s.n
    return -0.5 * (n1 * n1 + n2 * n2 + n3 * n3 - 2.0 * (n1 * n2 + n2 * n3 + n3 * n1))


# ---------------------------------------------------------------------------
# Kasner exponents and the circle


@dataclass(frozen=True)
class KasnerExponents:
    p1: float
    p2: float
    p3: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p1, self.p2, self.p3)

    @property
    def sum(self) -> float:
        return self.p1 + self.p2 + self.p3

    @property
    def sum_sq(self) -> float:
        return self.p1**2 + self.p2**2 + self.p3**2

    def is_kasner(self, tol: float = 1e-12) -> bool:
        return abs(self.sum - 1) <= tol and abs(self.sum_sq - 1) <= tol


def sigma_to_exponents(sigma_plus: float, sigma_minus: float) -> KasnerExponents:
    """Exponents ``p_i = (1 + Sigma_i)/3``.  Sum is always one; the sum of
    squares is one only on the Kasner circle."""
    return KasnerExponents(
        (1 - 2 * sigma_plus) / 3,
        (1 + sigma_plus + SQRT3 * sigma_minus) / 3,
        (1 + sigma_plus - SQRT3 * sigma_minus) / 3,
    )


def exponents_to_sigma(p) -> tuple[float, float]:
    p = p.as_tuple() if isinstance(p, KasnerExponents) else tuple(p)
    return ((1 - 3 * p[0]) / 2, SQRT3 * (p[1] - p[2]) / 2)


def u_exponents(u: float) -> tuple[float, float, float]:
    """Ordered exponents ``(p_neg, p_mid, p_max)`` of the u-parametrization, ``u >= 1``."""
    if math.isinf(u):
        return (0.0, 0.0, 1.0)
    d = 1 + u + u * u
    return (-u / d, (1 + u) / d, u * (1 + u) / d)


def circle_to_u(point) -> tuple[tuple[int, int, int], float]:
    """Sector bookkeeping: ``(perm, u)`` where ``perm = (a, b, c)`` lists the
    frame directions carrying the negative, middle and largest exponent."""
    p = sigma_to_exponents(*point).as_tuple()
    a, b, c = (int(i) for i in np.argsort(p, kind="stable"))
    if p[b] <= 0 or is_taub_point(point):
        return (a, b, c), math.inf
    return (a, b, c), p[c] / p[b]


def u_to_circle(perm: Sequence[int], u: float) -> tuple[float, float]:
    p = [0.0, 0.0, 0.0]
    for idx, val in zip(perm, u_exponents(u)):
        p[idx] = val
    return exponents_to_sigma(p)


def kasner_u_map(u: float) -> float:
    """BKL map on the u-parameter: ``u - 1`` for ``u >= 2``, ``1/(u - 1)`` below."""
    if u < 1:
        raise ValueError("u must be >= 1")
    if u >= 2:
        return u - 1
    if u == 1:
        return math.inf
    return 1.0 / (u - 1)


def is_taub_point(point, tol: float = 1e-12) -> bool:
    return any(math.hypot(point[0] - t[0], point[1] - t[1]) <= tol for t in TAUB_POINTS)


def kasner_map_step(point, tol: float = 1e-12) -> tuple[float, float]:
    """One Kasner epoch change toward the singularity.

    ``point`` is a circle point ``(Sigma+, Sigma-)``.  The direction with the
    negative exponent bounces: for ``u >= 2`` it swaps with the middle
    direction and ``u -> u - 1``; for ``u < 2`` (an era change) the exponents
    cycle ``(a, b, c) -> (b, c, a)`` and ``u -> 1/(u - 1)``.
    """
    if is_taub_point(point, tol):
        raise TaubPointError(f"Kasner map undefined at Taub point {tuple(point)}")
    (a, b, c), u = circle_to_u(point)
    if u >= 2:
        return u_to_circle((b, a, c), u - 1)
    return u_to_circle((b, c, a), kasner_u_map(u))


def kasner_map_chord(point) -> tuple[float, float]:
    """Same map written geometrically: second intersection of the circle with
    the line through ``2 e_a`` and ``point`` (``a`` = negative-exponent axis)."""
    p = np.asarray(point, dtype=float)
    a = int(np.argmin(sigma_to_exponents(*p).as_tuple()))
    c = 2 * _E[a]
    d = p - c
    img = c + 3.0 / float(d @ d) * d
    return (float(img[0]), float(img[1]))


def _angle_map(phi: float) -> float:
    # continuous extension: Taub points are fixed
    pt = (math.cos(phi), math.sin(phi))
    if is_taub_point(pt, 1e-14):
        return phi
    q = kasner_map_chord(pt)
    return math.atan2(q[1], q[0])


def _wrap(x):
    return (x + math.pi) % (2 * math.pi) - math.pi


def _iterate_angle(phi: float, k: int) -> float:
    for _ in range(k):
        phi = _angle_map(phi)
    return phi


def all_periodic_orbits(period: int, mesh: int | None = None) -> list[list[tuple[float, float]]]:
    """All Kasner-map cycles of exact minimal ``period`` (Taub points excluded).

    Roots of ``f^k(phi) - phi`` are bracketed on an angle mesh and polished
    with Brent's method.
    """
    if period < 2:
        raise ValueError("period must be >= 2 (the only fixed points are the Taub points)")
    mesh = mesh or min(4_000 * 3**period, 2_000_000)
    phis = np.linspace(-math.pi, math.pi, mesh, endpoint=False)
    g = np.array([_wrap(_iterate_angle(x, period) - x) for x in phis])
    roots = []
    for i in range(mesh):
        g0, g1 = g[i], g[(i + 1) % mesh]
        x0 = phis[i]
        x1 = phis[i + 1] if i + 1 < mesh else math.pi
        if g0 == 0.0:
            roots.append(x0)
            continue
        if np.sign(g0) != np.sign(g1) and abs(g1 - g0) < math.pi:
            fn = lambda x: _wrap(_iterate_angle(x, period) - x)  # noqa: E731
            roots.append(brentq(fn, x0, x1, xtol=1e-15, rtol=1e-15, maxiter=200))
    orbits, seen = [], []
    for r in roots:
        pt = (math.cos(r), math.sin(r))
        if is_taub_point(pt, 1e-9):
            continue
        # reject roots whose minimal period divides k
        if any(abs(_wrap(_iterate_angle(r, d) - r)) < 1e-8 for d in range(1, period) if period % d == 0):
            continue
        if any(abs(_wrap(r - s)) < 1e-8 for s in seen):
            continue
        orbit_angles = [r]
        for _ in range(period - 1):
            orbit_angles.append(_angle_map(orbit_angles[-1]))
        seen.extend(orbit_angles)
        orbits.append([(math.cos(x), math.sin(x)) for x in orbit_angles])
    return orbits


def find_periodic_orbit(period: int) -> list[tuple[float, float]]:
    """One Kasner-map cycle of exact period, or ``[]`` when none exists.

    Orbits are normalized to start at the point with the smallest ``u``,
    ties broken by angle; among several cycles the first in that order wins.
    """
    orbits = all_periodic_orbits(period)
    if not orbits:
        return []

    def key(orbit):
        us = [circle_to_u(p)[1] for p in orbit]
        i = min(range(len(orbit)), key=lambda j: (round(us[j], 9), math.atan2(orbit[j][1], orbit[j][0])))
        return i, (round(us[i], 9), math.atan2(orbit[i][1], orbit[i][0]))

    best = min(orbits, key=lambda o: key(o)[1])
    i = key(best)[0]
    return best[i:] + best[:i]


GOLDEN = (1 + math.sqrt(5)) / 2


def golden_cycle() -> list[tuple[float, float]]:
    """The Kasner cycle through ``u = (1 + sqrt5)/2`` starting in the sector (0, 1, 2)."""
    pts = [u_to_circle((0, 1, 2), GOLDEN)]
    for _ in range(2):
        pts.append(kasner_map_step(pts[-1]))
    return pts


# ---------------------------------------------------------------------------
# heteroclinic cycles


@dataclass(frozen=True)
class BianchiIIArc:
    """Bianchi II orbit with a single active ``N_i``.

    The orbit is the chord through the corner ``c = 2 e_i``; with ``rho`` the
    distance from the corner, ``drho/dtau = 2 rho (rho - r1)(rho - r2)``, where
    ``r1 < r2`` are the distances to the two circle points (``r1 r2 = 3``).
    ``tau -> +inf`` gives the near point ``start``; ``tau -> -inf`` gives the
    far point ``end``, its Kasner-map image.
    """

    active: int
    start: tuple[float, float]
    end: tuple[float, float]
    sign: int = 1

    @property
    def corner(self) -> np.ndarray:
        return 2 * _E[self.active]

    @property
    def _geometry(self):
        c = self.corner
        d = np.asarray(self.start) - c
        r1 = float(np.hypot(*d))
        return c, d / r1, r1, 3.0 / r1

    def _log_odds(self, rho: float) -> float:
        _, _, r1, r2 = self._geometry
        return math.log((rho - r1) / (r2 - rho))

    def _tau_of_z(self, z: float) -> float:
        # rho = r1 + (r2 - r1) s with s = 1/(1 + exp(-z)); logs kept exact at both ends
        _, _, r1, r2 = self._geometry
        log_s = -float(np.logaddexp(0.0, -z))
        log_1ms = -float(np.logaddexp(0.0, z))
        rho = r1 + (r2 - r1) * math.exp(log_s)
        return 0.5 * (math.log(rho) / (r1 * r2)
                      + log_s / (r1 * (r1 - r2))
                      + log_1ms / (r2 * (r2 - r1)))

    def tau_of_rho(self, rho: float) -> float:
        """Closed-form time along the orbit, zero at the chord midpoint."""
        return self._tau_of_z(self._log_odds(rho)) - self._tau_of_z(0.0)

    def state_at(self, tau: float, log_theta: float = 0.0) -> WHState:
        c, u, r1, r2 = self._geometry
        ref = self._tau_of_z(0.0)
        g = lambda z: self._tau_of_z(z) - ref - tau  # noqa: E731  (decreasing in z)
        lo, hi = -1.0, 1.0
        while g(lo) < 0:
            lo *= 2
        while g(hi) > 0:
            hi *= 2
        z = brentq(g, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500)
        s_ = 1.0 / (1.0 + math.exp(-z)) if z > -700 else 0.0
        one_minus = 1.0 / (1.0 + math.exp(z)) if z < 700 else 0.0
        rho = r1 + (r2 - r1) * s_
        sig = c + rho * u
        # 1 - |Sigma|^2 = (rho - r1)(r2 - rho) on the chord
        nsq = 4.0 / 3.0 * (r2 - r1) ** 2 * s_ * one_minus
        n = [0.0, 0.0, 0.0]
        n[self.active] = self.sign * math.sqrt(nsq)
        if nsq == 0.0:
            raise WHError(f"tau={tau} is beyond double resolution on this arc")
        return WHState.from_values(sig[0], sig[1], *n, log_theta=log_theta, tau=tau)


@dataclass(frozen=True)
class HeteroclinicCycle:
    kasner_points: tuple[tuple[float, float], ...]
    arcs: tuple[BianchiIIArc, ...]
    structure: tuple[int, int, int] = (1, 1, 1)

    def __len__(self):
        return len(self.kasner_points)


def build_heteroclinic_cycle(orbit: Sequence, structure=(1, 1, 1), tol: float = 1e-8) -> HeteroclinicCycle:
    pts = [tuple(map(float, p)) for p in orbit]
    if len(pts) < 2:
        raise WHError("a heteroclinic cycle needs at least two Kasner points")
    arcs = []
    for k, p in enumerate(pts):
        if abs(math.hypot(*p) - 1) > tol:
            raise WHError(f"point {p} is not on the Kasner circle")
        if is_taub_point(p, 1e-9):
            raise TaubPointError(f"Taub point {p} cannot belong to a heteroclinic cycle")
        nxt = pts[(k + 1) % len(pts)]
        img = kasner_map_step(p)
        if math.hypot(img[0] - nxt[0], img[1] - nxt[1]) > tol:
            raise WHError(f"orbit is not a Kasner-map cycle at position {k}")
        active = int(np.argmin(sigma_to_exponents(*p).as_tuple()))
        sign = structure[active]
        if sign == 0:
            raise WHError(f"arc {k} needs N{active + 1} but the structure pattern switches it off")
        arcs.append(BianchiIIArc(active, p, nxt, sign))
    return HeteroclinicCycle(tuple(pts), tuple(arcs), tuple(structure))


def shadowing_initial_state(cycle: HeteroclinicCycle, offset: float = 1e-4, tau: float = 0.0) -> WHState:
    """Point on the first arc's midpoint with the two inactive ``N`` switched
    on at ``offset`` (signs from the cycle's structure pattern) and ``Sigma``
    rescaled radially onto the constraint surface."""
    arc = cycle.arcs[0]
    base = arc.state_at(0.0)
    n = list(base.n)
    for i in range(3):
        if i != arc.active:
            n[i] = cycle.structure[i] * offset
    if 0 in [int(np.sign(x)) for x in n]:
        raise WHError("structure pattern has an inactive direction; shadowing needs class VIII/IX")
    br = 0.75 * (n[0] ** 2 + n[1] ** 2 + n[2] ** 2 - 2 * (n[0] * n[1] + n[1] * n[2] + n[2] * n[0]))
    if br >= 1:
        raise WHError("offset too large for the constraint")
    sp, sm = base.sigma
    r = math.sqrt((1 - br) / (sp * sp + sm * sm))
    return WHState.from_values(sp * r, sm * r, *n, log_theta=0.0, tau=tau)


# ---------------------------------------------------------------------------
# integration


@dataclass
class IntegrationOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = math.inf
    #: constraint tolerance; projection triggers at tol/10
    constraint_tol: float = 1e-8
    project: bool = True
    hard_cap: float = 1e-6
    #: optional uniform output spacing in tau (steps land on the grid)
    output_step: float | None = None
    #: optional explicit output times; overrides output_step
    t_eval: tuple[float, ...] | None = None


def _pack(s: WHState) -> np.ndarray:
    logs = [0.0 if sg == 0 else v for sg, v in zip(s.signs, s.log_abs_n)]
    return np.array([s.sigma_plus, s.sigma_minus, *logs, s.log_theta])


def _unpack(y, signs, tau) -> WHState:
    return WHState(float(y[0]), float(y[1]), (float(y[2]), float(y[3]), float(y[4])), signs, float(y[5]), float(tau))


def _make_rhs(signs):
    sg = np.asarray(signs, dtype=float)
    active = sg != 0

    def f(_tau, y):
        sp, sm = y[0], y[1]
        n1, n2, n3 = np.where(active, sg * np.exp(np.where(active, y[2:5], 0.0)), 0.0)
        q = 2.0 * (sp * sp + sm * sm)
        s_p = 0.5 * ((n2 - n3) ** 2 - n1 * (2 * n1 - n2 - n3))
        s_m = 0.5 * SQRT3 * (n3 - n2) * (n1 - n2 - n3)
        rates = np.array([q - 4 * sp, q + 2 * sp + 2 * SQRT3 * sm, q + 2 * sp - 2 * SQRT3 * sm])
        return np.array([
            -(2 - q) * sp - 3 * s_p,
            -(2 - q) * sm - 3 * s_m,
            *np.where(active, rates, 0.0),
            -(1 + q),
        ])

    return f


def project_to_constraint(s: WHState, iterations: int = 3) -> WHState:
    """Nearest point on the constraint quadric in (Sigma, N)-space (Newton
    steps along the gradient)."""
    y = np.array([s.sigma_plus, s.sigma_minus, *s.n])
    for _ in range(iterations):
        c = wh_constraint(*y)
        g = _constraint_grad(*y)
        y = y - c * g / float(g @ g)
    signs = s.signs
    logs = []
    for i, sg in enumerate(signs):
        if sg == 0:
            logs.append(-math.inf)
            continue
        if np.sign(y[2 + i]) != sg:
            raise SignPatternError("projection flipped the sign of an N variable")
        logs.append(math.log(abs(y[2 + i])))
    return WHState(float(y[0]), float(y[1]), tuple(logs), signs, s.log_theta, s.tau)


def integrate_wh(s0: WHState, tau_span, opts: IntegrationOptions | None = None) -> list[WHState]:
    """Integrate from ``s0`` over ``tau_span = (tau_start, tau_end)``.

    Toward the singularity ``tau_end < tau_start``.  The constraint is
    monitored after every accepted step and, if enabled, projected back once
    the drift exceeds ``constraint_tol / 10``.
    """
    opts = opts or IntegrationOptions()
    tau0, tau1 = float(tau_span[0]), float(tau_span[1])
    if abs(s0.constraint()) > max(opts.constraint_tol, 1e-12):
        if opts.project and abs(s0.constraint()) <= opts.hard_cap:
            s0 = project_to_constraint(s0)
        else:
            raise ConstraintViolation(f"initial constraint residual {s0.constraint():.3e}")
    s0 = WHState(s0.sigma_plus, s0.sigma_minus, s0.log_abs_n, s0.signs, s0.log_theta, tau0)
    signs = s0.signs
    f = _make_rhs(signs)
    last = {"state": s0}

    def hook(tau, y):
        st = _unpack(y, signs, tau)
        c = abs(st.constraint())
        if c > opts.hard_cap:
            raise IntegrityError(f"constraint drift {c:.3e} above hard cap at tau={tau}", last["state"])
        if opts.project and c > opts.constraint_tol / 10:
            st = project_to_constraint(st)
            y = _pack(st)
        last["state"] = st
        return y

    t_eval = None
    if opts.t_eval is not None:
        direction = 1.0 if tau1 >= tau0 else -1.0
        t_eval = np.array(sorted(opts.t_eval, key=lambda x: direction * x), dtype=float)
    elif opts.output_step:
        nsteps = int(math.floor(abs(tau1 - tau0) / opts.output_step + 1e-9))
        direction = 1.0 if tau1 >= tau0 else -1.0
        t_eval = tau0 + direction * opts.output_step * np.arange(1, nsteps + 1)
        if len(t_eval) == 0 or t_eval[-1] != tau1:
            t_eval = np.append(t_eval, tau1)
    stepper = _rk.StepperOptions(rtol=opts.rtol, atol=opts.atol, max_step=opts.max_step)
    try:
        ts, ys = _rk.integrate(f, (tau0, tau1), _pack(s0), stepper, hook=hook, t_eval=t_eval)
    except _rk.StepSizeUnderflow as exc:
        raise StiffnessError(str(exc), last["state"]) from exc
    return [_unpack(y, signs, t) for t, y in zip(ts, ys)]


# ---------------------------------------------------------------------------
# embedding and reconstruction


def wh_embed(h: FrameMetric, k: SecondForm, tau: float = 0.0, tol: float = 1e-8) -> WHState:
    """Wainwright-Hsu point of diagonal class-A data."""
    if h.structure is None or h.n != 3:
        raise WHError("wh_embed needs three-dimensional class-A data")
    H = mean_curvature(k, h)
    if not H < 0:
        raise WHError("wh_embed needs an expanding slice (H < 0)")
    theta = -H
    kh = np.asarray(k.diag) / np.asarray(h.diag)
    sig_i = 3 * kh / H - 1
    sp = -sig_i[0] / 2
    sm = (sig_i[1] - sig_i[2]) / (2 * SQRT3)
    n_on = structure_constants_on(h)
    s = WHState.from_values(sp, sm, *(n_on / theta), log_theta=math.log(theta), tau=tau)
    if abs(s.constraint()) > tol:
        raise ConstraintViolation(f"data violate the vacuum constraint: residual {s.constraint():.3e}")
    return s


def growth_coefficients(s: WHState) -> tuple[float, float, float]:
    """Coefficients of ``sigma^i (x) sigma^i`` in ``d(H^2 h)/dtau`` divided by ``H^2``
    (equivalently ``d log(theta^2 h_i)/dtau``)."""
    sp, sm = s.sigma
    r2 = 4 * (sp * sp + sm * sm)
    return (-4 * sp - r2, 2 * sp + 2 * SQRT3 * sm - r2, 2 * sp - 2 * SQRT3 * sm - r2)


def wh_growth_sign(s: WHState, tol: float = 1e-12) -> tuple[int, int, int]:
    return tuple(0 if abs(c) <= tol else (1 if c > 0 else -1) for c in growth_coefficients(s))


def reconstruct_flow(states: Sequence[WHState], dvol0: float | None = None,
                     structure: Sequence[int] | None = None) -> Trajectory:
    """Physical flow in WH-time gauge from one integration.

    ``sqrt(det h) = dvol0 * exp(3 tau)``.  Directions with an active ``N_i``
    recover ``h_i`` algebraically from ``N_i theta = n_hat_i h_i / sqrt(det h)``;
    the remaining ones integrate ``d log h_i / dtau = 2 (1 + Sigma_i)`` by the
    trapezoid rule.  When all three ``N`` are active the volume is fixed by
    the state and ``dvol0`` must be omitted or consistent.
    """
    if not states:
        raise WHError("no states to reconstruct")
    signs = states[0].signs
    if any(s.signs != signs for s in states):
        raise SignPatternError("sign pattern changes along the trajectory")
    structure = tuple(signs) if structure is None else tuple(int(x) for x in structure)
    if tuple(int(np.sign(x)) for x in structure) != signs:
        raise SignPatternError("structure pattern does not match the sign pattern of N")
    ordered = sorted(states, key=lambda s: s.tau)
    tau = np.array([s.tau for s in ordered])
    log_theta = np.array([s.log_theta for s in ordered])
    active = [i for i in range(3) if signs[i] != 0]
    # Sigma_i = -2 <Sigma, e_i>
    sig = np.array([[s.sigma_plus, s.sigma_minus] for s in ordered])
    sig_i = -2 * sig @ _E.T
    logn = np.array([[v for v in s.log_abs_n] for s in ordered])

    if len(active) == 3:
        # sqrt(det h) = 1 / prod(|N_i| theta)
        log_vol = -(logn.sum(axis=1) + 3 * log_theta)
        if dvol0 is not None:
            implied = log_vol[0] - 3 * tau[0]
            if abs(implied - math.log(dvol0)) > 1e-8 * max(1.0, abs(implied)):
                raise WHError("dvol0 is inconsistent with unit structure constants for this class VIII/IX state")
        log_vol0 = log_vol[0] - 3 * tau[0]
    else:
        log_vol0 = math.log(1.0 if dvol0 is None else dvol0)
    log_vol = log_vol0 + 3 * tau

    # deviation d_i = log h_i - (2/3) log vol ; sum d_i = 0, d_i' = 2 Sigma_i
    dev = np.zeros((len(ordered), 3))
    # log h_i = log vol + log(N_i theta) for |n_hat_i| = 1
    for i in active:
        dev[:, i] = log_vol / 3.0 + logn[:, i] + log_theta
    inactive = [i for i in range(3) if i not in active]
    integ = cumulative_trapezoid(2 * sig_i, tau, axis=0, initial=0.0) if len(tau) > 1 else np.zeros((1, 3))
    if len(inactive) == 3:
        dev = integ - integ.mean(axis=1, keepdims=True)
    elif len(inactive) == 2:
        j, k = inactive
        diff = integ[:, j] - integ[:, k]
        rest = -dev[:, active[0]]
        dev[:, j] = 0.5 * (rest + diff)
        dev[:, k] = 0.5 * (rest - diff)
    elif len(inactive) == 1:
        j = inactive[0]
        dev[:, j] = -dev[:, active].sum(axis=1)

    log_h = dev + (2.0 / 3.0) * log_vol[:, None]
    samples = []
    for row, s, lt, lh in zip(range(len(ordered)), ordered, log_theta, log_h):
        h = np.exp(lh)
        theta = math.exp(lt)
        if not (np.all(np.isfinite(h)) and np.all(h > 0) and math.isfinite(theta)):
            raise WHError(f"metric leaves double range at tau={s.tau}; shorten the tau span")
        H = -theta
        K = h * H * (1 + sig_i[row]) / 3
        samples.append(FlowSample(L=3.0 / theta, metric=FrameMetric(tuple(h), structure),
                                  second_form=SecondForm(tuple(K)), t=s.tau, gauge=Gauge.WH))
    return Trajectory(tuple(samples), t0=float(tau[-1]))


def write_wh_csv(states: Sequence[WHState], path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "sigma_plus", "sigma_minus", "n1", "n2", "n3", "log_theta", "constraint_residual"])
        for s in states:
            w.writerow([repr(float(x)) for x in (s.tau, s.sigma_plus, s.sigma_minus, *s.n, s.log_theta, s.constraint())])
