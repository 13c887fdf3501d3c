"""Dormand-Prince 5(4) stepping with a post-step hook.

The hook sees every accepted step and may replace the state (constraint
projection).  scipy's ``solve_ivp`` has no such entry point, which is the only
reason this lives here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
ORDER = 5


class StepSizeUnderflow(RuntimeError):
    def __init__(self, t, y, h):
        super().__init__(f"step size underflow at t={t!r} (h={h!r})")
        self.t = t
        self.y = y
        self.h = h


@dataclass
class StepperOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    first_step: float | None = None
    max_step: float = np.inf
    min_step: float = 1e-14


def _initial_step(f, t, y, f0, direction, opts):
    scale = opts.atol + np.abs(y) * opts.rtol
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, opts.max_step)
    y1 = y + direction * h0 * f0
    f1 = f(t + direction * h0, y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / ORDER)
    return min(100 * h0, h1, opts.max_step)


def integrate(f: Callable[[float, np.ndarray], np.ndarray], t_span, y0,
              opts: StepperOptions | None = None,
              hook: Callable[[float, np.ndarray], np.ndarray] | None = None,
              t_eval: np.ndarray | None = None):
    """Integrate ``y' = f(t, y)`` over ``t_span`` (either direction).

    Returns ``(ts, ys)`` at every accepted step, or at ``t_eval`` when given
    (the step is shortened to land on each output time, so no interpolation is
    involved).  ``hook(t, y)`` returns the possibly corrected state after each
    accepted step.
    """
    opts = opts or StepperOptions()
    t, t_end = float(t_span[0]), float(t_span[1])
    direction = 1.0 if t_end >= t else -1.0
    y = np.array(y0, dtype=float)
    if hook is not None:
        y = hook(t, y)
    k = np.empty((7, y.size))
    k[0] = f(t, y)
    h = opts.first_step or _initial_step(f, t, y, k[0], direction, opts)

    stops = None
    if t_eval is not None:
        stops = [float(x) for x in t_eval if direction * (x - t) > 0 and direction * (t_end - x) >= 0]
    ts, ys = [t], [y.copy()]
    stop_i = 0

    while direction * (t_end - t) > 0:
        target = t_end if stops is None or stop_i >= len(stops) else stops[stop_i]
        h_try = min(h, opts.max_step)
        h = h_try
        landing = False
        if h >= abs(target - t):
            h = abs(target - t)
            landing = True
        if h < opts.min_step * max(1.0, abs(t)):
            raise StepSizeUnderflow(t, y, h)
        hs = direction * h
        for s in range(1, 7):
            dy = np.dot(A[s], k[:s])
            k[s] = f(t + C[s] * hs, y + hs * dy)
        y_new = y + hs * np.dot(B5[:6], k[:6])
        err = hs * np.dot(E, k)
        scale = opts.atol + np.maximum(np.abs(y), np.abs(y_new)) * opts.rtol
        err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        if not np.isfinite(err_norm):
            h *= MIN_FACTOR
            continue
        if err_norm <= 1.0:
            t = target if landing else t + hs
            if hook is not None:
                y_hooked = hook(t, y_new)
                fsal = y_hooked is y_new or np.array_equal(y_hooked, y_new)
                y = y_hooked
            else:
                y, fsal = y_new, True
            k[0] = k[6] if fsal else f(t, y)
            if stops is None:
                ts.append(t)
                ys.append(y.copy())
            elif landing and stop_i < len(stops):
                ts.append(t)
                ys.append(y.copy())
                stop_i += 1
            factor = MAX_FACTOR if err_norm == 0 else min(MAX_FACTOR, SAFETY * err_norm ** (-1 / ORDER))
            h = h * factor if not landing else max(h_try, h * factor)
        else:
            h *= max(MIN_FACTOR, SAFETY * err_norm ** (-1 / ORDER))
    return np.array(ts), np.array(ys)
