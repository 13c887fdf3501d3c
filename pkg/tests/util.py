"""Shared test helpers."""

import math

from kasner_lab import bianchi_ode as wh


def on_shell(sp, sm, n1, n2, n3, log_theta=0.0, tau=0.0):
    """WH state on the constraint, obtained by scaling the shear direction ``(sp, sm)``."""
    b = 0.75 * (n1 * n1 + n2 * n2 + n3 * n3 - 2 * (n1 * n2 + n2 * n3 + n3 * n1))
    r = math.sqrt((1 - b) / (sp * sp + sm * sm))
    return wh.WHState.from_values(sp * r, sm * r, n1, n2, n3, log_theta, tau)
