"""Modified Bessel functions of the second kind, orders 0 through 3."""

from __future__ import annotations

import numpy as np
from scipy import special

__all__ = ["UNDERFLOW_THRESHOLD", "bessel_k"]

# exp(-u) leaves the normal double range just past u = 708
UNDERFLOW_THRESHOLD = 700.0

_ORDERS = (0, 1, 2, 3)


def bessel_k(order: int, u, full_output: bool = False):
    """K_order(u) for order in {0, 1, 2, 3} and u > 0.

    K_0 and K_1 come from the Cephes exponentially scaled routines; higher
    orders use the upward recurrence ``K_{n+1} = K_{n-1} + (2n/u) K_n``,
    which is stable for this family.

    Parameters
    ----------
    order : int
    u : float or array_like
        Positive argument(s).
    full_output : bool
        If True, also return a boolean (array) flagging arguments above
        `UNDERFLOW_THRESHOLD`, for which 0 is returned.

    Raises
    ------
    ValueError
        For an unsupported order or a non-positive argument.
    """
    if order not in _ORDERS:
        raise ValueError(f"Bessel order must be one of {_ORDERS}, got {order!r}")
    x = np.asarray(u, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("bessel_k requires u > 0")
    underflow = x > UNDERFLOW_THRESHOLD
    xs = np.where(underflow, 1.0, x)
    k_prev = special.k0e(xs)
    k_cur = special.k1e(xs)
    if order == 0:
        scaled = k_prev
    else:
        for n in range(1, order):
            k_prev, k_cur = k_cur, k_prev + (2.0 * n / xs) * k_cur
        scaled = k_cur
    value = np.where(underflow, 0.0, scaled * np.exp(-xs))
    if value.ndim == 0:
        value = float(value)
        underflow = bool(underflow)
    return (value, underflow) if full_output else value
