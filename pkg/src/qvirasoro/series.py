"""Truncated one-variable power series over float64, plus the bilateral
delta-comb identity that underpins the exchange-relation checkers.

All series are dense coefficient vectors c[0..order] for
sum_k c_k x^k.  Binary operations truncate to the shorter window, so a
computation carried out entirely at one window size is exact in that
window (no truncation error inside it).
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import QVirasoroError


class Series:
    """Dense truncated power series."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Sequence[float] | np.ndarray):
        self.c = np.asarray(coeffs, dtype=np.float64).copy()
        if self.c.ndim != 1 or self.c.size == 0:
            raise QVirasoroError("series needs a 1-d non-empty coefficient vector")

    @property
    def order(self) -> int:
        return self.c.size - 1

    @classmethod
    def one(cls, order: int) -> "Series":
        c = np.zeros(order + 1)
        c[0] = 1.0
        return cls(c)

    @classmethod
    def zero(cls, order: int) -> "Series":
        return cls(np.zeros(order + 1))

    def __getitem__(self, k: int) -> float:
        if 0 <= k <= self.order:
            return float(self.c[k])
        return 0.0

    def truncate(self, order: int) -> "Series":
        if order <= self.order:
            return Series(self.c[: order + 1])
        out = np.zeros(order + 1)
        out[: self.c.size] = self.c
        return Series(out)

    def __add__(self, other: "Series") -> "Series":
        n = min(self.order, other.order)
        return Series(self.c[: n + 1] + other.c[: n + 1])

    def __sub__(self, other: "Series") -> "Series":
        n = min(self.order, other.order)
        return Series(self.c[: n + 1] - other.c[: n + 1])

    def __mul__(self, other):
        if isinstance(other, Series):
            n = min(self.order, other.order)
            out = np.convolve(self.c[: n + 1], other.c[: n + 1])[: n + 1]
            return Series(out)
        return Series(self.c * float(other))

    __rmul__ = __mul__

    def scale_arg(self, s: float) -> "Series":
        """x -> s*x, i.e. c_k -> c_k s^k."""
        return Series(self.c * (float(s) ** np.arange(self.c.size)))

    def __repr__(self) -> str:
        head = ", ".join(f"{v:.6g}" for v in self.c[:6])
        tail = ", ..." if self.c.size > 6 else ""
        return f"Series([{head}{tail}], order={self.order})"


def series_exp(u: Series) -> Series:
    """exp of a series with zero constant term.

    Uses the derivative recurrence E_k = (1/k) sum_{j=1}^{k} j u_j E_{k-j},
    which is exact on the window.
    """
    if u[0] != 0.0:
        raise QVirasoroError("series_exp needs zero constant term")
    n = u.order
    e = np.zeros(n + 1)
    e[0] = 1.0
    ju = u.c * np.arange(n + 1)
    for k in range(1, n + 1):
        e[k] = np.dot(ju[1 : k + 1], e[k - 1 :: -1][: k]) / k
    return Series(e)


def series_inverse(a: Series) -> Series:
    """Multiplicative inverse of a series with nonzero constant term."""
    if a[0] == 0.0:
        raise QVirasoroError("cannot invert a series with zero constant term")
    n = a.order
    b = np.zeros(n + 1)
    b[0] = 1.0 / a.c[0]
    for k in range(1, n + 1):
        b[k] = -np.dot(a.c[1 : k + 1], b[k - 1 :: -1][: k]) / a.c[0]
    return Series(b)


def from_log_rule(rule: Callable[[int], float], order: int) -> Series:
    """Build exp( sum_{n>=1} rule(n) x^n ) on the given window."""
    u = np.zeros(order + 1)
    for k in range(1, order + 1):
        u[k] = rule(k)
    return series_exp(Series(u))


def linear_series(b: float, order: int, power: int = 1) -> Series:
    """(1 - b x)^power for integer power (negative allowed)."""
    if power == 0:
        return Series.one(order)
    if power > 0:
        out = Series.one(order)
        lin = np.zeros(order + 1)
        lin[0] = 1.0
        if order >= 1:
            lin[1] = -b
        for _ in range(power):
            out = out * Series(lin)
        return out
    geo = Series(b ** np.arange(order + 1))  # 1/(1 - b x)
    out = Series.one(order)
    for _ in range(-power):
        out = out * geo
    return out


def check_delta_comb(rs: Sequence[float], window: int) -> float:
    """Residual of the bilateral expansion-difference identity for
    F(x) = prod_i (1 - r_i x) / (1 - x).

    Expanding F around 0 gives coefficients E+[k] (k >= 0); expanding
    the same function around infinity gives
    (-1)^{m-1} (prod r_i) E-[m-1-k] supported on k <= m-1, with
    E- built from the inverted roots.  Their difference, read as a
    bilateral sequence, must be the constant prod_i (1 - r_i) at every
    k in [-window, window].  Returns the max deviation.
    """
    m = len(rs)
    order = window + m + 1

    def log_plus(n: int) -> float:
        return (1.0 - sum(r**n for r in rs)) / n

    def log_minus(n: int) -> float:
        return (1.0 - sum(r ** (-n) for r in rs)) / n

    ep = from_log_rule(log_plus, order)
    em = from_log_rule(log_minus, order)
    prod_r = 1.0
    const = 1.0
    for r in rs:
        prod_r *= r
        const *= 1.0 - r
    sign = (-1.0) ** (m - 1)
    worst = 0.0
    for k in range(-window, window + 1):
        val = 0.0
        if k >= 0:
            val += ep[k]
        if k <= m - 1:
            val -= sign * prod_r * em[m - 1 - k]
        worst = max(worst, abs(val - const))
    return worst
