"""Heavy/light-tailed service-time law with exact survival and inverse-CDF sampling.

The density is the bounded-power-law family

    ell(r) = c_alpha * (r^-(1+alpha) AND 1),   c_alpha = alpha / (alpha + 1),

i.e. a flat plateau on [0, 1] joined continuously to a Pareto tail.  The mean
is infinite for alpha <= 1 (the heavy-tailed regime) and finite otherwise.
All branch formulas are exact, so the sampler is an exact inverse-CDF sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad


@dataclass(frozen=True)
class ServiceLaw:
    """Service-time distribution indexed by the tail exponent ``alpha``.

    ``alpha`` may be any positive real, including exactly 1 (log branches are
    carried where integrals acquire logarithms).
    """

    alpha: float
    c_alpha: float = field(init=False)

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        object.__setattr__(self, "c_alpha", self.alpha / (self.alpha + 1.0))
        head, _ = quad(self.density, 0.0, 1.0)
        tail, _ = quad(self.density, 1.0, np.inf)
        total = head + tail
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"density does not normalize: integral = {total!r}")

    def density(self, r):
        """ell(r) = c_alpha * min(r^-(1+alpha), 1) for r >= 0."""
        r = np.asarray(r, dtype=float)
        safe = np.where(r > 0, r, 1.0)
        out = self.c_alpha * np.where(r <= 1.0, 1.0, safe ** -(1.0 + self.alpha))
        return out if out.ndim else float(out)

    def survival(self, r):
        """P(L > r); equals 1 - c_alpha*r on [0,1] and r^-alpha/(alpha+1) beyond."""
        r = np.asarray(r, dtype=float)
        safe = np.where(r > 0, r, 1.0)
        out = np.where(
            r <= 1.0,
            1.0 - self.c_alpha * r,
            safe ** -self.alpha / (self.alpha + 1.0),
        )
        return out if out.ndim else float(out)

    def quantile(self, u):
        """Inverse CDF.  u <= c_alpha hits the plateau, the rest the tail."""
        u = np.asarray(u, dtype=float)
        tail = np.clip((1.0 - u) * (self.alpha + 1.0), 1e-300, None)
        out = np.where(u <= self.c_alpha, u / self.c_alpha, tail ** (-1.0 / self.alpha))
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, size=None):
        """Exact inverse-CDF draw(s)."""
        return self.quantile(rng.random(size))

    def mean(self) -> float:
        """E[L]; infinite iff alpha <= 1."""
        if self.alpha <= 1.0:
            return math.inf
        return 1.0 - self.c_alpha / 2.0 + 1.0 / ((self.alpha + 1.0) * (self.alpha - 1.0))

    def second_moment(self) -> float:
        """E[L^2]; infinite iff alpha <= 2."""
        if self.alpha <= 2.0:
            return math.inf
        return 2.0 * (0.5 - self.c_alpha / 3.0 + 1.0 / ((self.alpha + 1.0) * (self.alpha - 2.0)))

    def integrated_survival(self, t) -> float:
        """Closed form of int_0^t survival(u) du, with an explicit alpha=1 log branch."""
        t = float(t)
        if t <= 0.0:
            return 0.0
        a, c = self.alpha, self.c_alpha
        if t <= 1.0:
            return t - c * t * t / 2.0
        head = 1.0 - c / 2.0
        if a == 1.0:
            return head + 0.5 * math.log(t)
        return head + (1.0 - t ** (1.0 - a)) / ((a + 1.0) * (a - 1.0))

    def integrated_t_survival(self, t) -> float:
        """Closed form of int_0^t u * survival(u) du, with an alpha=2 log branch."""
        t = float(t)
        if t <= 0.0:
            return 0.0
        a, c = self.alpha, self.c_alpha
        if t <= 1.0:
            return t * t / 2.0 - c * t ** 3 / 3.0
        head = 0.5 - c / 3.0
        if a == 2.0:
            return head + math.log(t) / 3.0
        return head + (t ** (2.0 - a) - 1.0) / ((a + 1.0) * (2.0 - a))
