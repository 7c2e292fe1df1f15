"""Cox arrival stream sampling and its exact conditional mean measure.

Arrivals form a Poisson process with intensity eps^-beta * lambda(s) * psi(Z_{s/eps})
conditional on one environment path.  Sampling uses Lewis-Shedler thinning under
the analytic majorant of the built-in rate family; the conditional mean measure
is integrated exactly over each environment holding interval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .environment import EnvPath, MarkovEnvironment
from .service import ServiceLaw


class ConstantRate:
    """lambda(s) = a with a > 0."""

    kind = "constant"

    def __init__(self, a: float):
        if a <= 0:
            raise ValueError("constant rate must be positive")
        self.a = float(a)

    def __call__(self, s):
        return np.broadcast_to(self.a, np.shape(s)).copy() if np.ndim(s) else self.a

    def derivative(self, s):
        return np.zeros(np.shape(s)) if np.ndim(s) else 0.0

    def max_on(self, horizon: float) -> float:
        return self.a

    def spec(self) -> dict:
        return {"kind": self.kind, "a": self.a}


class SinusoidalRate:
    """lambda(s) = a + b*sin(omega*s) with a > b >= 0, hence bounded away from 0."""

    kind = "sinusoidal"

    def __init__(self, a: float, b: float, omega: float):
        if not a > b >= 0:
            raise ValueError("sinusoidal rate requires a > b >= 0")
        self.a, self.b, self.omega = float(a), float(b), float(omega)

    def __call__(self, s):
        return self.a + self.b * np.sin(self.omega * np.asarray(s, dtype=float))

    def derivative(self, s):
        return self.b * self.omega * np.cos(self.omega * np.asarray(s, dtype=float))

    def max_on(self, horizon: float) -> float:
        return self.a + self.b

    def spec(self) -> dict:
        return {"kind": self.kind, "a": self.a, "b": self.b, "omega": self.omega}


def make_rate(kind: str, a: float, b: float = 0.0, omega: float = 0.0):
    if kind == "constant":
        return ConstantRate(a)
    if kind == "sinusoidal":
        return SinusoidalRate(a, b, omega)
    raise ValueError(f"unknown rate kind {kind!r}")


@dataclass(frozen=True)
class IntensitySpec:
    """Arrival intensity eps^-beta * lambda(s) * psi(Z_{s/eps})."""

    lam: ConstantRate | SinusoidalRate
    epsilon: float
    beta: float
    env: MarkovEnvironment

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")
        if self.beta < 0.0:
            raise ValueError("beta must be nonnegative")

    @property
    def scale(self) -> float:
        return self.epsilon ** -self.beta


def intensity_at(spec: IntensitySpec, path: EnvPath, s):
    """Exact intensity at queue-clock time(s) ``s`` given the path."""
    s = np.asarray(s, dtype=float)
    if np.any(s / spec.epsilon > path.horizon):
        raise ValueError("path horizon too short for requested time")
    psi = spec.env.psi[path.state_at(s / spec.epsilon)]
    out = spec.scale * spec.lam(s) * psi
    return out if out.ndim else float(out)


def sample_arrivals(
    spec: IntensitySpec, path: EnvPath, horizon: float, rng: np.random.Generator
) -> np.ndarray:
    """Thinned Cox stream on [0, horizon], increasing arrival epochs."""
    if horizon <= 0:
        return np.empty(0)
    majorant = spec.scale * spec.lam.max_on(horizon) * float(spec.env.psi.max())
    n = rng.poisson(majorant * horizon)
    candidates = np.sort(rng.random(n)) * horizon
    accept_prob = intensity_at(spec, path, candidates) / majorant
    keep = rng.random(n) < accept_prob
    return candidates[keep]


def _integrate_h(lam, law: ServiceLaw, lo: float, hi: float, t: float) -> float:
    """int_lo^hi lambda(s) * survival(t - s) ds with the survival branch point
    t - s = 1 registered as an explicit quadrature panel boundary."""
    if hi <= lo:
        return 0.0
    if isinstance(lam, ConstantRate):
        return lam.a * (law.integrated_survival(t - lo) - law.integrated_survival(t - hi))
    kink = t - 1.0
    pts = [kink] if lo < kink < hi else None
    val, _ = quad(lambda s: lam(s) * law.survival(t - s), lo, hi,
                  points=pts, limit=200, epsabs=1e-13, epsrel=1e-9)
    return val


def conditional_mean_measure(
    spec: IntensitySpec, path: EnvPath, t: float, law: ServiceLaw
) -> tuple[float, float]:
    """(m_eps(t), m0(t)): conditional mean count and its beta=0 version.

    m0(t) = int_0^t lambda(s) * survival_law(t-s) * psi(Z_{s/eps}) ds, integrated
    piecewise-exactly on each environment holding interval (psi constant there).
    """
    if t / spec.epsilon > path.horizon:
        raise ValueError("path horizon too short for requested time")
    if t <= 0:
        return 0.0, 0.0
    # holding intervals in queue clock, clipped to [0, t]
    edges = spec.epsilon * path.jump_times
    k = int(np.searchsorted(edges, t, side="right"))
    starts = edges[:k]
    ends = np.append(edges[1:k], t)
    ends = np.minimum(ends, t)
    m0 = 0.0
    psi = spec.env.psi
    for lo, hi, state in zip(starts, ends, path.states[:k]):
        p = psi[state]
        if p == 0.0 or hi <= lo:
            continue
        m0 += p * _integrate_h(spec.lam, law, float(lo), float(hi), t)
    return spec.scale * m0, m0
