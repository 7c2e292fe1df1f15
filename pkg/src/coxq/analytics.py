"""Deterministic limit oracles and the rescaling transforms.

Everything here is quadrature or closed form: the cumulative service-weighted
rate Lambda, the limit mean m_bar0, the limit covariance Gamma and the window
integral Xi, the environment-driven variance sigma_bar_sq with its closed-form
surrogate pieces, and the exact algebraic rescalings of raw counts into the
sub/supercritical fluctuation variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .arrivals import ConstantRate, SinusoidalRate, _integrate_h
from .service import ServiceLaw


class RegimeError(ValueError):
    """Raised when a rescaling is requested outside its valid beta range."""


class RemovableSingularityError(ValueError):
    """Raised by the printed closed forms at their removable alpha values;
    callers should fall back to the quadrature path."""


@dataclass(frozen=True)
class LimitOracle:
    """Bundles the service law, rate function and environment constants needed
    by every limit quantity.  ``include_sigma_psi`` selects whether the
    environment variance multiplies the supercritical limit variance."""

    law: ServiceLaw
    lam: ConstantRate | SinusoidalRate
    psi_bar: float
    sigma_psi_sq: float = 0.0
    include_sigma_psi: bool = True


def big_lambda(oracle: LimitOracle, t: float) -> float:
    """Lambda(t) = int_0^t lambda(s) survival(t-s) ds.

    Closed form for the constant-rate family; adaptive quadrature (relative
    1e-9, branch point t-s=1 as a panel boundary) otherwise.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    return _integrate_h(oracle.lam, oracle.law, 0.0, t, t)


def m_bar0(oracle: LimitOracle, t: float) -> float:
    """Limit mean of the rescaled count: Lambda(t) * psi_bar."""
    return big_lambda(oracle, t) * oracle.psi_bar


def gamma_cov(oracle: LimitOracle, ti: float, tj: float) -> float:
    """Limit covariance: psi_bar * int_0^(ti^tj) lambda(s) survival(ti v tj - s) ds."""
    if ti < 0 or tj < 0:
        raise ValueError("times must be nonnegative")
    lo, hi = min(ti, tj), max(ti, tj)
    return oracle.psi_bar * _integrate_h(oracle.lam, oracle.law, 0.0, lo, hi)


def xi_and_region_means(oracle: LimitOracle, t1: float, t2: float):
    """(Xi, m_bar(A1), m_bar(A2), m_bar(A3)) for the window (t1, t2].

    Xi = int_t1^t2 lambda(s) survival(t2-s) ds; the region means follow from
    Lambda(t1), Lambda(t2) and Xi.
    """
    if not 0.0 <= t1 < t2:
        raise ValueError(f"require 0 <= t1 < t2, got ({t1}, {t2})")
    xi = _integrate_h(oracle.lam, oracle.law, t1, t2, t2)
    lam1 = big_lambda(oracle, t1)
    lam2 = big_lambda(oracle, t2)
    m1 = (lam1 - lam2 + xi) * oracle.psi_bar
    m2 = (lam2 - xi) * oracle.psi_bar
    m3 = xi * oracle.psi_bar
    return xi, m1, m2, m3


def _sigma_kernel_inner(oracle: LimitOracle, s1: float, t_inner: float) -> float:
    """int_0^t_inner lambda(s2) survival(t_inner - s2) min(s1, s2) ds2.

    Closed form for constant rates: split the min at s2 = s1 and substitute
    u = t_inner - s2 so both pieces reduce to the law's integrated survivals.
    """
    lam, law = oracle.lam, oracle.law
    if isinstance(lam, ConstantRate):
        t = t_inner
        big_l = law.integrated_survival
        big_m = law.integrated_t_survival
        below = t * (big_l(t) - big_l(t - s1)) - (big_m(t) - big_m(t - s1))
        above = s1 * big_l(t - s1)
        return lam.a * (below + above)

    def f(s2):
        return lam(s2) * law.survival(t_inner - s2) * min(s1, s2)

    pts = sorted({p for p in (t_inner - 1.0, s1) if 0.0 < p < t_inner})
    val, _ = quad(f, 0.0, t_inner, points=pts or None, limit=200, epsabs=1e-13, epsrel=1e-10)
    return val


def supercritical_cov(oracle: LimitOracle, s: float, t: float,
                      include_sigma_psi: bool | None = None) -> float:
    """Limit covariance of the supercritical fluctuation process:

        int_0^s int_0^t lambda(r1) lambda(r2) survival(s-r1) survival(t-r2)
        (r1 ^ r2) dr1 dr2,

    optionally multiplied by the environment variance constant.
    """
    if s < 0 or t < 0:
        raise ValueError("times must be nonnegative")
    if s == 0 or t == 0:
        return 0.0
    flag = oracle.include_sigma_psi if include_sigma_psi is None else include_sigma_psi
    lam, law = oracle.lam, oracle.law

    def outer(r1):
        return lam(r1) * law.survival(s - r1) * _sigma_kernel_inner(oracle, r1, t)

    pts = sorted({p for p in (s - 1.0, t - 1.0) if 0.0 < p < s})
    val, _ = quad(outer, 0.0, s, points=pts or None, limit=200, epsabs=1e-12, epsrel=1e-9)
    if flag:
        val *= oracle.sigma_psi_sq
    return val


def sigma_bar_sq(oracle: LimitOracle, t: float,
                 include_sigma_psi: bool | None = None) -> float:
    """Variance of the supercritical limit at time t (diagonal of the kernel)."""
    return supercritical_cov(oracle, t, t, include_sigma_psi=include_sigma_psi)


def closed_form_I_II_III(alpha: float, t: float):
    """(I, II, III, total) of the envelope-surrogate variance integral over the
    half-domain 0 < s2 < s1 < t, with kernel (1/(t-s)^alpha AND 1).

    II and III are the printed closed forms; I is evaluated by quadrature over
    the unit corner (it grows like t).  The printed forms have removable
    singularities at alpha in {1, 1.5, 2}, where callers must use quadrature.
    """
    if t < 1.0:
        raise ValueError("closed forms require t >= 1")
    if alpha in (1.0, 1.5, 2.0):
        raise RemovableSingularityError(
            f"alpha={alpha} is a removable singularity of the printed forms; "
            "use the quadrature surrogate instead")
    a = alpha
    # I: both coordinates in the unit corner (t-1, t), integrand = s2
    part_i, _ = quad(lambda s1: quad(lambda s2: s2, t - 1.0, s1)[0], t - 1.0, t)
    if t == 1.0:
        part_ii = part_iii = 0.0
    else:
        part_ii = t ** (2 - a) / ((1 - a) * (2 - a)) - t / (1 - a) + 1.0 / (2 - a)
        part_iii = (t ** (3 - 2 * a) / (2 * (1 - a) ** 2 * (3 - 2 * a))
                    - t ** (2 - a) / ((1 - a) ** 2 * (2 - a))
                    + t / (2 * (1 - a) ** 2)
                    - 1.0 / ((2 - a) * (3 - 2 * a)))
    return part_i, part_ii, part_iii, part_i + part_ii + part_iii


def surrogate_II_quadrature(alpha: float, t: float) -> float:
    """1-D quadrature of the II surrogate: int_0^(t-1) s (t-s)^-alpha ds."""
    if t <= 1.0:
        return 0.0
    val, _ = quad(lambda s: s * (t - s) ** -alpha, 0.0, t - 1.0, limit=200,
                  epsabs=1e-13, epsrel=1e-10)
    return val


def surrogate_III_quadrature(alpha: float, t: float) -> float:
    """2-D quadrature of the III surrogate:
    int_0^(t-1) (t-s1)^-alpha int_0^s1 s2 (t-s2)^-alpha ds2 ds1."""
    if t <= 1.0:
        return 0.0

    def inner(s1):
        return quad(lambda s2: s2 * (t - s2) ** -alpha, 0.0, s1, limit=200)[0]

    val, _ = quad(lambda s1: (t - s1) ** -alpha * inner(s1), 0.0, t - 1.0,
                  limit=200, epsabs=1e-12, epsrel=1e-9)
    return val


def rescale_subcritical(n, m_bar, m_eps0, epsilon: float, beta: float):
    """(G, G1, G2) for beta < 1; G = G1 + G2 holds exactly.

    G  = eps^(b/2) (n - m_bar/eps^b)
    G1 = eps^(-b/2) (eps^b n - m_eps0)
    G2 = eps^(-b/2) (m_eps0 - m_bar)
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if beta <= 0:
        raise RegimeError("subcritical rescaling requires beta > 0")
    n = np.asarray(n, dtype=float)
    half = epsilon ** (beta / 2.0)
    g1 = (epsilon ** beta * n - m_eps0) / half
    g2 = (np.asarray(m_eps0, dtype=float) - m_bar) / half
    g = g1 + g2
    return g, g1, g2


def rescale_supercritical(n, m_bar, m_eps0, epsilon: float, beta: float):
    """(G_S, G_S1, G_S2) for beta > 1; G_S = G_S1 + G_S2 holds exactly.

    G_S  = eps^(b - 1/2) (n - m_bar/eps^b)
    G_S1 = (eps^b n - m_eps0) / sqrt(eps)
    G_S2 = (m_eps0 - m_bar) / sqrt(eps)
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if beta <= 1.0:
        raise RegimeError("supercritical rescaling requires beta > 1")
    n = np.asarray(n, dtype=float)
    root = math.sqrt(epsilon)
    gs1 = (epsilon ** beta * n - m_eps0) / root
    gs2 = (np.asarray(m_eps0, dtype=float) - m_bar) / root
    gs = gs1 + gs2
    return gs, gs1, gs2


def holder_increment(oracle: LimitOracle, s: float, t: float) -> float:
    """Variance of the limit increment: Gamma(t,t) - 2 Gamma(s,t) + Gamma(s,s)."""
    if not 0.0 <= s <= t:
        raise ValueError("require 0 <= s <= t")
    r = gamma_cov(oracle, t, t) - 2.0 * gamma_cov(oracle, s, t) + gamma_cov(oracle, s, s)
    return max(r, 0.0)


def phi_functional(oracle: LimitOracle, t: float, grid, values) -> float:
    """Linear functional phi_t(f) = h(t,t) f(t) - int_0^t d/ds h(s,t) f(s) ds
    for a path ``values`` sampled on ``grid``; d/ds h is analytic:
    lambda'(s) survival(t-s) + lambda(s) density(t-s).  Trapezoidal rule.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = grid <= t + 1e-12
    grid, values = grid[mask], values[mask]
    if grid.size < 16:
        raise ValueError("grid too coarse for the functional (need >= 16 points on [0, t])")
    if abs(grid[-1] - t) > 1e-9:
        raise ValueError("grid must cover [0, t] up to t")
    lam, law = oracle.lam, oracle.law
    h_tt = lam(t) * law.survival(0.0)
    dh = lam.derivative(grid) * law.survival(t - grid) + np.asarray(lam(grid)) * law.density(t - grid)
    integral = np.trapezoid(dh * values, grid)
    return float(h_tt * values[-1] - integral)
