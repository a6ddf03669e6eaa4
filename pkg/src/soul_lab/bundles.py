"""Circle-bundle descriptions of distance spheres about the soul.

A distance sphere {rho = rho0} in one of our quotient metrics is an
S^2 x S^1 whose induced metric can be re-described in two equivalent ways:

* the *product route*: a quotient ((S^2, g1) x S^1(r) x R)/R, where the line
  acts by a Killing rotation X on the sphere factor, by rotation at unit
  angular speed on the circle, and by unit translation;
* the *submersion route*: a circle bundle over the soul (S^2, g_Sigma)
  whose fibers are orbits of the S^1(r)-factor action, with fiber lengths
  and horizontal spaces given in closed form by the parameter a of the
  translation speed.

Every quantity here takes x2 = |X|^2 measured in the *base* metric
g_Sigma.  The two routes are connected by an exact dictionary
(``match_parameters``); ``sphere_match`` produces the product-route data
(g1 profile, rotation speed, circle radius) of an actual distance sphere,
and an independent numeric route (``bundle_metric_numeric``, a generic
Cheeger rescale of the product 3-metric) is kept for cross-checking the
closed-form induced metric.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .charts import MetricChart, PlaneSampler, min_sectional_scan
from .errors import DegenerateFiber, OutOfRange
from .profiles import POLE_PAD, SPHERE_FD, SPHERE_SCAN_MARGIN, cheeger_rescale


# -- closed-form fiber data ----------------------------------------------


def fiber_length_product(r, x2):
    """Fiber length of the product-route quotient: 2 pi r / sqrt(1 + r^2 (1 - x2))."""
    r = np.asarray(r, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    arg = 1.0 + r * r * (1.0 - x2)
    if np.any(arg <= 0):
        raise DegenerateFiber(
            f"fiber_length_product: 1 + r^2 (1 - x2) must stay positive "
            f"(min {float(np.min(arg)):.3e})"
        )
    return 2 * np.pi * r / np.sqrt(arg)


def fiber_length_submersion(a, x2):
    """Fiber length of the submersion route: (1/a^2 - x2/a^4)^(-1/2) = a^2/sqrt(a^2 - x2)."""
    x2 = np.asarray(x2, dtype=float)
    if a <= 0:
        raise OutOfRange(f"fiber_length_submersion: a must be positive, got {a}")
    arg = a * a - x2
    if np.any(arg <= 0):
        raise DegenerateFiber(
            f"fiber_length_submersion: need x2 < a^2 = {a * a:.6f} "
            f"(max x2 {float(np.max(x2)):.6f})"
        )
    return a * a / np.sqrt(arg)


def horizontal_product(x2):
    """Rotation coefficient c of the product-route horizontal space
    span{Y, X + c Theta}: c = x2, independent of the circle radius."""
    return np.asarray(x2, dtype=float)


def horizontal_submersion(a, x2):
    """Rotation coefficient of the submersion-route horizontal space
    span{Y, -X + (2 pi/a^2) x2 Theta}."""
    if a <= 0:
        raise OutOfRange(f"horizontal_submersion: a must be positive, got {a}")
    return (2 * np.pi / (a * a)) * np.asarray(x2, dtype=float)


@dataclass(frozen=True)
class MatchedParameters:
    """Product-route data equivalent to submersion-route data at speed a."""

    a: float
    r: float
    xhat_scale: float  # the matched Killing field is xhat_scale * X

    def xhat2(self, x2):
        """|Xhat|^2 in the base metric, given |X|^2 = x2."""
        return self.xhat_scale**2 * np.asarray(x2, dtype=float)


def match_parameters(a):
    """Dictionary between the two routes: r = a/sqrt(4 pi^2 - a^2),
    Xhat = -(2 pi/a^2) X.  Defined for 0 < a < 2 pi."""
    if not (0 < a < 2 * np.pi):
        raise OutOfRange(
            f"match_parameters: need 0 < a < 2 pi, got {a}"
        )
    return MatchedParameters(
        a=float(a),
        r=float(a / np.sqrt(4 * np.pi**2 - a * a)),
        xhat_scale=float(-2 * np.pi / (a * a)),
    )


# -- numeric route: generic rescale of the product 3-metric ---------------


def bundle_metric_numeric(f1_sq, L, Xs, r):
    """3-chart (t, s, theta) of ((S^2, g1) x S^1(r) x R)/R, built numerically.

    ``f1_sq`` is the squared profile of g1.  The quotient is taken as the
    unit-scale Cheeger rescale of the product metric diag(1, f1^2, r^2)
    along V = Xs d_s + d_theta -- the generic chart-level rescale, with no
    bundle-specific simplification, so this is an independent route.
    """

    def comp(pts):
        pts = np.asarray(pts, dtype=float)
        g = np.zeros(pts.shape[:-1] + (3, 3))
        g[..., 0, 0] = 1.0
        g[..., 1, 1] = np.asarray(f1_sq(pts[..., 0]), dtype=float)
        g[..., 2, 2] = r * r
        return g

    product = MetricChart(
        dim=3,
        box=np.array([[POLE_PAD, L - POLE_PAD], [0.0, 2 * np.pi], [0.0, 2 * np.pi]]),
        components=comp,
        fd_step=SPHERE_FD,
        periodic=(False, True, True),
        scan_margin=(SPHERE_SCAN_MARGIN, 0.0, 0.0),
        name="bundle-product",
    )

    def V(pts):
        pts = np.asarray(pts, dtype=float)
        v = np.zeros_like(pts)
        v[..., 1] = Xs
        v[..., 2] = 1.0
        return v

    return cheeger_rescale(product, V, 1.0, name="bundle-quotient")


# -- distance spheres of a quotient metric --------------------------------


@dataclass(frozen=True)
class SphereMatch:
    """Product-route data of the distance sphere {rho = rho0}:
    g1 has squared profile f1_sq, the line rotates the sphere factor at
    speed Xs and the circle S^1(r) at unit speed."""

    rho0: float
    b0: float
    f1_sq: Callable
    Xs: float
    r: float

    def base_x2(self, t):
        """|X|^2 in the base (soul) metric at height t."""
        xf = self.Xs**2 * np.asarray(self.f1_sq(t), dtype=float)
        return xf / (1.0 + xf)


def sphere_match(qspec, rho0):
    """Match the distance sphere {rho = rho0} to its product-route data.

    f1^2 = f^2/(1 + C1^2 (1 - C2^2) f^2),  Xs = C1 C2,
    r^2 = b^2/(1 + (C2^2 - 1) b^2)   with b = b(rho0).
    """
    C1, C2 = qspec.killing.C1, qspec.killing.C2
    if not (0 < rho0 < qspec.plane.rho_max):
        raise OutOfRange(
            f"sphere_match: rho0 must lie in (0, {qspec.plane.rho_max}), got {rho0}"
        )
    b0 = float(qspec.plane.b(rho0))
    r2_den = 1.0 + (C2 * C2 - 1.0) * b0 * b0
    if r2_den <= 0:
        raise DegenerateFiber(
            f"sphere_match: matched circle radius undefined at rho0={rho0} "
            f"(1 + (C2^2 - 1) b^2 = {r2_den:.3e})"
        )
    gamma = C1 * C1 * (1.0 - C2 * C2)
    tt = np.linspace(0.0, qspec.sphere.L, 801)
    den = 1.0 + gamma * np.asarray(qspec.sphere.f(tt), dtype=float) ** 2
    if np.min(den) <= 0:
        raise DegenerateFiber(
            f"sphere_match: matched sphere metric degenerates "
            f"(min 1 + C1^2(1-C2^2) f^2 = {float(np.min(den)):.3e})"
        )

    def f1_sq(t):
        f2 = np.asarray(qspec.sphere.f(t), dtype=float) ** 2
        return f2 / (1.0 + gamma * f2)

    return SphereMatch(
        rho0=float(rho0),
        b0=b0,
        f1_sq=f1_sq,
        Xs=C1 * C2,
        r=float(np.sqrt(b0 * b0 / r2_den)),
    )


def induced_sphere_components(qspec, rho0, pts):
    """Closed-form induced metric on {rho = rho0} in coordinates (t, s, theta).

    With lam = C1^2 f^2, mu = C2^2 b^2, |K|^2 = 1 + lam + mu, b = b(rho0):

        i_tt = 1,  i_ss = f^2 (1 + mu)/|K|^2,
        i_s_theta = -C1 C2 f^2 b^2/|K|^2,  i_theta_theta = b^2 (1 + lam)/|K|^2.
    """
    pts = np.asarray(pts, dtype=float)
    C1, C2 = qspec.killing.C1, qspec.killing.C2
    b2 = float(qspec.plane.b(rho0)) ** 2
    f2 = np.asarray(qspec.sphere.f(pts[..., 0]), dtype=float) ** 2
    lam = C1 * C1 * f2
    mu = C2 * C2 * b2
    K2 = 1.0 + lam + mu
    g = np.zeros(pts.shape[:-1] + (3, 3))
    g[..., 0, 0] = 1.0
    g[..., 1, 1] = f2 * (1.0 + mu) / K2
    g[..., 1, 2] = -C1 * C2 * f2 * b2 / K2
    g[..., 2, 1] = g[..., 1, 2]
    g[..., 2, 2] = b2 * (1.0 + lam) / K2
    return g


def distance_sphere_induced(qspec, rho0):
    """The induced metric of {rho = rho0} as a 3-chart (t, s, theta)."""
    if not (0 < rho0 < qspec.plane.rho_max):
        raise OutOfRange(
            f"distance_sphere_induced: rho0 must lie in (0, {qspec.plane.rho_max})"
        )
    L = qspec.sphere.L
    return MetricChart(
        dim=3,
        box=np.array([[POLE_PAD, L - POLE_PAD], [0.0, 2 * np.pi], [0.0, 2 * np.pi]]),
        components=lambda pts: induced_sphere_components(qspec, rho0, pts),
        fd_step=SPHERE_FD,
        periodic=(False, True, True),
        scan_margin=(SPHERE_SCAN_MARGIN, 0.0, 0.0),
        name=f"{qspec.name}-sphere-{rho0:g}",
    )


def fiber_orthogonality_residual(chart, Xs, t, x2, s=1.0, theta=1.0, c=None):
    """h(Theta, X + c Theta) at a point of a bundle 3-chart.

    With the correct coefficient c = x2 this vanishes: X + x2 Theta is
    horizontal.  ``x2`` is |X|^2 in the base metric and X = Xs d_s in chart
    coordinates (the rotation the line action induces on the sphere factor).
    """
    h = chart.metric(np.array([t, s, theta]))
    if c is None:
        c = horizontal_product(x2)
    theta_vec = np.array([0.0, 0.0, 1.0])
    hor = np.array([0.0, float(Xs), float(c)])
    return float(theta_vec @ h @ hor)


def extracted_base_profile_sq(chart, t, s=1.0, theta=1.0):
    """Squared profile of the submersion base metric, read off a 3-chart:
    the squared length of the horizontal lift of d_s is h_ss - h_s0^2/h_00."""
    h = chart.metric(np.array([t, s, theta]))
    return float(h[1, 1] - h[1, 2] ** 2 / h[2, 2])


def distance_sphere_scan(qspec, rho0, sampler=None, tol=1e-5):
    """Sectional-curvature scan of the induced metric on {rho = rho0}."""
    chart = distance_sphere_induced(qspec, rho0)
    if sampler is None:
        sampler = PlaneSampler(n_points=200, planes_per_point=6, seed=0)
    return min_sectional_scan(chart, sampler, tol=tol)
