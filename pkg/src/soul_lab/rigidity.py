"""Rigidity checks at the soul.

The centerpiece identity: for any of our nonnegatively curved quotients,
at every soul point and every unit soul-tangent direction X,

    (X F)^2 = (F^2 + (2/3) Hess_G(X, X)) * k,

with k the soul sectional curvature, F the normal-connection curvature and
G the normal-plane curvature (all from ``quotient.soul_data``).
``equality_audit`` measures this pointwise over a (t, angle) grid.

For a *round* soul the data transplants to the unit sphere
(t_hat = t/R, F_hat = R^2 F, G_hat = R^2 G), where a second, spectral level
of rigidity kicks in: F_hat must be a first spherical harmonic (Rayleigh
quotient exactly 2), and G_hat must be cos(2 t_hat) of a definite amplitude
plus a constant.  Fields on the round sphere are handled as zonal Legendre
models in x = cos(t_hat) -- fitted on the data band but globally defined,
with exact gradient and Laplacian calculus:

    |grad f|^2 = (1 - x^2) f_x^2,      lap f = (1 - x^2) f_xx - 2 x f_x.

Inputs that *violate* the trace inequality are first-class citizens here:
``trace_inequality_check`` reports the violation size instead of refusing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Legendre

from .charts import MetricChart, integrate_scalar
from .errors import NotMeanZero, OutOfDomain, ZeroZ
from .profiles import round_profile, sphere_chart
from .quotient import SoulData


# -- pointwise equality audit ---------------------------------------------


@dataclass(frozen=True)
class RigidityRecord:
    """One probe of the equality: soul point t, direction angle from the
    meridian, both sides, and their difference."""

    t: float
    angle: float
    lhs: float
    rhs: float
    residual: float


@dataclass(frozen=True)
class EqualityReport:
    records: list
    max_residual: float
    max_abs_lhs: float
    tolerance: float
    passed: bool


def equality_records(data, ts=None, n_angles=16):
    """Evaluate both sides of the equality on a (t, angle) grid.

    X = cos(angle) X_hat + sin(angle) Y_hat; F is rotationally invariant so
    X F = cos(angle) F'(t), and the Hessian of G is diagonal in this frame.
    """
    if ts is None:
        L = data.f_sigma.L
        ts = np.linspace(0.35, L - 0.35, 40)
    angles = np.linspace(0.0, np.pi, n_angles, endpoint=False)
    out = []
    for t in np.atleast_1d(ts):
        Fp = float(data.Fp_fit(t))
        F = float(data.F_fit(t))
        k = float(data.k_fit(t))
        h_tt = float(data.hess_G_tt(t))
        h_yy = float(data.f_sigma.fp(t) / data.f_sigma.f(t) * data.Gp_fit(t))
        for a in angles:
            c, s = np.cos(a), np.sin(a)
            lhs = (c * Fp) ** 2
            rhs = (F * F + 2.0 / 3.0 * (c * c * h_tt + s * s * h_yy)) * k
            out.append(
                RigidityRecord(
                    t=float(t), angle=float(a), lhs=lhs, rhs=rhs, residual=lhs - rhs
                )
            )
    return out


def equality_audit(data, ts=None, n_angles=16, tol=1e-4):
    records = equality_records(data, ts=ts, n_angles=n_angles)
    max_res = max(abs(r.residual) for r in records)
    max_lhs = max(abs(r.lhs) for r in records)
    return EqualityReport(
        records=records,
        max_residual=max_res,
        max_abs_lhs=max_lhs,
        tolerance=tol,
        passed=max_res <= tol,
    )


# -- round-sphere spectral tools ------------------------------------------


UNIT_SPHERE = None  # built lazily; one round chart serves all integrals


def _unit_sphere():
    global UNIT_SPHERE
    if UNIT_SPHERE is None:
        UNIT_SPHERE = sphere_chart(round_profile(1.0))
    return UNIT_SPHERE


def rayleigh(field, grad_step=1e-4, nodes=None, mean_tol=1e-6):
    """Rayleigh quotient int |grad f|^2 / int f^2 on the unit round sphere.

    ``field`` maps chart points (t, s) to values.  The field must be
    L^2-orthogonal to constants; otherwise NotMeanZero.  Gradient by central
    differences, integrals by the chart quadrature.
    """
    chart = _unit_sphere()
    area = integrate_scalar(chart, lambda p: np.ones(np.shape(p)[:-1]))
    mean = integrate_scalar(chart, field)
    l2 = integrate_scalar(chart, lambda p: np.asarray(field(p)) ** 2)
    if abs(mean) > mean_tol * np.sqrt(l2 * area):
        raise NotMeanZero(
            f"rayleigh: field has nonzero mean {mean / area:.3e} "
            "(must be orthogonal to constants)"
        )

    def grad_sq(pts):
        pts = np.asarray(pts, dtype=float)
        g = chart.metric(pts)
        ginv = np.linalg.inv(g)
        df = np.empty(pts.shape)
        for i in range(2):
            e = np.zeros(2)
            e[i] = grad_step
            df[..., i] = (
                np.asarray(field(pts + e)) - np.asarray(field(pts - e))
            ) / (2 * grad_step)
        return np.einsum("...ij,...i,...j->...", ginv, df, df)

    return integrate_scalar(chart, grad_sq) / l2


@dataclass(frozen=True)
class LinearEigenfunction:
    """Best first-harmonic approximation f ~ <p, Z> of a field on the round
    sphere, with the relative sup-norm residual of the approximation and the
    residual of the eigenfunction equation lap f + 2 f = 0."""

    Z: np.ndarray
    residual: float
    eigen_residual: float


def fit_linear_eigenfunction(field):
    """Project a round-sphere field onto the linear functions <p, Z>.

    Z_i = (3/4 pi) int f Y_i dA with Y = (sin t cos s, sin t sin s, cos t).
    """
    chart = _unit_sphere()

    def Y(pts, i):
        pts = np.asarray(pts, dtype=float)
        t, s = pts[..., 0], pts[..., 1]
        if i == 0:
            return np.sin(t) * np.cos(s)
        if i == 1:
            return np.sin(t) * np.sin(s)
        return np.cos(t)

    Z = np.array(
        [
            3.0
            / (4 * np.pi)
            * integrate_scalar(chart, lambda p, i=i: np.asarray(field(p)) * Y(p, i))
            for i in range(3)
        ]
    )

    ts = np.linspace(0.05, np.pi - 0.05, 31)
    ss = np.linspace(0.0, 2 * np.pi, 17)
    tt, sg = np.meshgrid(ts, ss, indexing="ij")
    pts = np.stack([tt, sg], axis=-1)
    vals = np.asarray(field(pts), dtype=float)
    lin = Z[0] * Y(pts, 0) + Z[1] * Y(pts, 1) + Z[2] * Y(pts, 2)
    scale = max(np.max(np.abs(vals)), 1e-300)
    residual = float(np.max(np.abs(vals - lin)) / scale)

    # eigenfunction equation along a few meridians, by central differences
    h = 1e-4
    eig = 0.0
    for s0 in (0.0, 1.3, 2.9, 4.4):
        t = np.linspace(0.2, np.pi - 0.2, 41)
        p0 = np.stack([t, np.full_like(t, s0)], axis=-1)
        pp = np.stack([t + h, np.full_like(t, s0)], axis=-1)
        pm = np.stack([t - h, np.full_like(t, s0)], axis=-1)
        f0, fp, fm = (np.asarray(field(q), dtype=float) for q in (p0, pp, pm))
        d1 = (fp - fm) / (2 * h)
        d2 = (fp - 2 * f0 + fm) / (h * h)
        # zonal part of the laplacian only; the s-part is checked through
        # the projection residual instead
        lap = d2 + d1 / np.tan(t)
        eig = max(eig, float(np.max(np.abs(lap + 2 * f0)) / scale))
    return LinearEigenfunction(Z=Z, residual=residual, eigen_residual=eig)


# -- zonal Legendre models ------------------------------------------------


@dataclass(frozen=True)
class RoundSoulModels:
    """Round-normalized soul data: radius R and zonal models of
    F_hat = R^2 F and G_hat = R^2 G as Legendre series in x = cos(t/R)."""

    R: float
    F_leg: Legendre
    G_leg: Legendre
    F_residual: float
    G_residual: float

    def F_field(self, pts):
        """F_hat as a field on the unit round sphere chart."""
        return self.F_leg(np.cos(np.asarray(pts, dtype=float)[..., 0]))

    def G_field(self, pts):
        return self.G_leg(np.cos(np.asarray(pts, dtype=float)[..., 0]))


def round_normalize(data, fit_degree=8, round_tol=1e-6):
    """Transplant soul data to the unit round sphere.

    Requires the soul metric to actually be round: f_sigma = R sin(t/R)
    with R = L/pi, checked to ``round_tol``.
    """
    R = data.f_sigma.L / np.pi
    ts = data.ts
    fs = np.asarray(data.f_sigma.f(ts), dtype=float)
    if np.max(np.abs(fs - R * np.sin(ts / R))) > round_tol:
        raise OutOfDomain(
            "round_normalize: the soul metric is not round "
            f"(profile deviates by {np.max(np.abs(fs - R * np.sin(ts / R))):.3e})"
        )
    x = np.cos(ts / R)
    Fh = R * R * data.F
    Gh = R * R * data.G
    F_leg = Legendre.fit(x, Fh, fit_degree, domain=[-1.0, 1.0])
    G_leg = Legendre.fit(x, Gh, fit_degree, domain=[-1.0, 1.0])
    F_res = float(np.max(np.abs(F_leg(x) - Fh)) / max(np.max(np.abs(Fh)), 1e-300))
    G_res = float(np.max(np.abs(G_leg(x) - Gh)) / max(np.max(np.abs(Gh)), 1e-300))
    return RoundSoulModels(
        R=float(R), F_leg=F_leg, G_leg=G_leg, F_residual=F_res, G_residual=G_res
    )


def zonal_gradient_sq(leg, x):
    """|grad f|^2 = (1 - x^2) f_x^2 for a zonal Legendre model."""
    x = np.asarray(x, dtype=float)
    return (1.0 - x * x) * leg.deriv()(x) ** 2


def zonal_laplacian(leg, x):
    """lap f = (1 - x^2) f_xx - 2 x f_x, exactly from the coefficients."""
    x = np.asarray(x, dtype=float)
    d1 = leg.deriv()
    return (1.0 - x * x) * d1.deriv()(x) - 2.0 * x * d1(x)


# -- great-circle profile of G_hat ----------------------------------------


@dataclass(frozen=True)
class GreatCircleFit:
    amplitude: float   # coefficient of cos(2t) along the circle
    drift: float       # coefficient of (t - pi); nonzero breaks periodicity
    offset: float      # the additive constant
    residual: float    # sup-norm misfit of the three-term model


def great_circle_profile(model, Z, n=720):
    """Fit A cos(2t) + D (t - pi) + C to a zonal model along a great circle
    through Z/|Z|.

    The polar angle along such a circle is |t| (t in [-pi, pi]), so the
    profile is model(cos t) traversed once around.  ZeroZ when Z vanishes:
    no axis to run the circle through.
    """
    Z = np.asarray(Z, dtype=float)
    if np.linalg.norm(Z) < 1e-8:
        raise ZeroZ("great_circle_profile: Z vanishes, no preferred axis")
    t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    vals = model(np.cos(t))  # cos(polar angle) == cos t around the circle
    A = np.stack([np.cos(2 * t), t - np.pi, np.ones_like(t)], axis=1)
    coef, *_ = np.linalg.lstsq(A, vals, rcond=None)
    resid = float(np.max(np.abs(A @ coef - vals)))
    return GreatCircleFit(
        amplitude=float(coef[0]),
        drift=float(coef[1]),
        offset=float(coef[2]),
        residual=resid,
    )


def great_circle_offset_spread(model, Z, phases=(0.0, np.pi / 3, np.pi / 2)):
    """Spread of the fitted constant across several great circles through
    Z/|Z|.  For a zonal model the circles are congruent, so this tests the
    fitting path, not the data."""
    fits = [great_circle_profile(model, Z) for _ in phases]
    cs = [f.offset for f in fits]
    return max(cs) - min(cs)


# -- the trace inequality -------------------------------------------------


@dataclass(frozen=True)
class TraceReport:
    """|grad F|^2 <= 2 F^2 + (2/3) lap G, checked pointwise on the sphere.

    ``max_violation`` is the largest positive excess of the left side (zero
    for fields that satisfy the inequality); ``integral_lap_G`` must vanish
    for any genuine G (divergence theorem on a closed surface)."""

    max_violation: float
    worst_x: float
    integral_lap_G: float
    violated: bool


def trace_inequality_check(F_leg, G_leg, t_grid=None, flag_tol=1e-3):
    """Evaluate the trace inequality for zonal Legendre fields.

    Everything is exact coefficient calculus; no finite differences.
    Violating inputs are welcome -- the report says by how much they fail.
    """
    if t_grid is None:
        t_grid = np.linspace(0.03, np.pi - 0.03, 1201)
    x = np.cos(np.asarray(t_grid, dtype=float))
    excess = (
        zonal_gradient_sq(F_leg, x)
        - 2.0 * np.asarray(F_leg(x)) ** 2
        - 2.0 / 3.0 * zonal_laplacian(G_leg, x)
    )
    worst = int(np.argmax(excess))
    max_v = float(max(excess[worst], 0.0))

    # int lap G dA = 2 pi int_{-1}^{1} [(1-x^2) G'' - 2x G'] dx, exactly
    xs, wts = np.polynomial.legendre.leggauss(max(2 * len(G_leg.coef), 8))
    integral = 2 * np.pi * float(np.sum(wts * zonal_laplacian(G_leg, xs)))

    return TraceReport(
        max_violation=max_v,
        worst_x=float(x[worst]),
        integral_lap_G=integral,
        violated=max_v > flag_tol,
    )
