"""Quotient metrics on S^2 x R^2 and their soul-level curvature data.

A metric here is the Riemannian quotient of (S^2, g0) x (R^2, gF) x R by the
line flow generated by K = C1 (sphere rotation) + C2 (plane rotation) +
(unit translation).  On the section u = 0 the quotient metric is

    h(v, w) = G(v, w) - G(v, K) G(w, K) / |K|^2

for the product metric G.  Two independent routes to h live side by side:
``quotient_oracle`` projects the explicit 5x5 product metric (brute force,
no simplification), while ``build_quotient`` evaluates the worked-out
closed-form components.  Tests hold them against each other; nothing in
this module reuses one to implement the other.

Soul-level data: the zero section {x = y = 0} is the soul.  ``soul_data``
measures, per point of the soul, the soul sectional curvature k, the
normal-connection curvature F = <R(X,Y)W, V>, and the normal-plane
curvature G = <R(W,V)V, W> straight off the 4-chart curvature tensor, and
fits smooth models so derivatives of F and G are available downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial import Chebyshev

from .charts import (
    MetricChart,
    PlaneSampler,
    christoffel,
    min_sectional_scan,
    riemann_with_metric,
    sectional_from_tensor,
)
from .errors import FrameDegeneracy, InvalidProfile, RescaleNotInvertible
from .profiles import (
    POLE_PAD,
    SPHERE_FD,
    KillingSpec,
    PlaneProfile,
    SphereProfile,
    plane_warp_block,
    sphere_chart,
)


@dataclass(frozen=True)
class QuotientSpec:
    """Ingredients of one quotient metric: the two profiles and the flow speeds."""

    sphere: SphereProfile
    plane: PlaneProfile
    killing: KillingSpec
    name: str = "quotient"

    def __post_init__(self):
        if not self.sphere.concave:
            raise InvalidProfile(
                "quotient spec: the sphere profile must carry its nonnegative-"
                "curvature check (concave=True)"
            )


# -- route one: brute-force projection of the product metric --------------


def ambient_metric(qspec, pts5):
    """Product metric G on (S^2 x R^2 x R) at points (t, s, x, y, u)."""
    pts5 = np.asarray(pts5, dtype=float)
    t = pts5[..., 0]
    G = np.zeros(pts5.shape[:-1] + (5, 5))
    G[..., 0, 0] = 1.0
    G[..., 1, 1] = np.asarray(qspec.sphere.f(t), dtype=float) ** 2
    G[..., 2:4, 2:4] = plane_warp_block(qspec.plane, pts5[..., 2], pts5[..., 3])
    G[..., 4, 4] = 1.0
    return G


def killing_vector(qspec, pts5):
    """Components of K = C1 d_s + C2 (-y d_x + x d_y) + d_u."""
    pts5 = np.asarray(pts5, dtype=float)
    K = np.zeros(pts5.shape[:-1] + (5,))
    K[..., 1] = qspec.killing.C1
    K[..., 2] = -qspec.killing.C2 * pts5[..., 3]
    K[..., 3] = qspec.killing.C2 * pts5[..., 2]
    K[..., 4] = 1.0
    return K


def quotient_oracle(qspec, pts):
    """Quotient metric at (t, s, x, y) by projecting the 5-metric. No shortcuts."""
    pts = np.asarray(pts, dtype=float)
    pts5 = np.concatenate([pts, np.zeros(pts.shape[:-1] + (1,))], axis=-1)
    G = ambient_metric(qspec, pts5)
    K = killing_vector(qspec, pts5)
    GK = np.einsum("...ij,...j->...i", G, K)
    K2 = np.einsum("...i,...i->...", K, GK)
    h5 = G - GK[..., :, None] * GK[..., None, :] / K2[..., None, None]
    return h5[..., :4, :4]


# -- route two: closed-form chart -----------------------------------------


def quotient_components(qspec, pts):
    """Closed-form components of the quotient metric at (t, s, x, y).

    With lam = C1^2 f^2, mu = C2^2 b^2, |K|^2 = 1 + lam + mu and
    beta = b^2/rho^2 (evaluated via the stable warp coefficient):

        h_tt = 1,                h_ss = f^2 (1 + mu)/|K|^2,
        h_sx = C1 C2 f^2 y beta/|K|^2,   h_sy = -C1 C2 f^2 x beta/|K|^2,
        plane block = I + (w - C2^2 beta^2/|K|^2) [[y^2, -xy], [-xy, x^2]].
    """
    pts = np.asarray(pts, dtype=float)
    C1, C2 = qspec.killing.C1, qspec.killing.C2
    t, x, y = pts[..., 0], pts[..., 2], pts[..., 3]
    f2 = np.asarray(qspec.sphere.f(t), dtype=float) ** 2
    rho2 = x * x + y * y
    w = np.asarray(qspec.plane.w(np.sqrt(rho2)), dtype=float)
    beta = 1.0 + w * rho2          # b^2/rho^2, regular at the vertex
    lam = C1 * C1 * f2
    mu = C2 * C2 * beta * rho2     # C2^2 b^2
    K2 = 1.0 + lam + mu

    h = np.zeros(pts.shape[:-1] + (4, 4))
    h[..., 0, 0] = 1.0
    h[..., 1, 1] = f2 * (1.0 + mu) / K2
    h[..., 1, 2] = C1 * C2 * f2 * y * beta / K2
    h[..., 2, 1] = h[..., 1, 2]
    h[..., 1, 3] = -C1 * C2 * f2 * x * beta / K2
    h[..., 3, 1] = h[..., 1, 3]
    w_eff = w - C2 * C2 * beta * beta / K2
    h[..., 2, 2] = 1.0 + w_eff * y * y
    h[..., 2, 3] = -w_eff * x * y
    h[..., 3, 2] = h[..., 2, 3]
    h[..., 3, 3] = 1.0 + w_eff * x * x
    return h


QUOTIENT_T_MARGIN = 0.2   # sampler margin along t, set by the noise model


def build_quotient(qspec):
    """The quotient metric as a 4-chart (t, s, x, y), s periodic."""
    L = qspec.sphere.L
    half = (qspec.plane.rho_max - 0.02) / np.sqrt(2.0)
    fd = SPHERE_FD
    return MetricChart(
        dim=4,
        box=np.array(
            [[POLE_PAD, L - POLE_PAD], [0.0, 2 * np.pi], [-half, half], [-half, half]]
        ),
        components=lambda pts: quotient_components(qspec, pts),
        fd_step=fd,
        periodic=(False, True, False, False),
        scan_margin=(QUOTIENT_T_MARGIN, 0.0, 5 * fd, 5 * fd),
        name=qspec.name,
    )


# -- the soul -------------------------------------------------------------


def soul_profile(qspec):
    """Profile of the soul metric: f_sigma = f / sqrt(1 + C1^2 f^2).

    The soul {x = y = 0} inherits h_ss = f^2 (1 + 0)/(1 + C1^2 f^2), i.e. the
    sphere factor Cheeger-shrunk along C1 times its rotation field.
    """
    C1 = qspec.killing.C1
    sp = qspec.sphere
    c2 = C1 * C1

    def Q(t):  # (1 + C1^2 f^2)^(-1/2)
        return 1.0 / np.sqrt(1.0 + c2 * np.asarray(sp.f(t), dtype=float) ** 2)

    def fs(t):
        return np.asarray(sp.f(t), dtype=float) * Q(t)

    def fsp(t):
        return np.asarray(sp.fp(t), dtype=float) * Q(t) ** 3

    def fspp(t):
        f, fp, fpp = (np.asarray(fn(t), dtype=float) for fn in (sp.f, sp.fp, sp.fpp))
        q = Q(t)
        return fpp * q**3 - 3.0 * c2 * f * fp * fp * q**5

    return SphereProfile(
        L=sp.L,
        f=fs,
        fp=fsp,
        fpp=fspp,
        family=f"soul-{sp.family}",
        params={"C1": C1},
        concave=sp.concave,
    )


def soul_metric(qspec):
    """2-chart (t, s) of the soul with its induced metric dt^2 + f_sigma^2 ds^2."""
    chart = sphere_chart(soul_profile(qspec))
    return MetricChart(
        dim=2,
        box=chart.box,
        components=chart.components,
        fd_step=chart.fd_step,
        periodic=chart.periodic,
        scan_margin=chart.scan_margin,
        name=f"soul-{qspec.name}",
    )


def prescribe_soul_profile(target, C1, family=None):
    """Sphere profile whose quotient soul comes out as ``target``.

    Inverts f_sigma = f/sqrt(1 + C1^2 f^2): f = f_sigma/sqrt(1 - C1^2 f_sigma^2).
    Only possible when C1 * max(f_sigma) < 1.
    """
    c2 = float(C1) * float(C1)
    tt = np.linspace(0.0, target.L, 2001)
    fmax = float(np.max(np.asarray(target.f(tt), dtype=float)))
    if c2 * fmax * fmax >= 1.0 - 1e-9:
        raise RescaleNotInvertible(
            f"prescribe_soul_profile: need |C1| max(f) < 1, got {abs(C1) * fmax:.6f}"
        )

    def U(t):  # (1 - C1^2 f_sigma^2)^(-1/2)
        return 1.0 / np.sqrt(1.0 - c2 * np.asarray(target.f(t), dtype=float) ** 2)

    def f(t):
        return np.asarray(target.f(t), dtype=float) * U(t)

    def fp(t):
        return np.asarray(target.fp(t), dtype=float) * U(t) ** 3

    def fpp(t):
        ft, fpt, fppt = (
            np.asarray(fn(t), dtype=float) for fn in (target.f, target.fp, target.fpp)
        )
        u = U(t)
        return fppt * u**3 + 3.0 * c2 * ft * fpt * fpt * u**5

    return SphereProfile(
        L=target.L,
        f=f,
        fp=fp,
        fpp=fpp,
        family=family or f"prescribed-{target.family}",
        params={"C1": float(C1), "target": target.family},
        concave=target.concave,
    )


# -- curvature data along the soul ----------------------------------------


@dataclass(frozen=True)
class SoulData:
    """Curvature functions measured along the soul, with fitted models.

    ``k``, ``F``, ``G`` are raw per-point values from the 4-chart curvature
    tensor in the orthonormal frame (X, Y, W, V) = unit (d_t, d_s, d_x, d_y):
    soul sectional curvature, normal-connection curvature and normal-plane
    curvature.  ``*_fit`` are least-squares Chebyshev models on the band
    (noise-robust: differentiating an interpolant of finite-difference data
    would amplify its jitter).  Hessian columns are with respect to the soul
    metric: hess_tt G = G'', hess_ss G = f_sigma f_sigma' G'.
    """

    ts: np.ndarray
    k: np.ndarray
    F: np.ndarray
    G: np.ndarray
    k_fit: Callable
    F_fit: Callable
    Fp_fit: Callable
    G_fit: Callable
    Gp_fit: Callable
    Gpp_fit: Callable
    f_sigma: SphereProfile

    def hess_G_tt(self, t):
        return self.Gpp_fit(t)

    def hess_G_ss(self, t):
        return self.f_sigma.f(t) * self.f_sigma.fp(t) * self.Gp_fit(t)

    def laplacian_G(self, t):
        return self.Gpp_fit(t) + self.f_sigma.fp(t) / self.f_sigma.f(t) * self.Gp_fit(t)

    def columns(self):
        """Rows (t, k, F, G, hessG_tt, hessG_ss) for reporting."""
        return np.column_stack(
            [
                self.ts,
                self.k,
                self.F,
                self.G,
                self.hess_G_tt(self.ts),
                self.hess_G_ss(self.ts),
            ]
        )


def frame_at_soul(qspec, t, s=1.0):
    """Orthonormal frame (X, Y, W, V) at a soul point, by Gram-Schmidt on
    the coordinate frame in order (t, s, x, y)."""
    chart = build_quotient(qspec)
    p = np.array([t, s, 0.0, 0.0])
    g = chart.metric(p)
    frame = []
    for i in range(4):
        v = np.zeros(4)
        v[i] = 1.0
        for e in frame:
            v = v - (e @ g @ v) * e
        n2 = v @ g @ v
        if n2 <= 1e-12:
            raise FrameDegeneracy(
                f"frame_at_soul: coordinate frame degenerates at t={t:.4f} "
                f"(direction {i}, squared norm {n2:.3e})"
            )
        frame.append(v / np.sqrt(n2))
    return np.stack(frame)


def soul_data(qspec, band_margin=0.25, n_points=321, fit_degree=24, s=1.0,
              fd_step=2.5e-4):
    """Measure k, F, G along the soul band and fit smooth models.

    The band margin and the (smaller than default) step size keep the
    curvature noise near the poles -- which scales like (step/f_sigma)^2
    times the curvature -- out of the fitted derivatives.
    """
    chart = replace(build_quotient(qspec), fd_step=fd_step)
    L = qspec.sphere.L
    ts = np.linspace(band_margin, L - band_margin, n_points)
    fs_prof = soul_profile(qspec)

    k = np.empty(n_points)
    F = np.empty(n_points)
    G = np.empty(n_points)
    ex = np.eye(4)
    for i, t in enumerate(ts):
        p = np.array([t, s, 0.0, 0.0])
        R, g = riemann_with_metric(chart, p)
        if not (g[1, 1] > 1e-12):
            raise FrameDegeneracy(f"soul_data: f_sigma^2 vanishes at t={t:.4f}")
        # at the soul the metric is diagonal, so the frame is just rescaled
        # coordinate directions; assemble it explicitly to keep signs fixed
        X = ex[0] / np.sqrt(g[0, 0])
        Y = ex[1] / np.sqrt(g[1, 1])
        W = ex[2] / np.sqrt(g[2, 2])
        V = ex[3] / np.sqrt(g[3, 3])
        k[i] = np.einsum("ijkl,i,j,k,l->", R, X, Y, Y, X)
        G[i] = np.einsum("ijkl,i,j,k,l->", R, W, V, V, W)
        F[i] = np.einsum("ijkl,i,j,k,l->", R, X, Y, W, V)

    dom = [ts[0], ts[-1]]
    k_fit = Chebyshev.fit(ts, k, fit_degree, domain=dom)
    F_fit = Chebyshev.fit(ts, F, fit_degree, domain=dom)
    G_fit = Chebyshev.fit(ts, G, fit_degree, domain=dom)
    return SoulData(
        ts=ts,
        k=k,
        F=F,
        G=G,
        k_fit=k_fit,
        F_fit=F_fit,
        Fp_fit=F_fit.deriv(),
        G_fit=G_fit,
        Gp_fit=G_fit.deriv(),
        Gpp_fit=G_fit.deriv(2),
        f_sigma=fs_prof,
    )


def soul_curvature_closed_form(qspec, t):
    """Independent closed forms for (k, F, G) on the soul.

    With q^2 = 1 + C1^2 f^2 and K0 = -f''/f the sphere-factor curvature:

        k = K0/q^2 + 3 C1^2 f'^2 / q^4
        F = -2 C1 C2 f' / q^3
        G = Lambda + 3 C2^2 / q^2

    These come from the submersion curvature formulas applied to the product
    (vertical direction K, A-tensor proportional to the twist speeds); they
    never touch the chart machinery, which makes them a true second route.
    The sign of F is an orientation convention for (W, V); the one here
    matches the coordinate frame (d_t, d_s, d_x, d_y) used by ``soul_data``.
    Only F^2, (XF)^2 and the vanishing of the total integral are
    orientation-independent.
    """
    sp, C1, C2 = qspec.sphere, qspec.killing.C1, qspec.killing.C2
    t = np.asarray(t, dtype=float)
    f = np.asarray(sp.f(t), dtype=float)
    fp = np.asarray(sp.fp(t), dtype=float)
    fpp = np.asarray(sp.fpp(t), dtype=float)
    q2 = 1.0 + C1 * C1 * f * f
    k = -fpp / (f * q2) + 3.0 * C1 * C1 * fp * fp / q2**2
    F = -2.0 * C1 * C2 * fp / q2**1.5
    G = qspec.plane.Lambda + 3.0 * C2 * C2 / q2
    return k, F, G


def totally_geodesic_residual(qspec, ts=None, s=1.0):
    """Max |Gamma^{x or y}_{ab}| over soul-tangent a, b at soul points.

    Vanishing of these Christoffel symbols is totally-geodesicity of the
    zero section in chart terms.
    """
    chart = build_quotient(qspec)
    if ts is None:
        ts = np.linspace(0.25, qspec.sphere.L - 0.25, 17)
    worst = 0.0
    for t in np.atleast_1d(ts):
        Gam = christoffel(chart, np.array([float(t), s, 0.0, 0.0]))
        worst = max(worst, float(np.max(np.abs(Gam[2:4, 0:2, 0:2]))))
    return worst


def integral_F(qspec, band_margin=0.05, n_points=801):
    """Integral of F over the soul (must vanish: the normal bundle is trivial).

    integral = 2 pi * int F(t) f_sigma(t) dt.  The integrand vanishes at both
    poles (f_sigma does), so the band samples are closed with exact zeros at
    t = 0, L and integrated by spline quadrature.
    """
    from scipy.interpolate import CubicSpline

    data = soul_data(qspec, band_margin=band_margin, n_points=n_points)
    fs = data.f_sigma
    ts = np.concatenate([[0.0], data.ts, [qspec.sphere.L]])
    vals = np.concatenate(
        [[0.0], data.F * np.asarray(fs.f(data.ts), dtype=float), [0.0]]
    )
    spline = CubicSpline(ts, vals)
    return 2 * np.pi * float(spline.integrate(0.0, qspec.sphere.L))


def nonneg_audit(qspec, sampler=None, tol=1e-5):
    """Scan sectional curvatures of the quotient chart for negative values."""
    chart = build_quotient(qspec)
    if sampler is None:
        sampler = PlaneSampler(n_points=250, planes_per_point=8, seed=0)
    return min_sectional_scan(chart, sampler, tol=tol)
