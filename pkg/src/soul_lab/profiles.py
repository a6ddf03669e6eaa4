"""Rotationally symmetric metric generators.

Two profile families feed everything else: a sphere profile f on [0, L]
(metric dt^2 + f^2 ds^2, poles at both ends) and a plane profile b on
[0, rho_max] (metric d_rho^2 + b^2 d_theta^2, smooth vertex at the origin).
The plane factor is always delivered in a Cartesian chart that is regular at
the vertex; the warp coefficient w = (b^2 - rho^2)/rho^4 that appears there
is computed by family-specific series near the origin so the cancellation
never reaches the metric.

Also here: Killing-field norms and the Cheeger rescale of a chart metric
along a Killing field (shrink by a^2/(a^2 + |V|^2) along V, fix V-perp),
which later modules use both as a construction and as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .charts import MetricChart
from .errors import (
    InvalidProfile,
    NegativeSquaredNorm,
    NonPositiveScale,
    NonSmoothVertex,
    OutOfDomain,
)

POLE_PAD = 1e-4          # chart boxes stop this far short of coordinate poles
SPHERE_FD = 5e-4         # finite-difference step for sphere (and derived) charts
SPHERE_SCAN_MARGIN = 0.25  # sampler margin on the polar axis


@dataclass(frozen=True)
class SphereProfile:
    """Warping profile of a rotationally symmetric metric on S^2.

    ``f``, ``fp``, ``fpp`` are vectorized callables on [0, L] (value, first
    and second derivative).  Closure at the poles -- f(0)=f(L)=0, f'(0)=1,
    f'(L)=-1 -- and |f'| <= 1 are checked at construction; ``concave`` adds
    the nonnegative-curvature check f'' <= 0.
    """

    L: float
    f: Callable
    fp: Callable
    fpp: Callable
    family: str = "custom"
    params: dict = field(default_factory=dict)
    concave: bool = True

    def __post_init__(self):
        if not np.isfinite(self.L) or self.L <= 0:
            raise InvalidProfile(f"sphere profile: L must be positive, got {self.L}")
        tol = 1e-8
        for cond, got, want in (
            ("f(0) = 0", float(self.f(0.0)), 0.0),
            ("f(L) = 0", float(self.f(self.L)), 0.0),
            ("f'(0) = 1", float(self.fp(0.0)), 1.0),
            ("f'(L) = -1", float(self.fp(self.L)), -1.0),
        ):
            if abs(got - want) > tol:
                raise InvalidProfile(
                    f"sphere profile ({self.family}): {cond} violated, got {got:.3e}"
                )
        t = np.linspace(0.0, self.L, 801)
        ft = np.asarray(self.f(t), dtype=float)
        if np.any(ft[1:-1] <= 0):
            bad = t[1:-1][ft[1:-1] <= 0][0]
            raise InvalidProfile(
                f"sphere profile ({self.family}): f > 0 on (0, L) violated at t={bad:.4f}"
            )
        fpt = np.asarray(self.fp(t), dtype=float)
        if np.max(np.abs(fpt)) > 1.0 + 1e-6:
            raise InvalidProfile(
                f"sphere profile ({self.family}): |f'| <= 1 violated "
                f"(max {np.max(np.abs(fpt)):.6f})"
            )
        if self.concave:
            # check away from the endpoints, where spline second derivatives
            # carry their boundary fitting error
            band = t[(t > 0.02 * self.L) & (t < 0.98 * self.L)]
            fppt = np.asarray(self.fpp(band), dtype=float)
            if np.max(fppt) > 1e-6:
                bad = band[np.argmax(fppt)]
                raise InvalidProfile(
                    f"sphere profile ({self.family}): must be concave, "
                    f"f'' <= 0 violated at t={bad:.4f} (f''={np.max(fppt):.3e})"
                )


def round_profile(R=1.0):
    """f = R sin(t/R): the round sphere of radius R (curvature 1/R^2)."""
    if R <= 0:
        raise InvalidProfile(f"round profile: R must be positive, got {R}")
    R = float(R)
    return SphereProfile(
        L=np.pi * R,
        f=lambda t: R * np.sin(np.asarray(t, dtype=float) / R),
        fp=lambda t: np.cos(np.asarray(t, dtype=float) / R),
        fpp=lambda t: -np.sin(np.asarray(t, dtype=float) / R) / R,
        family="round",
        params={"R": R},
    )


def spline_profile(values, L=np.pi, concave=True):
    """Clamped cubic spline through uniform samples of f, with f'= +1/-1 ends.

    ``values`` are the profile values on a uniform knot grid over [0, L]
    (endpoints included; they are forced to 0).
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 8:
        raise InvalidProfile("spline profile: need at least 8 uniform knot values")
    knots = np.linspace(0.0, float(L), values.size)
    vals = values.copy()
    vals[0] = 0.0
    vals[-1] = 0.0
    cs = CubicSpline(knots, vals, bc_type=((1, 1.0), (1, -1.0)))
    d1 = cs.derivative(1)
    d2 = cs.derivative(2)
    return SphereProfile(
        L=float(L),
        f=lambda t: cs(np.asarray(t, dtype=float)),
        fp=lambda t: d1(np.asarray(t, dtype=float)),
        fpp=lambda t: d2(np.asarray(t, dtype=float)),
        family="spline",
        params={"knots": values.size, "L": float(L)},
        concave=concave,
    )


@dataclass(frozen=True)
class PlaneProfile:
    """Fiber warping profile b on [0, rho_max] with a smooth vertex.

    ``w`` evaluates (b^2 - rho^2)/rho^4 stably down to rho = 0 (each family
    supplies a series branch near the origin); ``Lambda`` is the vertex
    Gaussian curvature, fitted as -6 b3 from the odd series
    b = rho + b3 rho^3 + b5 rho^5 + ...
    """

    rho_max: float
    b: Callable
    bp: Callable
    bpp: Callable
    w: Callable
    Lambda: float
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.rho_max) or self.rho_max <= 0:
            raise InvalidProfile(
                f"plane profile: rho_max must be positive, got {self.rho_max}"
            )
        if abs(float(self.b(0.0))) > 1e-12:
            raise InvalidProfile(
                f"plane profile ({self.family}): b(0) = 0 violated, "
                f"got {float(self.b(0.0)):.3e}"
            )
        rho = np.linspace(0.0, self.rho_max, 801)[1:]
        bt = np.asarray(self.b(rho), dtype=float)
        if np.any(bt <= 0):
            raise InvalidProfile(
                f"plane profile ({self.family}): b > 0 on (0, rho_max] violated"
            )
        bpp_t = np.asarray(self.bpp(rho), dtype=float)
        if np.max(bpp_t) > 1e-8:
            bad = rho[np.argmax(bpp_t)]
            raise InvalidProfile(
                f"plane profile ({self.family}): must be concave, "
                f"b'' <= 0 violated at rho={bad:.4f} (b''={np.max(bpp_t):.3e})"
            )
        # vertex regularity: the odd-series fit must reproduce b near 0
        fit = fit_vertex_series(self.b)
        if fit.residual > 1e-6:
            raise NonSmoothVertex(
                f"plane profile ({self.family}): odd-series fit residual "
                f"{fit.residual:.3e} at the vertex (b'(0) = 1 or smoothness fails)"
            )
        if abs(fit.Lambda - self.Lambda) > 1e-3:
            raise InvalidProfile(
                f"plane profile ({self.family}): declared vertex curvature "
                f"{self.Lambda} vs fitted {fit.Lambda:.6f}"
            )


@dataclass(frozen=True)
class VertexFit:
    b3: float
    b5: float
    Lambda: float
    residual: float


def fit_vertex_series(b):
    """Fit b(rho) = rho + b3 rho^3 + b5 rho^5 near the vertex.

    Returns the coefficients, the implied vertex curvature Lambda = -6 b3,
    and the relative residual of the fit (large when b'(0) != 1 or the
    profile is not odd-smooth at 0).
    """
    rho = np.linspace(0.02, 0.2, 10)
    bv = np.asarray(b(rho), dtype=float)
    target = bv - rho
    A = np.stack([rho**3, rho**5], axis=1)
    coef, *_ = np.linalg.lstsq(A, target, rcond=None)
    b3, b5 = float(coef[0]), float(coef[1])
    resid = np.max(np.abs(A @ coef - target)) / np.max(np.abs(bv))
    return VertexFit(b3=b3, b5=b5, Lambda=-6.0 * b3, residual=float(resid))


def flat_plane(rho_max=2.0):
    """b = rho: the flat plane, Lambda = 0."""
    one = lambda r: np.ones_like(np.asarray(r, dtype=float))
    return PlaneProfile(
        rho_max=float(rho_max),
        b=lambda r: np.asarray(r, dtype=float),
        bp=one,
        bpp=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        w=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        Lambda=0.0,
        family="flat",
        params={"rho_max": float(rho_max)},
    )


def cap_plane(rho_max=1.4):
    """b = sin(rho): a round spherical cap, Lambda = 1 (needs rho_max < pi/2)."""
    if rho_max >= np.pi / 2:
        raise InvalidProfile(
            f"cap profile: rho_max must stay below pi/2 (b' > 0), got {rho_max}"
        )

    def w(r):
        r = np.asarray(r, dtype=float)
        r2 = r * r
        # (sin^2 r - r^2)/r^4 = -1/3 + 2 r^2/45 - r^4/315 + 2 r^6/14175 - ...
        series = -1.0 / 3.0 + r2 * (2.0 / 45.0 + r2 * (-1.0 / 315.0 + r2 * (2.0 / 14175.0)))
        with np.errstate(divide="ignore", invalid="ignore"):
            direct = (np.sin(r) ** 2 - r2) / np.where(r2 > 0, r2 * r2, 1.0)
        return np.where(r < 0.02, series, direct)

    return PlaneProfile(
        rho_max=float(rho_max),
        b=lambda r: np.sin(np.asarray(r, dtype=float)),
        bp=lambda r: np.cos(np.asarray(r, dtype=float)),
        bpp=lambda r: -np.sin(np.asarray(r, dtype=float)),
        w=w,
        Lambda=1.0,
        family="cap",
        params={"rho_max": float(rho_max)},
    )


def tanh_plane(rho_max=2.0):
    """b = tanh(rho): asymptotically cylindrical, Lambda = 2."""

    def w(r):
        r = np.asarray(r, dtype=float)
        r2 = r * r
        # (tanh^2 r - r^2)/r^4 = -2/3 + 17 r^2/45 - 62 r^4/315 + 1382 r^6/14175 - ...
        series = -2.0 / 3.0 + r2 * (
            17.0 / 45.0 + r2 * (-62.0 / 315.0 + r2 * (1382.0 / 14175.0))
        )
        with np.errstate(divide="ignore", invalid="ignore"):
            direct = (np.tanh(r) ** 2 - r2) / np.where(r2 > 0, r2 * r2, 1.0)
        return np.where(r < 0.02, series, direct)

    sech2 = lambda r: 1.0 / np.cosh(np.asarray(r, dtype=float)) ** 2
    return PlaneProfile(
        rho_max=float(rho_max),
        b=lambda r: np.tanh(np.asarray(r, dtype=float)),
        bp=sech2,
        bpp=lambda r: -2.0 * np.tanh(np.asarray(r, dtype=float)) * sech2(r),
        w=w,
        Lambda=2.0,
        family="tanh",
        params={"rho_max": float(rho_max)},
    )


def series_plane(b3, b5=0.0, rho_max=1.0, family="series"):
    """b = rho + b3 rho^3 + b5 rho^5 given directly by its vertex series."""
    b3, b5 = float(b3), float(b5)

    def w(r):
        r = np.asarray(r, dtype=float)
        r2 = r * r
        # b^2 = rho^2 + 2 b3 rho^4 + (b3^2 + 2 b5) rho^6 + 2 b3 b5 rho^8 + b5^2 rho^10
        return (
            2.0 * b3
            + (b3 * b3 + 2.0 * b5) * r2
            + 2.0 * b3 * b5 * r2 * r2
            + b5 * b5 * r2 * r2 * r2
        )

    return PlaneProfile(
        rho_max=float(rho_max),
        b=lambda r: np.asarray(r, dtype=float)
        + b3 * np.asarray(r, dtype=float) ** 3
        + b5 * np.asarray(r, dtype=float) ** 5,
        bp=lambda r: 1.0 + 3 * b3 * np.asarray(r, dtype=float) ** 2
        + 5 * b5 * np.asarray(r, dtype=float) ** 4,
        bpp=lambda r: 6 * b3 * np.asarray(r, dtype=float)
        + 20 * b5 * np.asarray(r, dtype=float) ** 3,
        w=w,
        Lambda=-6.0 * b3,
        family=family,
        params={"b3": b3, "b5": b5, "rho_max": float(rho_max)},
    )


@dataclass(frozen=True)
class KillingSpec:
    """Angular speeds of the diagonal isometric flow: C1 on the sphere
    factor, C2 on the plane factor; the line-factor translation speed is
    normalized to 1."""

    C1: float
    C2: float

    def __post_init__(self):
        if not (np.isfinite(self.C1) and np.isfinite(self.C2)):
            raise InvalidProfile("killing spec: C1, C2 must be finite")


# -- charts ---------------------------------------------------------------


def sphere_chart(prof):
    """(t, s) chart with metric dt^2 + f(t)^2 ds^2, s periodic.

    The box stops POLE_PAD short of the poles so the metric stays positive
    definite on the closed box; samplers add their own wider margins.
    """

    def comp(pts):
        pts = np.asarray(pts, dtype=float)
        t = pts[..., 0]
        g = np.zeros(pts.shape[:-1] + (2, 2))
        g[..., 0, 0] = 1.0
        g[..., 1, 1] = np.asarray(prof.f(t), dtype=float) ** 2
        return g

    return MetricChart(
        dim=2,
        box=np.array([[POLE_PAD, prof.L - POLE_PAD], [0.0, 2 * np.pi]]),
        components=comp,
        fd_step=SPHERE_FD,
        periodic=(False, True),
        scan_margin=(SPHERE_SCAN_MARGIN, 0.0),
        name=f"sphere-{prof.family}",
    )


def plane_warp_block(prof, x, y):
    """Metric components of the plane factor at Cartesian points.

    g = I + w(rho) [[y^2, -xy], [-xy, x^2]] with w = (b^2 - rho^2)/rho^4,
    which is the rotationally symmetric metric d_rho^2 + b^2 d_theta^2
    written vertex-regularly.
    """
    rho = np.sqrt(x * x + y * y)
    w = np.asarray(prof.w(rho), dtype=float)
    g = np.zeros(np.shape(x) + (2, 2))
    g[..., 0, 0] = 1.0 + w * y * y
    g[..., 0, 1] = -w * x * y
    g[..., 1, 0] = g[..., 0, 1]
    g[..., 1, 1] = 1.0 + w * x * x
    return g


def plane_chart_cartesian(prof):
    """Vertex-regular Cartesian (x, y) chart of the plane factor.

    The box is the largest axis-aligned square (slightly shrunk) whose
    closure, plus finite-difference stencil room, stays inside the disk of
    radius rho_max where b is defined.
    """
    half = (prof.rho_max - 0.02) / np.sqrt(2.0)
    if half <= 0.05:
        raise InvalidProfile(
            f"plane profile ({prof.family}): rho_max {prof.rho_max} leaves no room "
            "for a Cartesian chart"
        )

    def comp(pts):
        pts = np.asarray(pts, dtype=float)
        return plane_warp_block(prof, pts[..., 0], pts[..., 1])

    return MetricChart(
        dim=2,
        box=np.array([[-half, half], [-half, half]]),
        components=comp,
        name=f"plane-{prof.family}",
    )


def plane_chart_polar(prof, rho_min=0.1):
    """(rho, theta) polar chart of the plane factor, away from the vertex."""

    def comp(pts):
        pts = np.asarray(pts, dtype=float)
        rho = pts[..., 0]
        g = np.zeros(pts.shape[:-1] + (2, 2))
        g[..., 0, 0] = 1.0
        g[..., 1, 1] = np.asarray(prof.b(rho), dtype=float) ** 2
        return g

    return MetricChart(
        dim=2,
        box=np.array([[rho_min, prof.rho_max - 0.02], [0.0, 2 * np.pi]]),
        components=comp,
        periodic=(False, True),
        name=f"plane-polar-{prof.family}",
    )


# -- Killing fields and the Cheeger rescale -------------------------------


def killing_norm(prof, C, t):
    """g0-norm |C| f(t) of the rotation field scaled by C."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0) or np.any(t_arr >= prof.L):
        raise OutOfDomain(
            f"killing_norm: t must lie in (0, {prof.L:.6f})"
        )
    return abs(C) * np.asarray(prof.f(t_arr), dtype=float)


def rescaled_norm(x2_g0, a):
    """Squared norm after the Cheeger rescale: a^2 x2 / (a^2 + x2)."""
    x2_g0 = np.asarray(x2_g0, dtype=float)
    if np.any(x2_g0 < 0):
        raise NegativeSquaredNorm(f"rescaled_norm: squared norm {x2_g0} < 0")
    if a <= 0:
        raise NonPositiveScale(f"rescaled_norm: scale a must be positive, got {a}")
    return a * a * x2_g0 / (a * a + x2_g0)


def cheeger_rescale(chart, V, a, name=None):
    """Shrink a chart metric along a Killing field V by a^2/(a^2 + |V|^2).

    ``V`` maps points (..., dim) to field components (..., dim).  Pointwise,

        g_new(u, w) = g(u, w) - g(u, V) g(w, V) / (a^2 + |V|^2),

    which fixes the orthogonal complement of V and rescales |V|^2 to
    a^2 |V|^2/(a^2 + |V|^2).  Points where V vanishes pass through unchanged.
    """
    if a <= 0:
        raise NonPositiveScale(f"cheeger_rescale: scale a must be positive, got {a}")
    a2 = float(a) * float(a)

    def comp(pts):
        pts = np.asarray(pts, dtype=float)
        g = chart.metric(pts)
        v = np.asarray(V(pts), dtype=float)
        gv = np.einsum("...ij,...j->...i", g, v)
        v2 = np.einsum("...i,...i->...", v, gv)
        return g - gv[..., :, None] * gv[..., None, :] / (a2 + v2)[..., None, None]

    return MetricChart(
        dim=chart.dim,
        box=chart.box,
        components=comp,
        fd_step=chart.fd_step,
        periodic=chart.periodic,
        scan_margin=chart.scan_margin,
        name=name or f"{chart.name}-rescaled",
    )
