"""Finite-difference tensor calculus on coordinate charts.

A chart is a box in R^n together with a vectorized callable returning the
metric components at each point.  Everything downstream (Christoffel symbols,
the curvature tensor, sectional curvatures, geodesics, directional Hessians,
quadrature) is built from that single callable with central differences, so
any metric expressible in closed form plugs in unchanged.

Derivative steps use ``fd_step`` (default 1e-3).  All second-derivative
quantities converge at order 2 in ``fd_step``; the quadrature rule is
composite Simpson, order 4 for smooth integrands.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DegeneratePlane,
    EmptySample,
    LeftChartDomain,
    NonFiniteFieldValue,
    PointTooCloseToBoundary,
    SingularMetric,
)

DEFAULT_FD_STEP = 1e-3

# Square roots of primes drive the Kronecker sampler; the sequence is a
# classical low-discrepancy choice and is reproducible by construction.
_PRIMES = np.array([2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43], dtype=float)


@dataclass(frozen=True)
class MetricChart:
    """A coordinate chart carrying a Riemannian metric.

    Parameters
    ----------
    dim : int
        Number of coordinates.
    box : np.ndarray, shape (dim, 2)
        Closed coordinate box.  The metric may degenerate on the boundary
        (polar axes); it must be symmetric positive definite strictly inside.
    components : callable
        Maps an array of points of shape (..., dim) to metric components of
        shape (..., dim, dim).  Must be finite on a neighborhood of the box
        so that finite-difference stencils near the edge stay evaluable.
    fd_step : float
        Central-difference step for all derivative operators.
    periodic : tuple of bool
        Axes marked periodic are exempt from domain-exit checks (angular
        coordinates whose components extend by formula).
    scan_margin : tuple of float or None
        Per-axis margin the deterministic sampler keeps from the box edge.
        Defaults to 5 * fd_step on every axis; charts with coordinate
        degeneracies on an edge declare a wider margin there.
    name : str
        Label used in error messages and reports.
    """

    dim: int
    box: np.ndarray
    components: Callable[[np.ndarray], np.ndarray]
    fd_step: float = DEFAULT_FD_STEP
    periodic: tuple = ()
    scan_margin: tuple | None = None
    name: str = "chart"

    def __post_init__(self):
        box = np.asarray(self.box, dtype=float)
        if box.shape != (self.dim, 2):
            raise ValueError(f"box must have shape ({self.dim}, 2), got {box.shape}")
        object.__setattr__(self, "box", box)
        if self.fd_step <= 0:
            raise ValueError("fd_step must be positive")
        per = tuple(self.periodic) if self.periodic else tuple(False for _ in range(self.dim))
        if len(per) != self.dim:
            raise ValueError("periodic must have one flag per axis")
        object.__setattr__(self, "periodic", per)
        if self.scan_margin is not None:
            sm = tuple(float(m) for m in self.scan_margin)
            if len(sm) != self.dim:
                raise ValueError("scan_margin must have one entry per axis")
            object.__setattr__(self, "scan_margin", sm)

    # -- small conveniences ------------------------------------------------

    def metric(self, pts):
        """Metric components at ``pts`` (vectorized)."""
        g = self.components(np.asarray(pts, dtype=float))
        return np.asarray(g, dtype=float)

    def contains(self, p, margin=0.0):
        p = np.asarray(p, dtype=float)
        lo = self.box[:, 0] + margin
        hi = self.box[:, 1] - margin
        ok = np.ones(p.shape[:-1], dtype=bool)
        for ax in range(self.dim):
            if self.periodic[ax]:
                continue
            ok &= (p[..., ax] >= lo[ax]) & (p[..., ax] <= hi[ax])
        return ok

    def effective_scan_margin(self):
        if self.scan_margin is not None:
            return np.asarray(self.scan_margin, dtype=float)
        return np.full(self.dim, 5.0 * self.fd_step)


@dataclass(frozen=True)
class TangentPlane:
    """A 2-plane at a point, spanned by two coordinate-component vectors."""

    point: np.ndarray
    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class CurvatureReport:
    """Result of a sectional-curvature scan.

    ``passed`` is ``min_K >= -tolerance`` over the sampled set.
    """

    sample_count: int
    min_K: float
    max_K: float
    argmin: TangentPlane
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class PlaneSampler:
    """Deterministic (point, plane) sample stream for curvature scans.

    Points come from a Kronecker (sqrt-prime) low-discrepancy sequence over
    the chart box shrunk by per-axis margins; plane seed vectors come from
    the same stream and are orthonormalized in the metric at each point.
    Identical parameters always reproduce the identical sample.
    """

    n_points: int
    planes_per_point: int = 5
    seed: int = 0
    margin: tuple | None = None
    include_coordinate_planes: bool = True


def _require_interior(chart, p, margin_steps, op):
    p = np.asarray(p, dtype=float)
    if p.shape != (chart.dim,):
        raise ValueError(f"{op}: point must have shape ({chart.dim},)")
    margin = margin_steps * chart.fd_step
    if not bool(chart.contains(p, margin=margin)):
        raise PointTooCloseToBoundary(
            f"{op} on {chart.name}: point {p.tolist()} closer than "
            f"{margin_steps} fd steps to the box edge"
        )
    return p


def _check_spd(g, chart, where):
    """Cholesky-based positive definiteness check on a batch of matrices."""
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise SingularMetric(
            f"metric on {chart.name} is not positive definite near {where}"
        ) from None


def christoffel(chart, p):
    """Christoffel symbols Gamma^k_{ij} at a point, via central differences.

    Returns an array of shape (dim, dim, dim) indexed [k, i, j].
    """
    p = _require_interior(chart, p, 2, "christoffel")
    gamma, _ = _christoffel_core(chart, p[None, :])
    return gamma[0]


def _christoffel_core(chart, pts):
    """Christoffels at a batch of points; returns (gamma, g_center)."""
    d = chart.dim
    h = chart.fd_step
    n = pts.shape[0]
    eye = np.eye(d)
    # stencil: [center, +e_0, -e_0, +e_1, -e_1, ...]
    offsets = np.zeros((2 * d + 1, d))
    offsets[1::2] = h * eye
    offsets[2::2] = -h * eye
    stencil = pts[:, None, :] + offsets[None, :, :]
    g = chart.metric(stencil.reshape(-1, d)).reshape(n, 2 * d + 1, d, d)
    if not np.all(np.isfinite(g)):
        raise SingularMetric(f"metric on {chart.name} returned non-finite components")
    _check_spd(g.reshape(-1, d, d), chart, pts[0])
    g0 = g[:, 0]
    dg = (g[:, 1::2] - g[:, 2::2]) / (2.0 * h)  # [n, k, i, j] = d_k g_ij
    ginv = np.linalg.inv(g0)
    # Gamma^m_{ij} = 1/2 g^{mk} (d_i g_{kj} + d_j g_{ik} - d_k g_{ij})
    bracket = (
        np.einsum("nikj->nkij", dg)
        + np.einsum("njik->nkij", dg)
        - dg
    )
    gamma = 0.5 * np.einsum("nmk,nkij->nmij", ginv, bracket)
    return gamma, g0


def riemann(chart, p):
    """Covariant curvature tensor R_{ijkl} at a point.

    Convention: R(U, V)W = nabla_U nabla_V W - nabla_V nabla_U W on
    coordinate fields, and R_{ijkl} = g(R(e_i, e_j) e_k, e_l).  With this
    sign the round unit sphere has R_{issi}, and hence every sectional
    curvature, equal to +1.
    """
    p = _require_interior(chart, p, 3, "riemann")
    Rdown, _ = riemann_with_metric(chart, p)
    return Rdown


def riemann_with_metric(chart, p):
    """Curvature tensor and metric at ``p`` in one pass (shared stencils).

    The tensor is assembled in fully lowered form,

        R_ijkl = 1/2 (d_i d_k g_jl + d_j d_l g_ik - d_i d_l g_jk - d_j d_k g_il)
                 + g^mn (G_mjl G_nik - G_mil G_njk),

    with G_mij the lowered Christoffel symbols.  Every ingredient is a
    derivative of the (smooth) metric components, so the finite-difference
    error stays relative even where a coordinate direction degenerates —
    assembling from the mixed-index Christoffels instead would differentiate
    their 1/f-type singular factors and amplify the truncation error near
    such an edge.  All four algebraic index symmetries hold to machine
    precision by construction; the first Bianchi identity is a genuine check.
    """
    d = chart.dim
    h = chart.fd_step
    p = np.asarray(p, dtype=float)
    eye = np.eye(d)
    iu, ju = np.triu_indices(d, k=1)
    npairs = iu.size
    offsets = np.zeros((1 + 2 * d + 4 * npairs, d))
    offsets[1:1 + d] = h * eye
    offsets[1 + d:1 + 2 * d] = -h * eye
    corner = 1 + 2 * d
    for c, (i, j) in enumerate(zip(iu, ju)):
        base = corner + 4 * c
        offsets[base + 0, i], offsets[base + 0, j] = h, h
        offsets[base + 1, i], offsets[base + 1, j] = h, -h
        offsets[base + 2, i], offsets[base + 2, j] = -h, h
        offsets[base + 3, i], offsets[base + 3, j] = -h, -h
    g = chart.metric(p[None, :] + offsets)
    if not np.all(np.isfinite(g)):
        raise SingularMetric(f"metric on {chart.name} returned non-finite components")
    _check_spd(g, chart, p)
    g0 = g[0]
    gp, gm = g[1:1 + d], g[1 + d:1 + 2 * d]
    d1 = (gp - gm) / (2.0 * h)                       # [i, a, b] = d_i g_ab
    d2 = np.empty((d, d, d, d))                       # [i, j, a, b] = d_i d_j g_ab
    diag = (gp - 2.0 * g0[None] + gm) / (h * h)
    for i in range(d):
        d2[i, i] = diag[i]
    for c, (i, j) in enumerate(zip(iu, ju)):
        base = corner + 4 * c
        mixed = (g[base + 0] - g[base + 1] - g[base + 2] + g[base + 3]) / (4.0 * h * h)
        d2[i, j] = mixed
        d2[j, i] = mixed
    # lowered Christoffels G_mij = 1/2 (d_i g_jm + d_j g_im - d_m g_ij)
    gl = 0.5 * (
        np.einsum("ijm->mij", d1) + np.einsum("jim->mij", d1) - np.einsum("mij->mij", d1)
    )
    ginv = np.linalg.inv(g0)
    ginv = 0.5 * (ginv + ginv.T)
    second = 0.5 * (
        np.einsum("ikjl->ijkl", d2)
        + np.einsum("jlik->ijkl", d2)
        - np.einsum("iljk->ijkl", d2)
        - np.einsum("jkil->ijkl", d2)
    )
    quad = np.einsum("mn,mjl,nik->ijkl", ginv, gl, gl) - np.einsum(
        "mn,mil,njk->ijkl", ginv, gl, gl
    )
    return second + quad, g0


def sectional_from_tensor(R, g, u, v):
    """Sectional curvature of span{u, v} given R_{ijkl} and g at the point."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    guu = u @ g @ u
    gvv = v @ g @ v
    guv = u @ g @ v
    gram = guu * gvv - guv * guv
    scale = max(guu * gvv, np.finfo(float).tiny)
    if gram <= 1e-12 * scale:
        raise DegeneratePlane(
            f"plane spanned by {u.tolist()}, {v.tolist()} has normalized Gram "
            f"determinant {gram / scale:.3e}"
        )
    num = np.einsum("ijkl,i,j,k,l->", R, u, v, v, u)
    return float(num / gram)


def sectional(chart, plane):
    """Sectional curvature of a tangent plane on a chart."""
    R, g = riemann_with_metric(chart, np.asarray(plane.point, dtype=float))
    return sectional_from_tensor(R, g, plane.u, plane.v)


# -- geodesics ------------------------------------------------------------


def _geodesic_rhs(chart, x, v):
    gamma, _ = _christoffel_core(chart, x[None, :])
    acc = -np.einsum("kij,i,j->k", gamma[0], v, v)
    return v, acc


def geodesic(chart, p, v, arclength, steps=None):
    """Integrate the geodesic with initial point ``p`` and velocity ``v``.

    Classical fixed-step RK4 on the first-order system, with ``steps`` total
    steps (default 1000 per unit of |arclength|).  Returns
    ``(points, velocities)`` arrays of shape (steps + 1, dim).  Negative
    ``arclength`` integrates backwards.  The path must stay three
    finite-difference steps inside the box (the Christoffel stencil needs
    room); ``LeftChartDomain`` carries the exit state otherwise.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if arclength == 0:
        return p[None, :].copy(), v[None, :].copy()
    sign = 1.0 if arclength > 0 else -1.0
    total = abs(float(arclength))
    n = int(steps) if steps is not None else max(2, int(np.ceil(total * 1000)))
    dt = sign * total / n
    guard = 3.0 * chart.fd_step
    xs = np.empty((n + 1, chart.dim))
    vs = np.empty((n + 1, chart.dim))
    xs[0], vs[0] = p, v
    x, w = p.copy(), v.copy()
    for i in range(n):
        k1x, k1v = _geodesic_rhs(chart, x, w)
        k2x, k2v = _geodesic_rhs(chart, x + 0.5 * dt * k1x, w + 0.5 * dt * k1v)
        k3x, k3v = _geodesic_rhs(chart, x + 0.5 * dt * k2x, w + 0.5 * dt * k2v)
        k4x, k4v = _geodesic_rhs(chart, x + dt * k3x, w + dt * k3v)
        x = x + (dt / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        w = w + (dt / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not bool(chart.contains(x, margin=guard)):
            raise LeftChartDomain(
                f"geodesic on {chart.name} left the safe domain at arc length "
                f"{abs(dt) * (i + 1):.6g}",
                point=x.copy(),
                arclength=abs(dt) * (i + 1),
            )
        xs[i + 1], vs[i + 1] = x, w
    return xs, vs


def geodesic_speed_drift(chart, xs, vs):
    """Max relative drift of |v|_g along an integrated geodesic."""
    g = chart.metric(xs)
    sq = np.einsum("nij,ni,nj->n", g, vs, vs)
    return float(np.max(np.abs(sq - sq[0])) / max(abs(sq[0]), np.finfo(float).tiny))


def hessian_scalar(chart, fieldfunc, p, x, step=0.02, steps=40):
    """Directional covariant Hessian of a scalar field: d^2/ds^2 (f o gamma).

    ``x`` must be g-unit at ``p`` (tolerance 1e-6).  The field is sampled at
    five points along the geodesic through ``p`` with velocity ``x`` and the
    second derivative is taken with the fourth-order central stencil, so the
    geodesic parameterization supplies the Christoffel correction exactly.
    """
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    g = chart.metric(p[None, :])[0]
    sq = x @ g @ x
    if abs(sq - 1.0) > 1e-6:
        raise ValueError(f"hessian_scalar: direction must be unit, |x|^2 = {sq:.8f}")
    h = float(step)
    fwd_x, _ = geodesic(chart, p, x, 2.0 * h, steps=steps)
    bwd_x, _ = geodesic(chart, p, x, -2.0 * h, steps=steps)
    n = fwd_x.shape[0] - 1
    samples = np.stack(
        [bwd_x[n], bwd_x[n // 2], p, fwd_x[n // 2], fwd_x[n]]
    )
    vals = np.asarray([float(fieldfunc(q)) for q in samples])
    if not np.all(np.isfinite(vals)):
        raise NonFiniteFieldValue("hessian_scalar: field returned a non-finite value")
    return float(
        (-vals[4] + 16.0 * vals[3] - 30.0 * vals[2] + 16.0 * vals[1] - vals[0])
        / (12.0 * h * h)
    )


# -- quadrature -----------------------------------------------------------


def _simpson_weights(n, a, b):
    if n < 3 or n % 2 == 0:
        raise ValueError("Simpson rule needs an odd node count >= 3 per axis")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (b - a) / (3.0 * (n - 1))


def integrate_scalar(chart, fieldfunc, nodes=None):
    """Integrate ``field * sqrt(det g)`` over the chart box.

    ``nodes`` gives the (odd) Simpson node count per axis; the default is
    201 per axis for 2-charts, 61 for 3-charts, 41 for 4-charts.  The metric
    may degenerate on the box boundary; only the volume density is needed
    there, never an inverse, so polar-axis edges integrate cleanly.
    """
    if nodes is None:
        nodes = (201, 61, 41)[chart.dim - 2] if 2 <= chart.dim <= 4 else 21
        nodes = (nodes,) * chart.dim
    nodes = tuple(int(n) for n in nodes)
    if len(nodes) != chart.dim:
        raise ValueError("one node count per axis required")
    axes = []
    weights = []
    for ax, n in enumerate(nodes):
        a, b = chart.box[ax]
        axes.append(np.linspace(a, b, n))
        weights.append(_simpson_weights(n, a, b))
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    g = chart.metric(pts)
    det = np.linalg.det(g)
    det = np.where(det < 0, 0.0, det)
    vals = np.asarray(fieldfunc(pts), dtype=float)
    if vals.shape != (pts.shape[0],):
        raise ValueError("field must return one value per point")
    if not np.all(np.isfinite(vals)):
        bad = pts[~np.isfinite(vals)][0]
        raise NonFiniteFieldValue(
            f"integrate_scalar on {chart.name}: non-finite field value at {bad.tolist()}"
        )
    w = weights[0]
    for wi in weights[1:]:
        w = np.multiply.outer(w, wi)
    return float(np.sum(w.ravel() * vals * np.sqrt(det)))


# -- deterministic sampling ----------------------------------------------


def kronecker_sequence(n, dim, seed=0):
    """n low-discrepancy points in the unit cube (additive sqrt-prime lattice)."""
    if dim > _PRIMES.size:
        raise ValueError("sampler supports at most %d dimensions" % _PRIMES.size)
    idx = np.arange(1, n + 1, dtype=float)[:, None] + 9973.0 * seed
    return np.mod(idx * np.sqrt(_PRIMES[None, :dim]), 1.0)


def sample_points(chart, n, seed=0, margin=None):
    """Deterministic interior points of the chart box."""
    if n <= 0:
        raise EmptySample("sample_points: n must be positive")
    m = chart.effective_scan_margin() if margin is None else np.asarray(margin, float)
    lo = chart.box[:, 0] + m
    hi = chart.box[:, 1] - m
    if np.any(hi <= lo):
        raise EmptySample(f"sample_points on {chart.name}: margins exhaust the box")
    u = kronecker_sequence(n, chart.dim, seed=seed)
    return lo + (hi - lo) * u


def sampler_arrays(chart, sampler):
    """Materialize a sampler's deterministic inputs.

    Returns ``(pts, raw, coord_pairs)``: the scan points, the raw plane seeds
    in [-1, 1]^dim per point, and the coordinate-plane pairs (possibly empty).
    Chunking a scan over these arrays by index produces exactly the stream
    ``sample_planes`` yields, whatever the chunking.
    """
    pts = sample_points(chart, sampler.n_points, seed=sampler.seed, margin=sampler.margin)
    raw = kronecker_sequence(
        sampler.n_points * sampler.planes_per_point, 2 * chart.dim, seed=sampler.seed + 1
    ).reshape(sampler.n_points, sampler.planes_per_point, 2, chart.dim)
    raw = 2.0 * raw - 1.0
    coord_pairs = []
    if sampler.include_coordinate_planes:
        eye = np.eye(chart.dim)
        coord_pairs = [
            (eye[i], eye[j])
            for i in range(chart.dim)
            for j in range(i + 1, chart.dim)
        ]
    return pts, raw, coord_pairs


def orthonormal_pairs(g, candidates):
    """g-orthonormalize candidate vector pairs, dropping degenerate spans.

    The drop rule (residual norm² < 1e-8 · |b|²) is deterministic, so the
    surviving plane list depends only on ``g`` and the candidates.
    """
    planes = []
    for a, b in candidates:
        na = a / np.sqrt(a @ g @ a)
        gb = b @ g @ b
        b_perp = b - (na @ g @ b) * na
        nb_sq = b_perp @ g @ b_perp
        if nb_sq < 1e-8 * gb:
            continue
        planes.append((na, b_perp / np.sqrt(nb_sq)))
    return planes


def sample_planes(chart, sampler):
    """Iterate a sampler's deterministic (point, orthonormal plane) stream.

    Yields ``(point, R, g, [(u, v), ...])`` with the curvature tensor computed
    once per point.  Plane seeds come from the Kronecker stream mapped to
    [-1, 1]^dim and are orthonormalized in the metric at the point; pairs whose
    raw span is numerically degenerate are dropped (deterministically).
    """
    pts, raw, coord_pairs = sampler_arrays(chart, sampler)
    for i in range(sampler.n_points):
        R, g = riemann_with_metric(chart, pts[i])
        planes = orthonormal_pairs(
            g, coord_pairs + [tuple(raw[i, j]) for j in range(sampler.planes_per_point)]
        )
        yield pts[i], R, g, planes


def min_sectional_scan(chart, sampler, tol):
    """Scan sectional curvatures over a sampler's deterministic stream.

    The scan is an exact min/max over the sampled planes, with the attaining
    plane recorded; ``passed`` means no sampled curvature dropped below
    ``-tol``.  Associative merging keeps the result independent of how the
    sample is chunked.
    """
    best = np.inf
    worst = -np.inf
    best_plane = None
    count = 0
    for p, R, g, planes in sample_planes(chart, sampler):
        for u, v in planes:
            k = sectional_from_tensor(R, g, u, v)
            count += 1
            if k > worst:
                worst = k
            if k < best:
                best = k
                best_plane = TangentPlane(point=p.copy(), u=u.copy(), v=v.copy())
    if count == 0:
        raise EmptySample(f"min_sectional_scan on {chart.name}: no usable planes")
    return CurvatureReport(
        sample_count=count,
        min_K=float(best),
        max_K=float(worst),
        argmin=best_plane,
        tolerance=float(tol),
        passed=bool(best >= -tol),
    )
