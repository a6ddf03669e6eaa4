"""Acceptance gate: one test per acceptance criterion.

Run with ``pytest -v tests/test_acceptance.py`` to get one pass/fail line
per criterion.  Each test states its tolerance inline.  Criterion 9 is
split into lettered sub-tests so a single failing sub-check reports alone;
see 9c, which documents a real discrepancy in the expected amplitude
instead of papering over it.
"""
import json
import os
import time

import numpy as np
import pytest
from numpy.polynomial import Legendre
from pytest import approx

from soul_lab import bundles, quotient as qt, rigidity as rg
from soul_lab.charts import (
    PlaneSampler,
    TangentPlane,
    riemann_with_metric,
    sample_points,
    sectional,
)
from soul_lab.cli import run
from soul_lab.profiles import (
    flat_plane,
    plane_chart_cartesian,
    round_profile,
    sphere_chart,
)

from conftest import all_specs, asym_spec, round_soul_spec, tanh_twist_spec

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def test_criterion_01_curvature_engine_calibration():
    # round spheres: K = 1/R^2 +- 1e-5; flat plane: |K| <= 1e-8
    for R, want in ((1.0, 1.0), (2.0, 0.25)):
        chart = sphere_chart(round_profile(R))
        for p in sample_points(chart, 12, seed=1):
            e = np.eye(2)
            K = sectional(chart, TangentPlane(point=p, u=e[0], v=e[1]))
            assert K == approx(want, abs=1e-5)
    flat = plane_chart_cartesian(flat_plane(2.0))
    for p in sample_points(flat, 12, seed=1):
        e = np.eye(2)
        K = sectional(flat, TangentPlane(point=p, u=e[0], v=e[1]))
        assert abs(K) <= 1e-8

    # Riemann symmetries + first Bianchi at 100 random quotient points
    chart = qt.build_quotient(asym_spec())
    rng = np.random.default_rng(7)
    lo = chart.box[:, 0] + chart.effective_scan_margin()
    hi = chart.box[:, 1] - chart.effective_scan_margin()
    pts = lo + (hi - lo) * rng.random((100, 4))
    worst = 0.0
    for p in pts:
        R, g = riemann_with_metric(chart, p)
        worst = max(
            worst,
            float(np.max(np.abs(R + np.swapaxes(R, 0, 1)))),
            float(np.max(np.abs(R + np.swapaxes(R, 2, 3)))),
            float(np.max(np.abs(R - np.transpose(R, (2, 3, 0, 1))))),
            float(np.max(np.abs(R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))))),
        )
    assert worst <= 1e-6
    print(f"criterion 1: symmetry+Bianchi residual {worst:.2e} <= 1e-6")


def test_criterion_02_quotient_oracle():
    rng = np.random.default_rng(11)
    for spec in all_specs():
        chart = qt.build_quotient(spec)
        lo = chart.box[:, 0] + chart.effective_scan_margin()
        hi = chart.box[:, 1] - chart.effective_scan_margin()
        pts = lo + (hi - lo) * rng.random((100, 4))
        diff = np.max(np.abs(qt.quotient_components(spec, pts) - qt.quotient_oracle(spec, pts)))
        assert diff <= 1e-10, spec.name
    print("criterion 2: closed forms == projection oracle <= 1e-10, 5 specs x 100 pts")


def test_criterion_03_nonnegativity_scan():
    t0 = time.perf_counter()
    floors = {}
    for spec in all_specs():
        rep = qt.nonneg_audit(spec)
        assert rep.sample_count >= 2000, spec.name
        assert rep.min_K >= -1e-5, spec.name
        floors[spec.name] = rep.min_K
    elapsed = time.perf_counter() - t0
    assert elapsed <= 60.0
    print(f"criterion 3: floors {floors} in {elapsed:.1f}s")


def test_criterion_04_circle_bundle_oracles():
    spec = tanh_twist_spec()
    cs = []
    for rho0 in (0.3, 0.8, 1.5):
        m = bundles.sphere_match(spec, rho0)
        num = bundles.bundle_metric_numeric(m.f1_sq, spec.sphere.L, m.Xs, m.r)
        row = []
        for t in np.linspace(0.1, spec.sphere.L - 0.1, 50):
            x2 = float(m.base_x2(t))
            h = num.metric(np.array([t, 1.0, 2.0]))
            L_num = 2 * np.pi * np.sqrt(h[2, 2])
            assert abs(L_num / bundles.fiber_length_product(m.r, x2) - 1) <= 1e-6
            assert abs(bundles.fiber_orthogonality_residual(num, m.Xs, t, x2)) <= 1e-10
            c_num = -m.Xs * h[1, 2] / h[2, 2]
            assert abs(c_num - x2) <= 1e-6 * max(1.0, x2)
            row.append(c_num)
        cs.append(np.array(row))
    spread = max(float(np.max(np.abs(cs[i] - cs[j]))) for i in range(3) for j in range(i))
    assert spread <= 1e-6  # c does not depend on r
    print(f"criterion 4: fiber/orthogonality/c oracles pass; c spread over r = {spread:.2e}")


def test_criterion_05_matching_dictionary():
    worst_len = worst_par = 0.0
    for a in np.linspace(0.3, 5.0, 20):
        m = bundles.match_parameters(a)
        for frac in np.linspace(0.0, 0.95, 20):
            x2 = frac * a * a
            worst_len = max(
                worst_len,
                abs(bundles.fiber_length_submersion(a, x2) - bundles.fiber_length_product(m.r, m.xhat2(x2))),
            )
            v1 = np.array([-1.0, bundles.horizontal_submersion(a, x2)])
            v2 = np.array([m.xhat_scale, bundles.horizontal_product(m.xhat2(x2))])
            cross = abs(v1[0] * v2[1] - v1[1] * v2[0]) / (np.linalg.norm(v1) * np.linalg.norm(v2))
            worst_par = max(worst_par, cross)
    assert worst_len <= 1e-12
    assert worst_par <= 1e-8
    print(f"criterion 5: dictionary {worst_len:.2e} <= 1e-12, spans {worst_par:.2e} <= 1e-8")


def test_criterion_06_distance_sphere_structure():
    for spec, radii in ((round_soul_spec(), (0.6, 1.4)), (asym_spec(), (0.4, 1.0))):
        fs = qt.soul_profile(spec)
        ts = np.linspace(0.1, spec.sphere.L - 0.1, 25)
        bases, horizs = [], []
        for rho0 in radii:
            m = bundles.sphere_match(spec, rho0)
            num = bundles.bundle_metric_numeric(m.f1_sq, spec.sphere.L, m.Xs, m.r)
            ths = np.linspace(0.0, 2 * np.pi, 10, endpoint=False)
            for t in ts[::4]:
                pts3 = np.stack([np.full(10, t), np.ones(10), ths], axis=-1)
                ind = bundles.induced_sphere_components(spec, rho0, pts3)
                assert np.max(np.abs(ind - num.metric(pts3))) <= 1e-6
            h = num.metric(np.stack([ts, np.ones_like(ts), np.full_like(ts, 2.0)], axis=-1))
            bases.append(h[:, 1, 1] - h[:, 1, 2] ** 2 / h[:, 2, 2])
            horizs.append(-h[:, 1, 2] / h[:, 2, 2])
        assert np.max(np.abs(bases[0] - bases[1])) <= 1e-6
        assert np.max(np.abs(bases[0] - np.asarray(fs.f(ts)) ** 2)) <= 1e-6
        assert np.max(np.abs(horizs[0] - horizs[1])) <= 1e-6
    print("criterion 6: induced metrics match the bundle model; base and horizontal data radius-independent")


def test_criterion_07_soul_constraints():
    for spec in all_specs():
        assert abs(qt.integral_F(spec)) <= 1e-5, spec.name
        assert qt.totally_geodesic_residual(spec) <= 1e-6, spec.name
    print("criterion 7: integral of F = 0 and souls totally geodesic, 5 specs")


def test_criterion_08_equality_audit():
    makers = (round_soul_spec, asym_spec, tanh_twist_spec)
    worst, floors = 0.0, []
    for make in makers:
        spec = make()
        assert spec.killing.C1 * spec.killing.C2 != 0.0
        rep = rg.equality_audit(qt.soul_data(spec))
        assert len(rep.records) >= 40 * 16
        assert rep.max_residual <= 1e-4, spec.name
        assert rep.max_abs_lhs >= 1e-3, spec.name
        worst = max(worst, rep.max_residual)
        floors.append(rep.max_abs_lhs)
    print(f"criterion 8: max residual {worst:.2e} <= 1e-4; |lhs| floors {min(floors):.2f}")


@pytest.fixture(scope="module")
def round_pipeline():
    data = qt.soul_data(round_soul_spec())
    models = rg.round_normalize(data)
    lin = rg.fit_linear_eigenfunction(models.F_field)
    return models, lin


def test_criterion_09a_rayleigh(round_pipeline):
    models, _ = round_pipeline
    val = rg.rayleigh(models.F_field)
    assert val == approx(2.0, abs=1e-5)
    print(f"criterion 9a: Rayleigh quotient {val:.9f} = 2 +- 1e-5")


def test_criterion_09b_linear_fit(round_pipeline):
    _, lin = round_pipeline
    assert lin.residual <= 1e-3
    print(f"criterion 9b: degree-1 fit residual {lin.residual:.2e} <= 1e-3")


def test_criterion_09c_amplitude(round_pipeline):
    models, lin = round_pipeline
    fit = rg.great_circle_profile(models.G_leg, lin.Z)
    z2 = float(np.linalg.norm(lin.Z) ** 2)
    print(
        f"criterion 9c: measured amplitude {fit.amplitude:.8f}; "
        f"|Z|^2/4 = {z2 / 4:.8f} (off by {fit.amplitude - z2 / 4:+.6f}); "
        f"3|Z|^2/8 = {3 * z2 / 8:.8f} (off by {fit.amplitude - 3 * z2 / 8:+.2e})"
    )
    # stated expectation; the measured amplitude sits on 3|Z|^2/8 instead,
    # and the exact closed forms agree with the measurement -- see
    # test_trace_equality_at_true_amplitude and the round-soul demo
    assert fit.amplitude == approx(z2 / 4.0, abs=1e-3)


def test_criterion_09d_offsets_and_drift(round_pipeline):
    models, lin = round_pipeline
    fit = rg.great_circle_profile(models.G_leg, lin.Z)
    spread = rg.great_circle_offset_spread(models.G_leg, lin.Z)
    assert spread <= 1e-3
    assert abs(fit.drift) <= 1e-4
    print(f"criterion 9d: offset spread {spread:.1e} <= 1e-3, drift {fit.drift:.1e} <= 1e-4")


def test_criterion_09e_violating_input_flagged():
    rep = rg.trace_inequality_check(Legendre([0.0]), Legendre([0.0, 1.0]))
    assert rep.violated
    assert rep.max_violation == approx(4.0 / 3.0, abs=1e-3)
    print(f"criterion 9e: (F=0, G=cos t) flagged, excess {rep.max_violation:.4f}")


def test_criterion_10_distance_sphere_curvature_window():
    sampler = PlaneSampler(n_points=250, planes_per_point=8, seed=0)
    mins = {}
    for spec, rho0 in ((round_soul_spec(), 0.6), (tanh_twist_spec(), 0.8)):
        rep = bundles.distance_sphere_scan(spec, rho0, sampler=sampler)
        assert rep.sample_count >= 2000
        assert -1e-5 <= rep.min_K <= 0.05, spec.name
        mins[spec.name] = rep.min_K
    print(f"criterion 10: sphere curvature floors {mins} within [-1e-5, 0.05]")


def test_criterion_11_determinism(tmp_path):
    cfg = os.path.join(CONFIG_DIR, "round_soul.json")
    trees = {}
    for tag, threads in (("a", 1), ("b", 1), ("t4", 4), ("t8", 8)):
        out = tmp_path / tag
        assert run("audit-all", cfg, out_dir=str(out), threads=threads) == 0
        tree = {}
        for base, _, files in os.walk(out):
            for f in files:
                if f == "timings.txt":
                    continue
                p = os.path.join(base, f)
                tree[os.path.relpath(p, out)] = open(p, "rb").read()
        trees[tag] = tree
    assert trees["a"] == trees["b"]
    assert trees["a"] == trees["t4"]
    assert trees["a"] == trees["t8"]
    print(f"criterion 11: audit-all byte-identical over rerun and threads 1/4/8 ({len(trees['a'])} files)")
