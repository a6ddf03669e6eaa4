import numpy as np
import pytest

from conftest import asym_spec, round_soul_spec, tanh_twist_spec
from soul_lab import bundles as bd
from soul_lab import quotient as qt
from soul_lab.errors import DegenerateFiber, OutOfRange


# -- closed-form fiber data ----------------------------------------------


def test_fiber_length_values():
    # product route at r = 1: 2 pi/sqrt(2 - x2)
    assert bd.fiber_length_product(1.0, 0.0) == pytest.approx(2 * np.pi / np.sqrt(2))
    assert bd.fiber_length_product(1.0, 0.5) == pytest.approx(
        2 * np.pi * np.sqrt(2.0 / 3.0)
    )
    # submersion route: a^2/sqrt(a^2 - x2)
    assert bd.fiber_length_submersion(np.pi, 1.0) == pytest.approx(
        np.pi**2 / np.sqrt(np.pi**2 - 1), abs=1e-12
    )
    assert bd.fiber_length_submersion(2.0, 0.0) == pytest.approx(2.0)


def test_fiber_length_degenerate_inputs():
    with pytest.raises(DegenerateFiber):
        bd.fiber_length_product(2.0, 1.3)  # 1 + 4(1 - 1.3) < 0
    with pytest.raises(DegenerateFiber):
        bd.fiber_length_submersion(1.0, 1.0)
    with pytest.raises(OutOfRange):
        bd.fiber_length_submersion(-1.0, 0.5)


def test_horizontal_coefficients():
    assert bd.horizontal_product(0.37) == pytest.approx(0.37)
    assert bd.horizontal_submersion(2 * np.pi, 1.0) == pytest.approx(1 / (2 * np.pi))
    with pytest.raises(OutOfRange):
        bd.horizontal_submersion(0.0, 0.5)


def test_match_parameters_roundtrip():
    m = bd.match_parameters(np.pi)
    # 1/a^2 = (1 + r^2)/(4 pi^2 r^2)
    assert (1 + m.r**2) / (4 * np.pi**2 * m.r**2) == pytest.approx(1 / np.pi**2)
    assert m.xhat_scale == pytest.approx(-2 / np.pi)
    with pytest.raises(OutOfRange):
        bd.match_parameters(2 * np.pi)
    with pytest.raises(OutOfRange):
        bd.match_parameters(0.0)


def test_route_dictionary_fiber_lengths():
    # the two closed-form routes describe the same bundle once matched
    worst = 0.0
    for a in np.linspace(0.3, 5.0, 20):
        m = bd.match_parameters(a)
        for x2 in np.linspace(0.0, 0.95 * a * a, 20):
            diff = abs(
                bd.fiber_length_submersion(a, x2)
                - bd.fiber_length_product(m.r, m.xhat2(x2))
            )
            worst = max(worst, diff)
    assert worst < 1e-12


def test_route_dictionary_horizontal_spans_parallel():
    # orientations may differ; only the unoriented spans must agree
    for a in np.linspace(0.3, 5.0, 12):
        m = bd.match_parameters(a)
        for x2 in np.linspace(0.0, 0.9 * a * a, 12):
            v1 = np.array([-1.0, bd.horizontal_submersion(a, x2)])
            v2 = np.array([m.xhat_scale, bd.horizontal_product(m.xhat2(x2))])
            cross = abs(v1[0] * v2[1] - v1[1] * v2[0])
            cross /= np.linalg.norm(v1) * np.linalg.norm(v2)
            assert cross < 1e-8


# -- distance spheres vs the numeric bundle route -------------------------


@pytest.mark.parametrize(
    "qspec,radii",
    [
        (round_soul_spec(), (0.6, 1.4)),
        (tanh_twist_spec(), (0.5, 1.2)),
        (asym_spec(), (0.4, 1.0)),
    ],
    ids=["round-soul", "tanh-twist", "asym"],
)
def test_induced_sphere_matches_numeric_bundle(qspec, radii):
    for rho0 in radii:
        m = bd.sphere_match(qspec, rho0)
        num = bd.bundle_metric_numeric(m.f1_sq, qspec.sphere.L, m.Xs, m.r)
        ts = np.linspace(0.1, qspec.sphere.L - 0.1, 20)
        ths = np.linspace(0, 2 * np.pi, 20, endpoint=False)
        for t in ts:
            pts = np.stack([np.full(20, t), np.ones(20), ths], axis=-1)
            ind = bd.induced_sphere_components(qspec, rho0, pts)
            assert np.max(np.abs(ind - num.metric(pts))) < 1e-12


def test_sphere_match_values_round_soul():
    # C1 = C2 = 1 on the flat plane: gamma = 0 and r = b(rho0) = rho0
    qspec = round_soul_spec()
    m = bd.sphere_match(qspec, 0.6)
    assert m.Xs == pytest.approx(1.0)
    assert m.r == pytest.approx(0.6)
    t = np.linspace(0.1, qspec.sphere.L - 0.1, 30)
    assert np.max(np.abs(m.f1_sq(t) - np.asarray(qspec.sphere.f(t)) ** 2)) < 1e-13


def test_sphere_match_rejects_bad_radius():
    with pytest.raises(OutOfRange):
        bd.sphere_match(round_soul_spec(), 5.0)


def test_sphere_match_degenerate_circle():
    # C2 = 0 and a wide flat plane: 1 - b^2 crosses zero
    from soul_lab import profiles as pr

    qspec = qt.QuotientSpec(
        pr.round_profile(1.0), pr.flat_plane(2.0), pr.KillingSpec(1.0, 0.0), "wide"
    )
    with pytest.raises(DegenerateFiber):
        bd.sphere_match(qspec, 1.2)


def test_fiber_lengths_on_numeric_chart():
    qspec = tanh_twist_spec()
    for rho0 in (0.3, 0.8, 1.5):
        m = bd.sphere_match(qspec, rho0)
        num = bd.bundle_metric_numeric(m.f1_sq, qspec.sphere.L, m.Xs, m.r)
        for t in np.linspace(0.1, qspec.sphere.L - 0.1, 50):
            x2 = float(m.base_x2(t))
            h = num.metric(np.array([t, 1.0, 2.0]))
            L_num = 2 * np.pi * np.sqrt(h[2, 2])
            assert abs(L_num / bd.fiber_length_product(m.r, x2) - 1) < 1e-6


def test_horizontal_orthogonality_on_numeric_chart():
    qspec = tanh_twist_spec()
    m = bd.sphere_match(qspec, 0.8)
    num = bd.bundle_metric_numeric(m.f1_sq, qspec.sphere.L, m.Xs, m.r)
    for t in np.linspace(0.15, qspec.sphere.L - 0.15, 25):
        x2 = float(m.base_x2(t))
        assert abs(bd.fiber_orthogonality_residual(num, m.Xs, t, x2)) < 1e-10
        # a wrong coefficient is loudly non-horizontal
        bad = bd.fiber_orthogonality_residual(num, m.Xs, t, x2, c=x2 + 0.05)
        assert abs(bad) > 1e-3


def test_extracted_base_is_soul_metric():
    # every distance sphere submersion-projects onto the same soul metric
    for qspec in (round_soul_spec(), tanh_twist_spec(), asym_spec()):
        fs = qt.soul_profile(qspec)
        for rho0 in (0.4, 0.9):
            chart = bd.distance_sphere_induced(qspec, rho0)
            for t in np.linspace(0.1, qspec.sphere.L - 0.1, 15):
                got = bd.extracted_base_profile_sq(chart, t)
                assert abs(got - float(fs.f(t)) ** 2) < 1e-6


def test_distance_sphere_scan_window():
    rep = bd.distance_sphere_scan(round_soul_spec(), 0.6)
    assert rep.sample_count >= 1000
    assert rep.min_K >= -1e-5
    assert rep.min_K <= 0.05


def test_distance_sphere_induced_is_actual_restriction():
    # pull the 4-chart metric back through the embedding (t,s,theta) ->
    # (t, s, rho0 cos theta, rho0 sin theta) and compare
    qspec = asym_spec()
    rho0 = 0.7
    chart3 = bd.distance_sphere_induced(qspec, rho0)
    for t, th in [(0.5, 0.3), (1.2, 2.0), (2.2, 4.5)]:
        x, y = rho0 * np.cos(th), rho0 * np.sin(th)
        h4 = qt.quotient_components(qspec, np.array([t, 1.0, x, y]))
        # embedding differential: d_t -> d_t, d_s -> d_s, d_theta -> (-y, x)
        J = np.zeros((4, 3))
        J[0, 0] = 1.0
        J[1, 1] = 1.0
        J[2, 2] = -y
        J[3, 2] = x
        pulled = J.T @ h4 @ J
        got = chart3.metric(np.array([t, 1.0, th]))
        assert np.max(np.abs(pulled - got)) < 1e-13
