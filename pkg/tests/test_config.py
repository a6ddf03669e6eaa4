"""Config parsing and eager validation."""
import json

import numpy as np
import pytest

from soul_lab.config import DEFAULT_SAMPLES, load_config, parse_config
from soul_lab.errors import ConfigError


def minimal(**over):
    doc = {
        "name": "t",
        "sphere": {"family": "round", "R": 1.0},
        "plane": {"family": "flat", "rho_max": 2.0},
        "C1": 1.0,
        "C2": 1.0,
    }
    doc.update(over)
    return doc


def test_minimal_config_fills_defaults():
    cfg = parse_config(minimal())
    assert cfg.name == "t"
    assert cfg.fd_step == 5e-4
    assert cfg.samples == DEFAULT_SAMPLES
    assert cfg.nonneg_tol == 1e-5
    assert cfg.equality_tol == 1e-4
    assert cfg.oracle_tol == 1e-10
    assert cfg.sphere_radii == (0.7, 1.2)
    assert cfg.report_path == "report.json"
    assert cfg.qspec.killing.C1 == 1.0


def test_bundled_configs_parse():
    import glob

    paths = sorted(glob.glob("configs/*.json"))
    assert len(paths) >= 5
    names = set()
    for p in paths:
        cfg = load_config(p)
        names.add(cfg.name)
    assert {"product", "round-soul", "asym", "spline", "tanh-twist"} <= names


def test_round_soul_family_prescribes_round_soul():
    from soul_lab.quotient import soul_profile

    cfg = parse_config(
        minimal(sphere={"family": "round_soul", "R": 0.5})
    )
    fs = soul_profile(cfg.qspec)
    t = np.linspace(0.1, fs.L - 0.1, 30)
    assert np.max(np.abs(np.asarray(fs.f(t)) - 0.5 * np.sin(t / 0.5))) < 1e-10


def test_content_hash_tracks_content():
    a = parse_config(minimal())
    b = parse_config(minimal())
    c = parse_config(minimal(C2=1.5))
    assert a.content_hash() == b.content_hash()
    assert a.content_hash() != c.content_hash()


def test_overrides_respected():
    cfg = parse_config(
        minimal(
            numeric={
                "fd_step": 2e-4,
                "seed": 3,
                "samples": {"oracle_points": 150},
                "sphere_radii": [0.5, 1.5],
            },
            tolerances={"equality_tol": 5e-4},
        )
    )
    assert cfg.fd_step == 2e-4
    assert cfg.seed == 3
    assert cfg.samples["oracle_points"] == 150
    assert cfg.samples["nonneg_points"] == DEFAULT_SAMPLES["nonneg_points"]
    assert cfg.sphere_radii == (0.5, 1.5)
    assert cfg.equality_tol == 5e-4


@pytest.mark.parametrize(
    "mutate,path_bit",
    [
        (lambda d: d.pop("C1"), "C1"),
        (lambda d: d.update(C1="one"), "C1"),
        (lambda d: d["sphere"].update(family="cube"), "sphere.family"),
        (lambda d: d.update(sphere={"family": "spline", "knots": [0, 1, 0]}), "sphere.knots"),
        (lambda d: d["plane"].update(family="dome"), "plane.family"),
        (lambda d: d.update(extra=1), "extra"),
        (lambda d: d.update(numeric={"fd_stepp": 1e-3}), "numeric.fd_stepp"),
        (lambda d: d.update(numeric={"quadrature": [200, 61, 41]}), "numeric.quadrature"),
        (lambda d: d.update(numeric={"samples": {"oracle_points": 50}}), "oracle_points"),
        (lambda d: d.update(numeric={"samples": {"planes_per_point": 0}}), "planes_per_point"),
        (lambda d: d.update(numeric={"sphere_radii": [1.2, 0.7]}), "sphere_radii"),
        (lambda d: d.update(numeric={"sphere_radii": [0.5, 2.5]}), "sphere_radii"),
        (lambda d: d.update(tolerances={"nonneg_tol": 0.0}), "nonneg_tol"),
        (lambda d: d.update(tolerances={"oracle_tol": -1e-9}), "oracle_tol"),
        (lambda d: d.update(output={"report": ""}), "output.report"),
    ],
)
def test_validation_names_the_field(mutate, path_bit):
    doc = minimal()
    mutate(doc)
    with pytest.raises(ConfigError) as exc:
        parse_config(doc)
    assert path_bit in str(exc.value)


def test_convex_fiber_rejected_eagerly():
    doc = minimal(plane={"family": "series", "b3": 0.05})
    with pytest.raises(ConfigError) as exc:
        parse_config(doc)
    msg = str(exc.value)
    assert msg.startswith("plane:")
    assert "concave" in msg and "b''" in msg


def test_non_invertible_round_soul_rejected():
    # C1^2 R^2 >= 1: no ambient profile can produce this round soul
    doc = minimal(sphere={"family": "round_soul", "R": 0.5}, C1=3.0)
    with pytest.raises(ConfigError, match="sphere"):
        parse_config(doc)


def test_load_config_bad_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(str(p))


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "absent.json"))


def test_load_config_roundtrip(tmp_path):
    p = tmp_path / "ok.json"
    p.write_text(json.dumps(minimal()))
    cfg = load_config(str(p))
    assert cfg.qspec.plane.rho_max == 2.0
