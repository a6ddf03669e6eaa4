"""JSON configuration for the audit CLI.

A config is one JSON document that pins down a spec (sphere profile, plane
profile, Killing constants), the numeric knobs, the audit tolerances, and
the output layout.  Everything is validated eagerly here -- every profile
invariant fires at load time, before any audit runs -- and validation
failures carry the JSON path of the offending field.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    InvalidProfile,
    NonSmoothVertex,
    RescaleNotInvertible,
)
from .profiles import (
    KillingSpec,
    cap_plane,
    flat_plane,
    round_profile,
    series_plane,
    spline_profile,
    tanh_plane,
)
from .quotient import QuotientSpec, prescribe_soul_profile

SPHERE_FAMILIES = ("round", "spline", "round_soul")
PLANE_FAMILIES = ("flat", "cap", "tanh", "series")

DEFAULT_SAMPLES = {
    "oracle_points": 100,
    "nonneg_points": 250,
    "planes_per_point": 8,
    "soul_points": 321,
    "sphere_points": 200,
}


@dataclass(frozen=True)
class LabConfig:
    """A validated audit configuration.

    ``qspec`` is the fully constructed quotient spec; ``raw`` echoes the
    parsed JSON (with defaults filled in) for the report."""

    name: str
    qspec: QuotientSpec
    fd_step: float
    quadrature: tuple
    geodesic_steps: int
    seed: int
    samples: dict
    sphere_radii: tuple
    nonneg_tol: float
    equality_tol: float
    oracle_tol: float
    report_path: str
    csv_dir: str
    raw: dict = field(repr=False)

    def content_hash(self):
        """Stable hash of the effective config, for report provenance."""
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _expect(cond, path, message):
    if not cond:
        raise ConfigError(path, message)


def _number(doc, path, key, default=None, minimum=None, strict_min=None):
    if key not in doc:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    v = doc[key]
    _expect(
        isinstance(v, (int, float)) and not isinstance(v, bool) and np.isfinite(v),
        f"{path}.{key}",
        f"expected a finite number, got {v!r}",
    )
    if minimum is not None:
        _expect(v >= minimum, f"{path}.{key}", f"must be >= {minimum}, got {v}")
    if strict_min is not None:
        _expect(v > strict_min, f"{path}.{key}", f"must be > {strict_min}, got {v}")
    return float(v)


def _integer(doc, path, key, default, minimum):
    v = doc.get(key, default)
    _expect(
        isinstance(v, int) and not isinstance(v, bool),
        f"{path}.{key}",
        f"expected an integer, got {v!r}",
    )
    _expect(v >= minimum, f"{path}.{key}", f"must be >= {minimum}, got {v}")
    return int(v)


def _check_keys(doc, path, allowed):
    for k in doc:
        _expect(k in allowed, f"{path}.{k}" if path else k, "unknown field")


def _build_sphere(doc, C1):
    fam = doc.get("family")
    _expect(
        fam in SPHERE_FAMILIES,
        "sphere.family",
        f"expected one of {list(SPHERE_FAMILIES)}, got {fam!r}",
    )
    try:
        if fam == "round":
            _check_keys(doc, "sphere", {"family", "R"})
            return round_profile(_number(doc, "sphere", "R", strict_min=0.0))
        if fam == "round_soul":
            # prescribe the ambient profile so the *soul* comes out round
            _check_keys(doc, "sphere", {"family", "R"})
            R = _number(doc, "sphere", "R", strict_min=0.0)
            return prescribe_soul_profile(round_profile(R), C1)
        _check_keys(doc, "sphere", {"family", "knots", "L"})
        knots = doc.get("knots")
        _expect(
            isinstance(knots, list) and len(knots) >= 8,
            "sphere.knots",
            "expected a list of at least 8 heights",
        )
        L = _number(doc, "sphere", "L", default=float(np.pi), strict_min=0.0)
        return spline_profile(np.asarray(knots, dtype=float), L=L)
    except (InvalidProfile, RescaleNotInvertible) as e:
        raise ConfigError("sphere", f"profile invariant violated: {e}") from e


def _build_plane(doc):
    fam = doc.get("family")
    _expect(
        fam in PLANE_FAMILIES,
        "plane.family",
        f"expected one of {list(PLANE_FAMILIES)}, got {fam!r}",
    )
    try:
        if fam == "series":
            _check_keys(doc, "plane", {"family", "b3", "b5", "rho_max"})
            return series_plane(
                _number(doc, "plane", "b3"),
                b5=_number(doc, "plane", "b5", default=0.0),
                rho_max=_number(doc, "plane", "rho_max", default=1.0, strict_min=0.0),
            )
        _check_keys(doc, "plane", {"family", "rho_max"})
        rho_max = _number(doc, "plane", "rho_max", strict_min=0.0)
        builder = {"flat": flat_plane, "cap": cap_plane, "tanh": tanh_plane}[fam]
        return builder(rho_max)
    except (InvalidProfile, NonSmoothVertex) as e:
        raise ConfigError("plane", f"profile invariant violated: {e}") from e


def parse_config(doc):
    """Validate a parsed JSON document into a LabConfig.

    Raises ConfigError with the dotted path of the first offending field.
    """
    _expect(isinstance(doc, dict), "", "config must be a JSON object")
    _check_keys(
        doc,
        "",
        {"name", "sphere", "plane", "C1", "C2", "numeric", "tolerances", "output"},
    )
    name = doc.get("name", "unnamed")
    _expect(isinstance(name, str) and name, "name", "expected a nonempty string")

    for key in ("sphere", "plane"):
        _expect(isinstance(doc.get(key), dict), key, "missing or not an object")
    C1 = _number(doc, "", "C1")
    C2 = _number(doc, "", "C2")

    sphere = _build_sphere(doc["sphere"], C1)
    plane = _build_plane(doc["plane"])
    try:
        qspec = QuotientSpec(sphere, plane, KillingSpec(C1, C2), name=name)
    except InvalidProfile as e:
        raise ConfigError("sphere", f"profile invariant violated: {e}") from e

    num = doc.get("numeric", {})
    _expect(isinstance(num, dict), "numeric", "expected an object")
    _check_keys(
        num,
        "numeric",
        {"fd_step", "quadrature", "geodesic_steps", "seed", "samples", "sphere_radii"},
    )
    fd_step = _number(num, "numeric", "fd_step", default=5e-4, strict_min=0.0)
    _expect(fd_step <= 0.05, "numeric.fd_step", f"must be <= 0.05, got {fd_step}")
    quad = num.get("quadrature", [201, 61, 41])
    _expect(
        isinstance(quad, list)
        and len(quad) == 3
        and all(isinstance(q, int) and q >= 11 and q % 2 == 1 for q in quad),
        "numeric.quadrature",
        "expected three odd integers >= 11 (grid sizes for dim 2/3/4)",
    )
    geodesic_steps = _integer(num, "numeric", "geodesic_steps", 40, 4)
    seed = _integer(num, "numeric", "seed", 0, 0)

    samples = dict(DEFAULT_SAMPLES)
    user_samples = num.get("samples", {})
    _expect(isinstance(user_samples, dict), "numeric.samples", "expected an object")
    _check_keys(user_samples, "numeric.samples", set(DEFAULT_SAMPLES))
    samples.update(user_samples)
    for key, v in samples.items():
        path = f"numeric.samples.{key}"
        _expect(
            isinstance(v, int) and not isinstance(v, bool),
            path,
            f"expected an integer, got {v!r}",
        )
        floor = 1 if key == "planes_per_point" else 100
        _expect(v >= floor, path, f"sample count must be >= {floor}, got {v}")

    radii = num.get(
        "sphere_radii", [0.35 * plane.rho_max, 0.6 * plane.rho_max]
    )
    _expect(
        isinstance(radii, list)
        and len(radii) == 2
        and all(isinstance(r, (int, float)) and not isinstance(r, bool) for r in radii)
        and 0.0 < radii[0] < radii[1] < plane.rho_max,
        "numeric.sphere_radii",
        f"expected two increasing radii in (0, {plane.rho_max}), got {radii!r}",
    )

    tol = doc.get("tolerances", {})
    _expect(isinstance(tol, dict), "tolerances", "expected an object")
    _check_keys(tol, "tolerances", {"nonneg_tol", "equality_tol", "oracle_tol"})
    nonneg_tol = _number(tol, "tolerances", "nonneg_tol", default=1e-5, strict_min=0.0)
    equality_tol = _number(
        tol, "tolerances", "equality_tol", default=1e-4, strict_min=0.0
    )
    oracle_tol = _number(tol, "tolerances", "oracle_tol", default=1e-10, strict_min=0.0)

    out = doc.get("output", {})
    _expect(isinstance(out, dict), "output", "expected an object")
    _check_keys(out, "output", {"report", "csv_dir"})
    report_path = out.get("report", "report.json")
    csv_dir = out.get("csv_dir", "csv")
    for key, v in (("report", report_path), ("csv_dir", csv_dir)):
        _expect(isinstance(v, str) and v, f"output.{key}", "expected a nonempty string")

    effective = {
        "name": name,
        "sphere": doc["sphere"],
        "plane": doc["plane"],
        "C1": C1,
        "C2": C2,
        "numeric": {
            "fd_step": fd_step,
            "quadrature": list(quad),
            "geodesic_steps": geodesic_steps,
            "seed": seed,
            "samples": samples,
            "sphere_radii": [float(r) for r in radii],
        },
        "tolerances": {
            "nonneg_tol": nonneg_tol,
            "equality_tol": equality_tol,
            "oracle_tol": oracle_tol,
        },
        "output": {"report": report_path, "csv_dir": csv_dir},
    }
    return LabConfig(
        name=name,
        qspec=qspec,
        fd_step=fd_step,
        quadrature=tuple(quad),
        geodesic_steps=geodesic_steps,
        seed=seed,
        samples=samples,
        sphere_radii=(float(radii[0]), float(radii[1])),
        nonneg_tol=nonneg_tol,
        equality_tol=equality_tol,
        oracle_tol=oracle_tol,
        report_path=report_path,
        csv_dir=csv_dir,
        raw=effective,
    )


def load_config(path):
    """Parse and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ConfigError("", f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError("", f"config {path} is not valid JSON: {e}") from e
    return parse_config(doc)
