"""Audit orchestration and the ``soul-lab`` command line.

Commands
--------
build            emit quotient chart samples as CSV
audit-nonneg     sectional-curvature floor scan of the quotient chart
audit-bundle     circle-bundle identities, route matching, distance spheres
audit-rigidity   the soul equality audit plus its two side constraints
audit-round      round-soul spectral suite (vacuous on non-round souls)
audit-all        everything above plus the oracle comparison and the
                 distance-sphere curvature probe

Exit codes: 0 all gated sections pass, 1 an audit failed, 2 bad input.

Reports are byte-stable: the JSON report and every CSV depend only on the
config content (not on wall time, thread count, or filesystem layout), so
reruns diff clean.  Wall-clock timings go to a separate ``timings.txt`` that
is excluded from that contract.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import bundles
from .charts import (
    CurvatureReport,
    PlaneSampler,
    TangentPlane,
    orthonormal_pairs,
    riemann_with_metric,
    sample_points,
    sampler_arrays,
    sectional_from_tensor,
)
from .config import load_config
from .errors import ConfigError, OutOfDomain, SoulLabError

SECTION_ORDER = (
    "build",
    "nonneg",
    "oracle",
    "bundle",
    "rigidity",
    "round",
    "hopf_probe",
)

SCAN_CHUNK = 32  # fixed chunk size keeps merges identical for any thread count


def fmt17(x):
    """One float, 17 significant digits (bit-stable round trip)."""
    return f"{float(x):.17g}"


def write_csv(path, header, rows):
    """Comma-separated, header row, LF endings, 17 significant digits."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt17(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# -- deterministic threaded curvature scan --------------------------------


def scan_curvature(chart, sampler, tol, threads=1):
    """min_sectional_scan with the point loop fanned out over threads.

    Points are split into fixed-size chunks and merged in chunk order, so
    the report is identical for every thread count.
    """
    pts, raw, coord_pairs = sampler_arrays(chart, sampler)
    n = sampler.n_points
    chunks = [range(i, min(i + SCAN_CHUNK, n)) for i in range(0, n, SCAN_CHUNK)]

    def work(idxs):
        best, worst, arg, count = np.inf, -np.inf, None, 0
        for i in idxs:
            R, g = riemann_with_metric(chart, pts[i])
            cands = coord_pairs + [
                tuple(raw[i, j]) for j in range(sampler.planes_per_point)
            ]
            for u, v in orthonormal_pairs(g, cands):
                k = sectional_from_tensor(R, g, u, v)
                count += 1
                if k > worst:
                    worst = k
                if k < best:
                    best = k
                    arg = TangentPlane(point=pts[i].copy(), u=u.copy(), v=v.copy())
        return best, worst, arg, count

    if threads <= 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, chunks))

    best, worst, arg, count = np.inf, -np.inf, None, 0
    for b, w, a, c in parts:  # chunk order, strict comparison: first winner
        count += c
        if w > worst:
            worst = w
        if b < best:
            best = b
            arg = a
    return CurvatureReport(
        sample_count=count,
        min_K=float(best),
        max_K=float(worst),
        argmin=arg,
        tolerance=float(tol),
        passed=bool(best >= -tol),
    )


def _plane_dict(plane):
    if plane is None:
        return None
    return {
        "point": [float(v) for v in plane.point],
        "u": [float(v) for v in plane.u],
        "v": [float(v) for v in plane.v],
    }


# -- audit sections -------------------------------------------------------


class _Lab:
    """Shared lazily-built objects for one audit run."""

    def __init__(self, cfg, threads):
        self.cfg = cfg
        self.threads = threads
        self._chart = None
        self._soul = None

    @property
    def chart(self):
        if self._chart is None:
            from .quotient import build_quotient

            self._chart = replace(build_quotient(self.cfg.qspec), fd_step=self.cfg.fd_step)
        return self._chart

    @property
    def soul(self):
        if self._soul is None:
            from .quotient import soul_data

            self._soul = soul_data(
                self.cfg.qspec,
                n_points=self.cfg.samples["soul_points"],
                fd_step=self.cfg.fd_step / 2.0,
            )
        return self._soul


def section_build(lab, csv_dir):
    cfg = lab.cfg
    pts = sample_points(lab.chart, cfg.samples["oracle_points"], seed=cfg.seed)
    g = lab.chart.metric(pts)
    iu = [(i, j) for i in range(4) for j in range(i, 4)]
    header = ["t", "s", "x", "y"] + [
        f"g_{'tsxy'[i]}{'tsxy'[j]}" for i, j in iu
    ]
    rows = [list(p) + [g[k, i, j] for i, j in iu] for k, p in enumerate(pts)]
    write_csv(os.path.join(csv_dir, "quotient_samples.csv"), header, rows)
    return {
        "name": "build",
        "passed": True,
        "sample_count": len(pts),
        "csv": "quotient_samples.csv",
    }


def section_nonneg(lab, csv_dir):
    cfg = lab.cfg
    sampler = PlaneSampler(
        n_points=cfg.samples["nonneg_points"],
        planes_per_point=cfg.samples["planes_per_point"],
        seed=cfg.seed,
    )
    rep = scan_curvature(lab.chart, sampler, cfg.nonneg_tol, lab.threads)
    return {
        "name": "nonneg",
        "passed": rep.passed,
        "sample_count": rep.sample_count,
        "min_K": rep.min_K,
        "max_K": rep.max_K,
        "argmin": _plane_dict(rep.argmin),
        "tolerance": rep.tolerance,
    }


def section_oracle(lab, csv_dir):
    from .quotient import quotient_components, quotient_oracle

    cfg = lab.cfg
    pts = sample_points(lab.chart, cfg.samples["oracle_points"], seed=cfg.seed + 7)
    closed = quotient_components(cfg.qspec, pts)
    oracle = quotient_oracle(cfg.qspec, pts)
    worst = float(np.max(np.abs(closed - oracle)))
    return {
        "name": "oracle",
        "passed": worst <= cfg.oracle_tol,
        "sample_count": len(pts),
        "max_component_error": worst,
        "tolerance": cfg.oracle_tol,
    }


def section_bundle(lab, csv_dir):
    from .quotient import soul_profile

    cfg = lab.cfg
    qspec = cfg.qspec
    checks = {}

    # exact dictionary between the two fiber-length routes
    worst_len = worst_par = 0.0
    for a in np.linspace(0.3, 5.0, 20):
        m = bundles.match_parameters(a)
        for frac in np.linspace(0.0, 0.95, 20):
            x2 = frac * a * a
            worst_len = max(
                worst_len,
                abs(
                    bundles.fiber_length_submersion(a, x2)
                    - bundles.fiber_length_product(m.r, m.xhat2(x2))
                ),
            )
            v1 = np.array([-1.0, bundles.horizontal_submersion(a, x2)])
            v2 = np.array([m.xhat_scale, bundles.horizontal_product(m.xhat2(x2))])
            cross = abs(v1[0] * v2[1] - v1[1] * v2[0])
            worst_par = max(worst_par, cross / (np.linalg.norm(v1) * np.linalg.norm(v2)))
    checks["dictionary_max_error"] = worst_len
    checks["dictionary_pass"] = worst_len <= 1e-12
    checks["horizontal_parallel_max"] = worst_par
    checks["horizontal_parallel_pass"] = worst_par <= 1e-8

    # distance spheres at the two configured radii plus their midpoint
    radii = [cfg.sphere_radii[0], 0.5 * sum(cfg.sphere_radii), cfg.sphere_radii[1]]
    fs = soul_profile(qspec)
    ts = np.linspace(0.1, qspec.sphere.L - 0.1, 50)
    rows = []
    worst_fiber = worst_orth = worst_induced = 0.0
    base_profiles = []
    horiz_fields = []
    for rho0 in radii:
        m = bundles.sphere_match(qspec, rho0)
        num = bundles.bundle_metric_numeric(m.f1_sq, qspec.sphere.L, m.Xs, m.r)
        # induced metric vs the product/rescale bundle model, componentwise
        ths = np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
        for t in ts[::7]:
            pts3 = np.stack([np.full(8, t), np.ones(8), ths], axis=-1)
            ind = bundles.induced_sphere_components(qspec, rho0, pts3)
            worst_induced = max(
                worst_induced, float(np.max(np.abs(ind - num.metric(pts3))))
            )
        base_row = []
        horiz_row = []
        for t in ts:
            x2 = float(m.base_x2(t))
            h = num.metric(np.array([t, 1.0, 2.0]))
            len_num = 2 * np.pi * np.sqrt(h[2, 2])
            len_closed = bundles.fiber_length_product(m.r, x2)
            orth = bundles.fiber_orthogonality_residual(num, m.Xs, t, x2)
            worst_fiber = max(worst_fiber, abs(len_num / len_closed - 1.0))
            worst_orth = max(worst_orth, abs(orth))
            rows.append([rho0, t, len_closed, len_num, orth])
            base_row.append(bundles.extracted_base_profile_sq(num, t))
            horiz_row.append(-h[1, 2] / h[2, 2])
        base_profiles.append(np.array(base_row))
        horiz_fields.append(np.array(horiz_row))

    checks["fiber_length_rel_max"] = worst_fiber
    checks["fiber_length_pass"] = worst_fiber <= 1e-6
    checks["orthogonality_max"] = worst_orth
    checks["orthogonality_pass"] = worst_orth <= 1e-10
    checks["induced_metric_max_error"] = worst_induced
    checks["induced_metric_pass"] = worst_induced <= 1e-6

    # every radius must project to the same base data
    fs_sq = np.asarray(fs.f(ts), dtype=float) ** 2
    worst_base = max(float(np.max(np.abs(bp - fs_sq))) for bp in base_profiles)
    worst_horiz = 0.0
    for i in range(len(radii)):
        for j in range(i + 1, len(radii)):
            worst_horiz = max(
                worst_horiz, float(np.max(np.abs(horiz_fields[i] - horiz_fields[j])))
            )
    checks["extracted_base_max_error"] = worst_base
    checks["extracted_base_pass"] = worst_base <= 1e-6
    checks["horizontal_field_spread"] = worst_horiz
    checks["horizontal_field_pass"] = worst_horiz <= 1e-6

    write_csv(
        os.path.join(csv_dir, "bundle_fibers.csv"),
        ["rho0", "t", "len_closed", "len_numeric", "orth_residual"],
        rows,
    )
    passed = all(v for k, v in checks.items() if k.endswith("_pass"))
    return {"name": "bundle", "passed": passed, "radii": radii, **checks}


def section_rigidity(lab, csv_dir):
    from .quotient import integral_F, totally_geodesic_residual
    from .rigidity import equality_audit

    cfg = lab.cfg
    data = lab.soul
    audit = equality_audit(data, tol=cfg.equality_tol)
    intF = integral_F(cfg.qspec)
    tg = totally_geodesic_residual(cfg.qspec)

    write_csv(
        os.path.join(csv_dir, "soul_data.csv"),
        ["t", "k", "F", "G", "hessG_tt", "hessG_ss"],
        data.columns(),
    )
    write_csv(
        os.path.join(csv_dir, "rigidity_records.csv"),
        ["t", "angle", "lhs", "rhs", "residual"],
        [[r.t, r.angle, r.lhs, r.rhs, r.residual] for r in audit.records],
    )
    ok = audit.passed and abs(intF) <= 1e-5 and tg <= 1e-6
    return {
        "name": "rigidity",
        "passed": bool(ok),
        "sample_count": len(audit.records),
        "max_residual": audit.max_residual,
        "max_abs_lhs": audit.max_abs_lhs,
        "equality_tolerance": cfg.equality_tol,
        "integral_F": float(intF),
        "totally_geodesic_residual": float(tg),
    }


def section_round(lab, csv_dir):
    from .rigidity import (
        fit_linear_eigenfunction,
        great_circle_offset_spread,
        great_circle_profile,
        rayleigh,
        round_normalize,
        trace_inequality_check,
    )

    data = lab.soul
    try:
        models = round_normalize(data)
    except OutOfDomain:
        return {
            "name": "round",
            "passed": True,
            "applicable": False,
            "note": "soul metric is not round; spectral suite does not apply",
        }

    out = {"name": "round", "applicable": True, "R": models.R}
    f_scale = float(np.max(np.abs(models.R**2 * data.F)))
    trace = trace_inequality_check(models.F_leg, models.G_leg)
    out["trace_max_violation"] = trace.max_violation
    out["trace_violated"] = trace.violated
    out["integral_lap_G"] = trace.integral_lap_G

    if f_scale < 1e-8:
        # F vanishes identically (C1*C2 = 0): nothing spectral to check
        out["trivial_F"] = True
        out["passed"] = not trace.violated
        return out

    out["trivial_F"] = False
    lin = fit_linear_eigenfunction(models.F_field)
    ray = rayleigh(models.F_field)
    gc = great_circle_profile(models.G_leg, lin.Z)
    spread = great_circle_offset_spread(models.G_leg, lin.Z)
    z2 = float(np.linalg.norm(lin.Z) ** 2)

    out.update(
        {
            "Z": [float(v) for v in lin.Z],
            "linear_fit_residual": lin.residual,
            "eigen_equation_residual": lin.eigen_residual,
            "rayleigh": float(ray),
            "model_fit_residual_F": models.F_residual,
            "model_fit_residual_G": models.G_residual,
            "amplitude": gc.amplitude,
            "amplitude_minus_quarter_Z2": gc.amplitude - z2 / 4.0,
            "amplitude_minus_three_eighths_Z2": gc.amplitude - 3.0 * z2 / 8.0,
            "offset": gc.offset,
            "offset_spread": spread,
            "drift": gc.drift,
        }
    )
    gates = [
        abs(ray - 2.0) <= 1e-5,
        lin.residual <= 1e-3,
        lin.eigen_residual <= 1e-4,
        models.F_residual <= 1e-3,
        models.G_residual <= 1e-3,
        spread <= 1e-3,
        abs(gc.drift) <= 1e-4,
        not trace.violated,
    ]
    out["passed"] = bool(all(gates))
    return out


def section_hopf(lab, csv_dir):
    cfg = lab.cfg
    results = []
    ok_window = []
    for rho0 in cfg.sphere_radii:
        chart = bundles.distance_sphere_induced(cfg.qspec, rho0)
        sampler = PlaneSampler(
            n_points=cfg.samples["sphere_points"],
            planes_per_point=cfg.samples["planes_per_point"],
            seed=cfg.seed,
        )
        rep = scan_curvature(chart, sampler, cfg.nonneg_tol, lab.threads)
        within = -1e-5 <= rep.min_K <= 0.05
        ok_window.append(within)
        results.append(
            {
                "rho0": float(rho0),
                "sample_count": rep.sample_count,
                "min_K": rep.min_K,
                "max_K": rep.max_K,
                "within_window": within,
            }
        )
    # report-only: this probe never gates the exit code
    return {
        "name": "hopf_probe",
        "passed": True,
        "gating": False,
        "all_within_window": bool(all(ok_window)),
        "scans": results,
    }


SECTION_RUNNERS = {
    "build": section_build,
    "nonneg": section_nonneg,
    "oracle": section_oracle,
    "bundle": section_bundle,
    "rigidity": section_rigidity,
    "round": section_round,
    "hopf_probe": section_hopf,
}

COMMAND_SECTIONS = {
    "build": ("build",),
    "audit-nonneg": ("nonneg",),
    "audit-bundle": ("bundle",),
    "audit-rigidity": ("rigidity",),
    "audit-round": ("round",),
    "audit-all": ("nonneg", "oracle", "bundle", "rigidity", "round", "hopf_probe"),
}


# -- report assembly ------------------------------------------------------


@dataclass(frozen=True)
class AuditReport:
    command: str
    config_echo: dict
    config_hash: str
    sections: list
    passed: bool
    timings: dict  # seconds per section; reported separately, never in JSON


def run_audits(cfg, command, threads=1, out_dir="."):
    """Run a command's sections and assemble the report."""
    csv_dir = os.path.join(out_dir, cfg.csv_dir)
    os.makedirs(csv_dir, exist_ok=True)
    lab = _Lab(cfg, threads)
    sections = []
    timings = {}
    wanted = COMMAND_SECTIONS[command]
    for name in SECTION_ORDER:
        if name not in wanted:
            continue
        t0 = time.perf_counter()
        sections.append(SECTION_RUNNERS[name](lab, csv_dir))
        timings[name] = time.perf_counter() - t0
    return AuditReport(
        command=command,
        config_echo=cfg.raw,
        config_hash=cfg.content_hash(),
        sections=sections,
        passed=all(s["passed"] for s in sections),
        timings=timings,
    )


def _native(obj):
    """Recursively coerce numpy scalars/arrays to plain JSON types."""
    if isinstance(obj, dict):
        return {k: _native(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_native(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_native(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def report_document(report):
    """The byte-stable JSON body of a report."""
    return _native(
        {
            "command": report.command,
            "config": report.config_echo,
            "config_hash": report.config_hash,
            "passed": report.passed,
            "sections": report.sections,
        }
    )


def summary_text(report):
    lines = [
        f"soul-lab {report.command}  config {report.config_hash}",
        f"overall: {'PASS' if report.passed else 'FAIL'}",
    ]
    for s in report.sections:
        tag = "PASS" if s["passed"] else "FAIL"
        extras = []
        for key in ("min_K", "max_residual", "max_component_error", "rayleigh"):
            if key in s:
                extras.append(f"{key}={s[key]:.3e}")
        if s.get("gating") is False:
            tag += " (report-only)"
        lines.append(f"  [{tag}] {s['name']}" + (": " + ", ".join(extras) if extras else ""))
    return "\n".join(lines) + "\n"


def emit_report(report, out_dir=".", report_name=None):
    """Write report JSON + human summary (+ side timings); return the path.

    The JSON and summary are deterministic functions of the config; timings
    are wall-clock and live in their own file outside that contract.
    """
    os.makedirs(out_dir, exist_ok=True)
    report_name = report_name or "report.json"
    path = os.path.join(out_dir, report_name)
    body = json.dumps(report_document(report), sort_keys=True, indent=2)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body + "\n")
        root, _ = os.path.splitext(path)
        with open(root + "-summary.txt", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(summary_text(report))
        with open(
            os.path.join(out_dir, "timings.txt"), "w", encoding="utf-8", newline="\n"
        ) as fh:
            for name, dt in report.timings.items():
                fh.write(f"{name} {dt:.3f}s\n")
    except OSError as e:
        raise IOError(f"cannot write report to {path}: {e}") from e
    return path


def run(command, config_path, out_dir=None, threads=1):
    """Load a config, run a command, emit artifacts; return the exit code."""
    try:
        cfg = load_config(config_path)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    if out_dir is None:
        out_dir = os.environ.get("SOUL_LAB_OUT", ".")
    try:
        report = run_audits(cfg, command, threads=threads, out_dir=out_dir)
    except SoulLabError as e:
        print(f"audit could not run: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    path = emit_report(report, out_dir=out_dir, report_name=cfg.report_path)
    print(summary_text(report), end="")
    print(f"report: {path}")
    return 0 if report.passed else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="soul-lab",
        description="audit toolkit for nonnegatively curved S2 x R2 quotients",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMAND_SECTIONS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a JSON config")
        p.add_argument("--out", default=None, help="output directory (default: $SOUL_LAB_OUT or .)")
        p.add_argument("--threads", type=int, default=1, help="scan worker threads")
    args = parser.parse_args(argv)
    if args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return 2
    return run(args.command, args.config, out_dir=args.out, threads=args.threads)


if __name__ == "__main__":
    sys.exit(main())
