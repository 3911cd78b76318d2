"""Batch command-line front end.

One subcommand per task; every task reads a JSON config, runs its checks,
and writes a JSON report (plus a CSV grid for grid-bearing tasks).  Reports
are byte-deterministic for a fixed config and tool version: every record
carries its raw value and tolerance, and wall-clock timing goes to stderr
only.

Exit codes: 0 all checks passed; 1 some check failed; 2 config or I/O
error; 3 quadrature failed to converge on a required record.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .calculus import SingularityError, analytic_jet, batch_primitives, commutator_defect, fd_jet, kernel_field
from .groups import (
    GroupSpec,
    GroupValidationError,
    build_group,
    coords_of,
    dilate,
    gauge_norm,
    identity,
    point,
    validate_htype,
)
from .operators import (
    gamma_p,
    harmonicity_residuals,
    infinity_laplacian,
    omega_sigma,
    p_laplacian,
    residual_scale,
)
from .quadrature import QuadratureConfig, QuadratureNotConverged
from .riesz import (
    Bump,
    Density,
    DiscreteMeasure,
    TheoremCase,
    riesz_jet_result,
    riesz_value,
    verify_linear_potential,
    verify_theorem,
)

SCHEMA_VERSION = 1
TASKS = (
    "group_info",
    "lemmas",
    "fundamental",
    "riesz",
    "verify",
    "newtonian",
    "explore_threshold",
)
GRID_TASKS = ("riesz", "verify", "explore_threshold")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    """Configuration or I/O problem; maps to exit code 2."""


class NumericalError(RuntimeError):
    """Required record failed to converge; maps to exit code 3."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


@dataclass(frozen=True)
class Record:
    name: str
    value: float
    tolerance: float
    passed: bool

    def to_dict(self):
        return {
            "name": self.name,
            "value": float(self.value),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
        }


@dataclass
class RunReport:
    version: str
    config: dict
    records: list
    overall_pass: bool
    timing_seconds: float
    exploratory: bool = False
    grid_header: Optional[list] = None
    grid_rows: Optional[list] = None

    def to_dict(self):
        # timing is deliberately omitted: report bytes must depend only on
        # config and version
        return {
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": "htpotential", "version": self.version},
            "config": self.config,
            "exploratory": self.exploratory,
            "records": [r.to_dict() for r in self.records],
            "overall_pass": self.overall_pass,
        }


@dataclass
class TaskConfig:
    group: GroupSpec
    task: str
    source: object
    params: dict
    quadrature: QuadratureConfig
    seed: int
    threads: int
    raw: dict


def _require(d, key, where):
    if key not in d:
        raise ConfigError(f"missing required field {key!r} in {where}")
    return d[key]


def _parse_group(d) -> GroupSpec:
    kind = _require(d, "kind", "group")
    try:
        if kind == "custom":
            return build_group("custom", b=_require(d, "b", "group"))
        return build_group(kind, n=int(d.get("n", 1)))
    except GroupValidationError as exc:
        raise ConfigError(f"group: {exc}") from exc


def _parse_point(spec, d, where):
    try:
        return point(spec, d["z"], d["t"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{where}: bad point ({exc})") from exc


def _parse_source(spec, d):
    if d is None:
        return None
    kind = _require(d, "type", "source")
    if kind == "density":
        bumps = []
        for i, b in enumerate(_require(d, "bumps", "source")):
            center = _parse_point(spec, _require(b, "center", f"source.bumps[{i}]"),
                                  f"source.bumps[{i}].center")
            try:
                bumps.append(Bump(center, float(b.get("radius", 0.5)),
                                  float(b.get("amplitude", 1.0))))
            except ValueError as exc:
                raise ConfigError(f"source.bumps[{i}]: {exc}") from exc
        return Density(tuple(bumps))
    if kind == "atoms":
        atoms = []
        for i, a in enumerate(_require(d, "atoms", "source")):
            p = _parse_point(spec, a, f"source.atoms[{i}]")
            atoms.append((float(a.get("weight", 1.0)), p))
        try:
            return DiscreteMeasure(tuple(atoms))
        except ValueError as exc:
            raise ConfigError(f"source.atoms: {exc}") from exc
    raise ConfigError(f"source.type must be 'density' or 'atoms', got {kind!r}")


def _parse_quadrature(d) -> QuadratureConfig:
    d = d or {}
    known = {"gauss_order", "rel_tol", "abs_tol", "max_depth",
             "singular_refine_depth", "max_cells"}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"quadrature: unknown fields {sorted(unknown)}")
    try:
        return QuadratureConfig(**{k: type(getattr(QuadratureConfig, k))(v)
                                   for k, v in d.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"quadrature: {exc}") from exc


def _parse_alpha_p(cfg: TaskConfig):
    params = cfg.params
    p = _require(params, "p", "params")
    p = math.inf if p in ("inf", "infinity") else float(p)
    alpha = float(_require(params, "alpha", "params"))
    try:
        return TheoremCase.for_group(cfg.group, p, alpha)
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from exc


def parse_config(path_or_text) -> TaskConfig:
    """Load and validate a task config from a JSON file path or JSON text."""
    text = path_or_text
    if not path_or_text.lstrip().startswith("{"):
        try:
            with open(path_or_text, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path_or_text!r}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    version = _require(raw, "schema_version", "config")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    task = _require(raw, "task", "config")
    if task not in TASKS:
        raise ConfigError(f"task must be one of {TASKS}, got {task!r}")
    spec = _parse_group(_require(raw, "group", "config"))
    source = _parse_source(spec, raw.get("source"))
    if task in ("verify", "riesz", "explore_threshold") and source is None:
        raise ConfigError(f"task {task!r} requires a source")
    if task == "newtonian":
        if not isinstance(source, Density):
            raise ConfigError("task 'newtonian' requires a density source")
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    threads = raw.get("threads", os.cpu_count() or 1)
    cfg = TaskConfig(
        group=spec,
        task=task,
        source=source,
        params=params,
        quadrature=_parse_quadrature(raw.get("quadrature")),
        seed=int(raw.get("seed", 0)),
        threads=int(threads),
        raw=raw,
    )
    if task == "verify":
        _parse_alpha_p(cfg)  # reject out-of-range (p, alpha) early
    if task == "explore_threshold":
        alphas = params.get("alphas")
        if not alphas:
            raise ConfigError("explore_threshold needs params.alphas")
        for a in alphas:
            if not float(a) < spec.Q - 2:
                raise ConfigError(
                    f"explore_threshold: alpha {a} >= Q-2 = {spec.Q - 2} makes the "
                    "Hessian kernel non-integrable"
                )
    return cfg


def _sample_points(cfg: TaskConfig):
    spec = cfg.group
    samples = cfg.params.get("samples")
    if samples is None:
        raise ConfigError("params.samples (box+counts or points) is required")
    if "points" in samples:
        return [point(spec, p[: spec.m], p[spec.m :]) for p in samples["points"]]
    box = _require(samples, "box", "params.samples")
    counts = _require(samples, "counts", "params.samples")
    lower = np.asarray(_require(box, "lower", "params.samples.box"), float)
    upper = np.asarray(_require(box, "upper", "params.samples.box"), float)
    counts = [int(c) for c in counts]
    if not (len(lower) == len(upper) == len(counts) == spec.dim):
        raise ConfigError(f"params.samples: box and counts must have length {spec.dim}")
    axes = [np.linspace(lower[d], upper[d], counts[d]) for d in range(spec.dim)]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return [point(spec, r[: spec.m], r[spec.m :]) for r in pts]


def _random_gauge_points(spec, rng, n, lo=0.5, hi=3.0):
    pts = []
    for _ in range(n):
        z = rng.standard_normal(spec.m)
        t = rng.standard_normal(spec.k)
        g = point(spec, z, t)
        norm = gauge_norm(g)
        if norm == 0.0:
            continue
        pts.append(dilate(spec, rng.uniform(lo, hi) / norm, g))
    return pts


# --- task implementations ---


def _task_group_info(cfg):
    spec = cfg.group
    rep = validate_htype(spec)
    return [
        Record("m", float(spec.m), 0.0, True),
        Record("k", float(spec.k), 0.0, True),
        Record("Q", float(spec.Q), 0.0, True),
        Record("htype_max_defect", rep.max_defect, rep.tol, rep.ok),
    ], None, None


def _task_lemmas(cfg):
    spec = cfg.group
    rng = np.random.default_rng(cfg.seed)
    n = int(cfg.params.get("num_points", 200))
    records = []

    pts = _random_gauge_points(spec, rng, n)
    z = np.array([g.z for g in pts])
    t = np.array([g.t for g in pts])
    pa = batch_primitives(spec, z, t)
    aa = np.einsum("ni,ni->n", pa.a_vec, pa.a_vec)

    def maxrel(defect, scale):
        return float(np.max(np.abs(defect) / (np.abs(scale) + 1e-300)))

    tt = rng.standard_normal((len(pts), spec.k))
    jz2 = np.einsum("ns,nsi->ni", tt, pa.jz)
    ht = maxrel(np.einsum("ni,ni->n", jz2, jz2) - pa.psi * np.einsum("ns,ns->n", tt, tt),
                pa.psi * np.einsum("ns,ns->n", tt, tt) + 1.0)
    records.append(Record("identity_jtz_norm", ht, 1e-12, ht <= 1e-12))

    t2 = rng.standard_normal((len(pts), spec.k))
    jz3 = np.einsum("ns,nsi->ni", t2, pa.jz)
    ht2 = maxrel(
        np.einsum("ni,ni->n", jz2, jz3) - np.einsum("ns,ns->n", tt, t2) * pa.psi,
        np.abs(np.einsum("ns,ns->n", tt, t2)) * pa.psi + 1.0,
    )
    records.append(Record("identity_jtz_polarized", ht2, 1e-12, ht2 <= 1e-12))

    bz = maxrel(np.einsum("nsi,ni->ns", pa.jz, z), pa.psi[:, None] + 1.0)
    records.append(Record("identity_b_z_orthogonal", bz, 1e-12, bz <= 1e-12))

    gram = np.einsum("nri,nsi->nrs", pa.jz, pa.jz) - pa.psi[:, None, None] * np.eye(spec.k)
    bb = maxrel(gram, pa.psi[:, None, None] + 1.0)
    records.append(Record("identity_b_gram", bb, 1e-12, bb <= 1e-12))

    a2 = maxrel(aa - pa.psi * pa.a, pa.psi * pa.a + 1.0)
    records.append(Record("identity_avec_norm", a2, 1e-12, a2 <= 1e-12))

    # closed-form squared-gradient identities
    grads = {}
    for name, q_or_kernel in (("psi", "psi"), ("chi", "chi"), ("a", "a"), ("N", "N")):
        vals = []
        for g in pts:
            jet = analytic_jet(spec, g, q_or_kernel)
            vals.append((jet.value, float(jet.grad @ jet.grad)))
        grads[name] = np.array(vals)
    checks = [
        ("lemma_grad_psi", grads["psi"][:, 1] - 4.0 * pa.psi, 4.0 * pa.psi),
        ("lemma_grad_chi", grads["chi"][:, 1] - pa.psi * pa.chi, pa.psi * pa.chi),
        ("lemma_grad_a", grads["a"][:, 1] - 16.0 * pa.psi * pa.a, 16.0 * pa.psi * pa.a),
        ("lemma_grad_N", grads["N"][:, 1] - pa.psi / pa.norm**2, pa.psi / pa.norm**2),
    ]
    for name, defect, scale in checks:
        v = maxrel(defect, scale + 1.0)
        records.append(Record(name, v, 1e-12, v <= 1e-12))

    # analytic jets against the finite-difference oracle
    n_fd = int(cfg.params.get("num_fd_points", 12))
    kernels = [("psi", None), ("chi", None), ("a", None), ("N", None),
               ("N_pow", -3.0), ("N_pow", -1.0), ("N_pow", 0.5), ("N_pow", 2.0),
               ("log_N", None)]
    worst = 0.0
    for kernel, qv in kernels:
        fld = kernel_field(spec, kernel, qv)
        for g in pts[:n_fd]:
            jet = analytic_jet(spec, g, kernel, qv)
            ref = fd_jet(spec, fld, g)
            scale = abs(jet.value) + np.abs(jet.grad).sum() + np.abs(jet.hess).sum() + 1.0
            d = max(np.abs(jet.grad - ref.grad).max(), np.abs(jet.hess - ref.hess).max())
            worst = max(worst, d / scale)
    records.append(Record("jets_vs_fd", worst, 1e-6, worst <= 1e-6))

    # commutator structure on a generic smooth field
    fld = kernel_field(spec, "chi")
    worst_c = 0.0
    for g in pts[: min(4, len(pts))]:
        for i in range(spec.m):
            for j in range(i + 1, spec.m):
                worst_c = max(worst_c, abs(commutator_defect(spec, fld, g, i, j)))
    records.append(Record("commutator_defect", worst_c, 1e-5, worst_c <= 1e-5))
    return records, None, None


def _task_fundamental(cfg):
    spec = cfg.group
    rng = np.random.default_rng(cfg.seed)
    n = int(cfg.params.get("num_points", 100))
    p_values = [float(p) for p in cfg.params.get("p_values", [3.0, 5.0, 6.0] if spec.Q == 4 else [4.0, 12.0])]
    records = []
    pole = identity(spec)
    pts = _random_gauge_points(spec, rng, n)

    for p in p_values:
        res = harmonicity_residuals(spec, p, pole, pts)
        v = float(np.abs(res).max())
        records.append(Record(f"p_harmonic_residual_p{p:g}", v, 1e-9, v <= 1e-9))
    res = harmonicity_residuals(spec, float(spec.Q), pole, pts)
    v = float(np.abs(res).max())
    records.append(Record("p_harmonic_residual_log", v, 1e-9, v <= 1e-9))

    worst = 0.0
    for g in pts:
        jet = analytic_jet(spec, g, "N")
        worst = max(worst, abs(infinity_laplacian(jet)) / residual_scale(jet, math.inf))
    records.append(Record("infinity_laplacian_N", worst, 1e-10, worst <= 1e-10))

    if bool(cfg.params.get("compute_omega", spec.k == 1)):
        for p in p_values:
            try:
                params = omega_sigma(spec, p, cfg.quadrature)
            except QuadratureNotConverged as exc:
                raise NumericalError(f"omega_{p:g} did not converge") from exc
            tol = max(cfg.quadrature.abs_tol, cfg.quadrature.rel_tol * params.omega_p)
            records.append(Record(f"omega_p{p:g}", params.omega_p, tol, True))
            records.append(Record(f"sigma_p{p:g}", params.sigma_p, tol * spec.Q, True))
            sym = 0.0
            for _ in range(20):
                g1, g2 = _random_gauge_points(spec, rng, 2)
                a = gamma_p(spec, params, g1, g2)
                b = gamma_p(spec, params, g2, g1)
                sym = max(sym, abs(a - b) / (abs(a) + abs(b) + 1e-300))
            records.append(Record(f"gamma_symmetry_p{p:g}", sym, 1e-12, sym <= 1e-12))
    return records, None, None


def _verify_csv(spec, report):
    header = [f"z{i+1}" for i in range(spec.m)] + [f"t{s+1}" for s in range(spec.k)]
    header += ["F", "gradnorm", "subLap", "infLap", "pLap", "verdict", "errbound"]
    rows = []
    for pt in report.points:
        coords = list(coords_of(pt.point))
        rows.append(coords + [pt.value, pt.grad_norm, pt.sub_lap, pt.inf_lap,
                              pt.p_lap, "pass" if pt.ok else "fail", pt.error_bound])
    return header, rows


def _task_verify(cfg):
    spec = cfg.group
    case = _parse_alpha_p(cfg)
    samples = _sample_points(cfg)
    try:
        report = verify_theorem(spec, cfg.source, case, samples, cfg.quadrature,
                                threads=cfg.threads,
                                allow_high_dim=bool(cfg.params.get("allow_high_dim", False)))
    except (SingularityError, ValueError) as exc:
        raise ConfigError(f"verify: {exc}") from exc
    if any(not pt.converged for pt in report.points):
        bad = sum(not pt.converged for pt in report.points)
        raise NumericalError(f"verify: quadrature failed to converge at {bad} sample point(s)")
    records = []
    for idx, pt in enumerate(report.points):
        records.append(Record(f"sign_point_{idx:04d}", pt.p_lap, pt.tolerance, pt.ok))
    records.append(Record("max_violation", report.max_violation, 0.0,
                          report.max_violation <= 0.0))
    header, rows = _verify_csv(spec, report)
    return records, header, rows


def _task_riesz(cfg):
    spec = cfg.group
    case = _parse_alpha_p(cfg)
    samples = _sample_points(cfg)
    header = [f"z{i+1}" for i in range(spec.m)] + [f"t{s+1}" for s in range(spec.k)] + ["F"]
    rows = []
    vals = []
    for g in samples:
        try:
            v = riesz_value(spec, cfg.source, case, g, cfg.quadrature,
                            allow_high_dim=bool(cfg.params.get("allow_high_dim", False)))
        except SingularityError as exc:
            raise ConfigError(f"riesz: {exc}") from exc
        except QuadratureNotConverged as exc:
            raise NumericalError(f"riesz: {exc}") from exc
        vals.append(v)
        rows.append(list(coords_of(g)) + [v])
    records = [
        Record("grid_points", float(len(samples)), 0.0, True),
        Record("min_F", float(min(vals)), 0.0, True),
        Record("max_F", float(max(vals)), 0.0, True),
    ]
    return records, header, rows


def _task_newtonian(cfg):
    spec = cfg.group
    rho = cfg.source
    spread_max = float(cfg.params.get("spread_max", 0.02))
    quad = cfg.quadrature
    if cfg.raw.get("quadrature") is None:
        # the one-sided FD of the gradient amplifies quadrature noise by
        # 1/step, so this task defaults tighter than the global default
        quad = QuadratureConfig(rel_tol=1e-6, abs_tol=1e-10)
    samples_cfg = cfg.params.get("samples")
    if samples_cfg:
        samples = _sample_points(cfg)
    else:
        b = rho.bumps[0]
        n_samples = int(cfg.params.get("num_samples", 10))
        offsets = np.linspace(-0.45, 0.45, n_samples)
        samples = []
        for i, off in enumerate(offsets):
            dz = np.zeros(spec.m)
            dz[i % spec.m] = off * b.radius
            samples.append(point(spec, b.center.z + dz, b.center.t))
    try:
        chk = verify_linear_potential(spec, rho, samples, quad,
                                      fd_step=float(cfg.params.get("fd_step", 5e-3)))
    except QuadratureNotConverged as exc:
        raise NumericalError(f"newtonian: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"newtonian: {exc}") from exc
    records = [Record(f"ratio_{i:02d}", r, 0.0, True) for i, r in enumerate(chk.ratios)]
    records.append(Record("mean_ratio", chk.mean_ratio, 0.0, True))
    records.append(Record("ratio_spread", chk.spread, spread_max, chk.spread <= spread_max))
    return records, None, None


class _RawKernel:
    """Unvalidated kernel descriptor for exploratory scans."""

    def __init__(self, q):
        self.q = q
        self.alpha = -q
        self.is_log = q == 0.0
        self.p = None
        self.case = "exploratory"


def _task_explore(cfg):
    spec = cfg.group
    p = float(_require(cfg.params, "p", "params"))
    alphas = [float(a) for a in cfg.params["alphas"]]
    samples = _sample_points(cfg)
    expect_super = p < spec.Q
    records = []
    for alpha in alphas:
        kern = _RawKernel(-alpha)
        worst = -math.inf
        for g in samples:
            ji = riesz_jet_result(spec, cfg.source, kern, g, cfg.quadrature,
                                  allow_high_dim=bool(cfg.params.get("allow_high_dim", False)))
            v = p_laplacian(ji.jet, p)
            worst = max(worst, v if expect_super else -v)
        records.append(Record(f"max_violation_alpha_{alpha:g}", worst, 0.0, True))
    return records, None, None


_RUNNERS = {
    "group_info": _task_group_info,
    "lemmas": _task_lemmas,
    "fundamental": _task_fundamental,
    "riesz": _task_riesz,
    "verify": _task_verify,
    "newtonian": _task_newtonian,
    "explore_threshold": _task_explore,
}


def run_task(cfg: TaskConfig) -> RunReport:
    """Run the configured task and assemble the full report."""
    start = time.perf_counter()
    records, header, rows = _RUNNERS[cfg.task](cfg)
    return RunReport(
        version=__version__,
        config=cfg.raw,
        records=records,
        overall_pass=all(r.passed for r in records),
        timing_seconds=time.perf_counter() - start,
        exploratory=cfg.task == "explore_threshold",
        grid_header=header,
        grid_rows=rows,
    )


def write_outputs(report: RunReport, json_path, csv_path=None):
    """Write the JSON report (always) and the CSV grid (grid-bearing tasks).

    Output bytes depend only on the config and tool version.
    """
    try:
        payload = json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
        with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload)
        if report.grid_rows is not None and csv_path is not None:
            with open(csv_path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(report.grid_header)
                for row in report.grid_rows:
                    writer.writerow(
                        [repr(float(v)) if isinstance(v, (float, np.floating)) else v
                         for v in row]
                    )
    except OSError as exc:
        raise ConfigError(f"cannot write outputs: {exc}") from exc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="htpot",
        description="Horizontal-calculus checks and Riesz-potential sign "
                    "verification on Heisenberg-type groups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for task in TASKS:
        sp = sub.add_parser(task.replace("_", "-"), help=f"run the {task} task")
        sp.add_argument("--config", required=True, help="JSON config path")
        sp.add_argument("--out", default="report.json", help="JSON report path")
        sp.add_argument("--csv", default=None, help="CSV grid path (grid tasks)")
        sp.add_argument("--threads", type=int, default=None, help="worker threads")
        sp.add_argument("--seed", type=int, default=None, help="RNG seed override")
    args = parser.parse_args(argv)
    task = args.command.replace("-", "_")

    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.task != task:
        print(f"config error: config task {cfg.task!r} does not match "
              f"subcommand {task!r}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.raw["seed"] = args.seed
    if args.threads is not None:
        cfg.threads = args.threads

    csv_path = args.csv
    if csv_path is None and task in GRID_TASKS:
        base, _ = os.path.splitext(args.out)
        csv_path = base + ".csv"

    try:
        report = run_task(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, QuadratureNotConverged) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    try:
        write_outputs(report, args.out, csv_path)
    except ConfigError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    print(f"{task}: {'pass' if report.overall_pass else 'FAIL'} "
          f"({len(report.records)} records, {report.timing_seconds:.2f}s)",
          file=sys.stderr)
    return EXIT_OK if report.overall_pass else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
