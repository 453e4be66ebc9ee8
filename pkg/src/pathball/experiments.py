"""Experiment driver: identity verification suites, invariance and concentration
runs, and finite-difference Jacobian determinant checks.

Every run is a deterministic function of its configuration; trial-level work
is keyed by index so thread counts change timing only.  Each emitted row
carries provenance (config hash, seed, version string).
"""

from __future__ import annotations

import hashlib
import json
import math
import subprocess
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import ConfigError, ExperimentConfig, config_dict
from .lie_core import AlgebraBasis, adjoint, exp_so3_batch, exp_matrix, uniform_norm
from .path_group import (StepElement, correction_norm, inverse, partial_products,
                         partial_products_batch, product_integral, star,
                         star_discretized, star_phi, star_pointwise)
from .path_space import (StepPath, from_coords, l2_inner, l2_norm, refine,
                         sup_norm, to_coords)
from .sampling import (MeasureSpec, RadiusSchedule, radius_for, sample_ball,
                       sample_ball_coords, splitmix64, trial_generator)
from .transport import (EXACT_SOLVER_CAP, EmpiricalMeasure, anchor_witness,
                        angle_statistics_batch, escape_fraction, mk_entropic,
                        mk_exact, twisted_alignment, witness_gap)

try:
    from importlib.metadata import version as _pkg_version
    _VERSION = _pkg_version("pathball")
except Exception:  # pragma: no cover
    _VERSION = "0.0.0"


def version_string() -> str:
    try:
        rev = subprocess.run(["git", "rev-parse", "--short", "HEAD"],
                             capture_output=True, text=True, timeout=5,
                             check=True).stdout.strip()
        return f"pathball-{_VERSION}+g{rev}"
    except Exception:
        return f"pathball-{_VERSION}"


def provenance(config: ExperimentConfig) -> dict:
    canon = json.dumps(config_dict(config), sort_keys=True)
    return {
        "config_hash": hashlib.sha256(canon.encode()).hexdigest()[:16],
        "seed": config.seed,
        "version": version_string(),
    }


def _map_indexed(fn, items, threads: int):
    """Apply fn over items, optionally threaded; output order is by index."""
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def translator_path(config: ExperimentConfig, n: int | None = None,
                    partition: int | None = None) -> StepPath:
    """The fixed right-translation element g from its config specification."""
    basis = AlgebraBasis(config.dim)
    part = partition or config.g_partition
    dk = basis.algebra_dim
    if config.g_coords is not None and part == config.g_partition:
        coords = np.array(config.g_coords, float)
        if coords.size != part * dk:
            raise ConfigError(
                f"g_coords has {coords.size} entries, expected {part * dk}")
    else:
        rng = trial_generator(config.g_seed, 0)
        coords = rng.standard_normal(part * dk)
    g = from_coords(coords, part, basis)
    if config.g_normalize == "l2":
        g = StepPath(g.values / l2_norm(g))
    elif config.g_normalize == "sup":
        g = StepPath(g.values / sup_norm(g))
    if n is not None:
        if n % part:
            raise ConfigError(f"g on partition {part} is not representable on N={n}")
        g = refine(g, n // part)
    return g


# ---------------------------------------------------------------------------
# Jacobian determinants (measure preservation)

JACOBIAN_DIM_CAP = 64


def numerical_jacobian_det(map_fn, point: np.ndarray, h: float) -> float:
    """Central-difference Jacobian determinant of a coordinate map."""
    if h <= 0:
        raise ValueError("h must be positive")
    point = np.asarray(point, float)
    dim = point.size
    if dim > JACOBIAN_DIM_CAP:
        raise ValueError(f"dimension {dim} above dense-Jacobian cap {JACOBIAN_DIM_CAP}")
    J = np.empty((dim, dim))
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = h
        J[:, k] = (np.asarray(map_fn(point + e)) - np.asarray(map_fn(point - e))) / (2 * h)
    return float(np.linalg.det(J))


def inverse_coordinate_map(n: int, basis: AlgebraBasis):
    def apply(coords):
        f = from_coords(coords, n, basis)
        return to_coords(inverse(f), basis)
    return apply


def phi_coordinate_map(g: StepPath, basis: AlgebraBasis):
    def apply(coords):
        f = from_coords(coords, g.num_intervals, basis)
        return to_coords(star_phi(f, g), basis)
    return apply


def run_jacobian(config: ExperimentConfig) -> dict:
    basis = AlgebraBasis(config.dim)
    n = config.jacobian_n
    g = translator_path(config, partition=n)
    spec = MeasureSpec(n=n, radius=config.jacobian_radius, dim=config.dim,
                       seed=config.seed)
    points = sample_ball_coords(spec, config.jacobian_points,
                                workers=config.threads)
    inv_map = inverse_coordinate_map(n, basis)
    phi_map = phi_coordinate_map(g, basis)
    prov = provenance(config)
    rows = []
    for idx, p in enumerate(points):
        det_inv = numerical_jacobian_det(inv_map, p, config.jacobian_h)
        det_phi = numerical_jacobian_det(phi_map, p, config.jacobian_h)
        rows.append({"map": "inverse", "point_index": idx, "h": config.jacobian_h,
                     "det": det_inv, "deviation": abs(abs(det_inv) - 1.0), **prov})
        rows.append({"map": "phi", "point_index": idx, "h": config.jacobian_h,
                     "det": det_phi, "deviation": abs(det_phi - 1.0), **prov})
    return {"experiment": "jacobian", "rows": rows, "provenance": prov}


# ---------------------------------------------------------------------------
# Verification suite

def _spectral_norms(batch: np.ndarray) -> np.ndarray:
    return np.linalg.svd(batch, compute_uv=False)[..., 0]


def _check(name, deviation, threshold):
    return {"name": name, "max_deviation": float(deviation),
            "threshold": threshold, "passed": bool(deviation <= threshold)}


def check_exp_lipschitz(config: ExperimentConfig, exp_override=None) -> dict:
    """Operator-norm Lipschitz contract of the exponential on random pairs."""
    basis = AlgebraBasis(config.dim)
    rng = trial_generator(config.seed, 101)
    m = config.lipschitz_pairs
    dk = basis.algebra_dim
    cX = rng.standard_normal((m, dk))
    cY = rng.standard_normal((m, dk))
    for c in (cX, cY):
        norms = np.linalg.norm(c, axis=1, keepdims=True)
        c *= rng.random((m, 1)) * 5.0 / norms  # HS norms uniform in (0, 5)
    X, Y = basis.matrix(cX), basis.matrix(cY)
    if exp_override is not None:
        eX = np.stack([exp_override(x) for x in X])
        eY = np.stack([exp_override(y) for y in Y])
    elif config.dim == 3:
        eX, eY = exp_so3_batch(X), exp_so3_batch(Y)
    else:
        eX = np.stack([exp_matrix(x) for x in X])
        eY = np.stack([exp_matrix(y) for y in Y])
    dev = _spectral_norms(eX - eY) - _spectral_norms(X - Y)
    return _check("exp_lipschitz", dev.max(), 1e-12)


def _verify_paths(config: ExperimentConfig, count: int, seed_tag: int,
                  n: int | None = None, radius: float = 5.0) -> list[StepPath]:
    spec = MeasureSpec(n=n or min(config.n_values), radius=radius,
                       dim=config.dim, seed=splitmix64(config.seed ^ seed_tag))
    return sample_ball(spec, count, workers=config.threads)


def check_frozen_holonomy_identity(config: ExperimentConfig) -> dict:
    """Conjugating a step value by the exact vs frozen holonomy agrees."""
    grid = np.linspace(0.0, 1.0, config.grid_points)
    worst = 0.0
    for f in _verify_paths(config, config.verify_paths, 0x51):
        table = partial_products(f)
        for t in grid:
            a = adjoint(product_integral(f, t, table).T, f(t))
            b = adjoint(table.at_time(t).T, f(t))
            worst = max(worst, float(np.abs(a - b).max()))
    return _check("frozen_holonomy_identity", worst, 1e-10)


def check_cocycle(config: ExperimentConfig, h: float = 1e-5) -> dict:
    """Finite-difference logarithmic derivative of a pointwise product."""
    from .path_group import log_derivative_numeric
    rng = trial_generator(config.seed, 0x52)
    worst = 0.0
    pairs = _verify_paths(config, 40, 0x53), _verify_paths(config, 40, 0x54)
    for f, g in zip(*pairs):
        tf, tg = partial_products(f), partial_products(g)

        def path(t):
            return product_integral(f, t, tf) @ product_integral(g, t, tg)

        n = f.num_intervals
        for _ in range(3):
            # interior points away from the partition jumps
            i = int(rng.integers(0, n))
            t = (i + 0.1 + 0.8 * rng.random()) / n
            est = log_derivative_numeric(path, t, h)
            exact = f(t) + adjoint(product_integral(f, t, tf), g(t))
            worst = max(worst, float(np.abs(est - exact).max()))
    return _check("cocycle_log_derivative", worst, 1e-5)


def check_group_axioms(config: ExperimentConfig) -> tuple[dict, dict, dict]:
    grid = np.linspace(0.0, 1.0, config.grid_points)
    fs = _verify_paths(config, config.verify_triples, 0x55)
    gs = _verify_paths(config, config.verify_triples, 0x56)
    hs = _verify_paths(config, config.verify_triples, 0x57)
    assoc = ident = inv_dev = 0.0
    for f, g, hp in zip(fs, gs, hs):
        ef, eg, eh = StepElement(f), StepElement(g), StepElement(hp)
        lhs = star(star(ef, eg), eh)
        rhs = star(ef, star(eg, eh))
        zero = StepPath.zero(f.num_intervals, f.dim)
        finv = inverse(f, ef.table)
        for t in grid:
            assoc = max(assoc, float(np.abs(lhs.value(t) - rhs.value(t)).max()))
            ident = max(ident,
                        float(np.abs(star_pointwise(f, zero, t, ef.table) - f(t)).max()),
                        float(np.abs(star_pointwise(zero, g, t) - g(t)).max()))
            inv_dev = max(inv_dev, float(np.linalg.norm(
                star_pointwise(f, finv, t, ef.table))))
    return (_check("associativity", assoc, 1e-9),
            _check("identity_laws", ident, 0.0),
            _check("inverse_law", inv_dev, 1e-9))


def check_inverse_norm(config: ExperimentConfig) -> dict:
    worst = 0.0
    for f in _verify_paths(config, config.verify_paths, 0x58):
        worst = max(worst, abs(l2_norm(inverse(f)) - l2_norm(f)))
    return _check("inverse_norm_preservation", worst, 1e-12)


def check_homomorphism(config: ExperimentConfig, m: int = 512,
                       pairs: int = 20) -> tuple[dict, dict]:
    """Product integral of a discretized product vs the product of integrals."""
    fs = _verify_paths(config, pairs, 0x59, n=8)
    gs = _verify_paths(config, pairs, 0x5A, n=8)
    worst = 0.0
    monotone = -math.inf
    for f, g in zip(fs, gs):
        target = product_integral(f, 1.0, partial_products(f)) \
            @ product_integral(g, 1.0, partial_products(g))

        def err(mm):
            fg = star_discretized(f, g, mm)
            return float(np.linalg.norm(
                product_integral(fg, 1.0, partial_products(fg)) - target))

        e1, e2 = err(m), err(2 * m)
        worst = max(worst, e1)
        monotone = max(monotone, e2 - e1)
    return (_check("homomorphism_error", worst, 1e-3),
            _check("homomorphism_refinement_trend", monotone, 0.0))


def check_correction_bound(config: ExperimentConfig, count: int = 50) -> dict:
    """Frozen-holonomy correction against its analytic 2||g||_sup ||f||_2 / N bound."""
    n = min(config.n_values)
    g = translator_path(config, partition=n)
    g = StepPath(g.values / sup_norm(g))
    worst = -math.inf
    spec = MeasureSpec(n=n, radius=radius_for(
        RadiusSchedule(config.alpha, config.scale), n),
        dim=config.dim, seed=splitmix64(config.seed ^ 0x5B))
    for f in sample_ball(spec, count, workers=config.threads):
        bound = 2.0 * sup_norm(g) * l2_norm(f) / n
        worst = max(worst, correction_norm(f, g, config.quad_points) - bound)
    return _check("correction_bound", worst, 1e-8)


def run_verify(config: ExperimentConfig, exp_override=None) -> dict:
    checks = [check_exp_lipschitz(config, exp_override=exp_override),
              check_frozen_holonomy_identity(config),
              check_cocycle(config),
              *check_group_axioms(config),
              check_inverse_norm(config),
              *check_homomorphism(config),
              check_correction_bound(config)]
    return {"experiment": "verify",
            "checks": checks,
            "passed": all(c["passed"] for c in checks),
            "provenance": provenance(config)}


# ---------------------------------------------------------------------------
# Invariance experiment

def _empirical_mk(A: EmpiricalMeasure, B: EmpiricalMeasure):
    if len(A) <= EXACT_SOLVER_CAP:
        return mk_exact(A, B)
    return mk_entropic(A, B, reg=1e-3)


def run_invariance(config: ExperimentConfig) -> dict:
    g_coarse = translator_path(config)
    schedule = RadiusSchedule(config.alpha, config.scale)
    prov = provenance(config)
    rows = []
    for n in config.n_values:
        radius = radius_for(schedule, n)
        g = translator_path(config, n=n)
        spec = MeasureSpec(n=n, radius=radius, dim=config.dim, seed=config.seed)
        A = sample_ball(spec, config.samples, workers=config.threads)
        push = _map_indexed(lambda f: star_discretized(f, g, config.refine_multiple),
                            A, config.threads)
        MA, MB = EmpiricalMeasure(A), EmpiricalMeasure(push)
        mk = _empirical_mk(MA, MB)
        baseline_spec = MeasureSpec(n=n, radius=radius, dim=config.dim,
                                    seed=splitmix64(config.seed ^ 0xBA5E))
        baseline = _empirical_mk(
            MA, EmpiricalMeasure(sample_ball(baseline_spec, config.samples,
                                             workers=config.threads)))
        anchor_spec = MeasureSpec(n=n, radius=radius, dim=config.dim,
                                  seed=splitmix64(config.seed ^ 0xA7C0))
        anchors = sample_ball(anchor_spec, config.witness_anchors)
        gap = witness_gap(MA, MB, [anchor_witness(c) for c in anchors],
                          seed=config.seed)
        rows.append({
            "n": n,
            "radius": radius,
            "mk_method": mk.method,
            "mk_value": mk.value,
            "baseline_mk": baseline.value,
            "witness_gap": gap.value,
            "correction_bound": 2.0 * sup_norm(g_coarse) * radius / n,
            "projection_bound": 2.0 * sup_norm(g_coarse) * radius
                                / (n * config.refine_multiple),
            "escape_fraction": escape_fraction(spec, g, config.samples),
            "samples": config.samples,
            **prov,
        })
    return {"experiment": "invariance", "rows": rows, "provenance": prov}


# ---------------------------------------------------------------------------
# Concentration experiment

def run_concentration(config: ExperimentConfig) -> dict:
    basis = AlgebraBasis(config.dim)
    prov = provenance(config)
    rows = []
    for n in config.n_values:
        radius = radius_for(RadiusSchedule(config.alpha, config.scale), n)
        g = translator_path(config, n=n)
        spec = MeasureSpec(n=n, radius=radius, dim=config.dim, seed=config.seed)
        coords = sample_ball_coords(spec, config.samples, workers=config.threads)
        values = basis.matrix(
            coords.reshape(config.samples, n, basis.algebra_dim) * math.sqrt(n))
        if config.dim == 3:
            tables = partial_products_batch(values)[:, :-1]
            twisted = tables @ g.values[None] @ tables.transpose(0, 1, 3, 2)
            inner_fh = np.sum(values * twisted, axis=(1, 2, 3)) / n
            nf = np.sqrt(np.sum(values ** 2, axis=(1, 2, 3)) / n)
            angles = np.arccos(np.clip(inner_fh / (nf * l2_norm(g)), -1.0, 1.0))
            inv_vals = -(tables.transpose(0, 1, 3, 2) @ values @ tables)
            inner_inv_g = np.sum(inv_vals * g.values[None], axis=(1, 2, 3)) / n
            identity_residual = float(np.abs(inner_fh + inner_inv_g).max())
        else:
            paths = [StepPath(v) for v in values]
            angles = np.array([
                float(np.arccos(np.clip(
                    l2_inner(f, twisted_alignment(f, g)) / (l2_norm(f) * l2_norm(g)),
                    -1, 1))) for f in paths])
            identity_residual = max(
                abs(l2_inner(f, twisted_alignment(f, g)) + l2_inner(inverse(f), g))
                for f in paths)
        row = {"n": n, "radius": radius,
               "median_angle": float(np.median(angles)),
               "identity_residual": identity_residual,
               "samples": config.samples, **prov}
        for eps in config.angle_eps:
            row[f"tail_{eps:g}"] = float(np.mean(np.abs(angles - np.pi / 2) > eps))
        rows.append(row)
    summary = {"decay_rates": _tail_decay_rates(rows, config.angle_eps)}
    return {"experiment": "concentration", "rows": rows, "summary": summary,
            "provenance": prov}


def _tail_decay_rates(rows, eps_list) -> dict:
    """Least-squares slope of log tail against N; reported, never asserted."""
    out = {}
    for eps in eps_list:
        pts = [(row["n"], row[f"tail_{eps:g}"]) for row in rows
               if row[f"tail_{eps:g}"] > 0.0]
        if len(pts) >= 2:
            ns = np.array([p[0] for p in pts], float)
            logs = np.log(np.array([p[1] for p in pts]))
            slope = np.polyfit(ns, logs, 1)[0]
            out[f"{eps:g}"] = float(-slope)
        else:
            out[f"{eps:g}"] = None
    return out


RUNNERS = {
    "verify": run_verify,
    "invariance": run_invariance,
    "concentration": run_concentration,
    "jacobian": run_jacobian,
}


def run_experiment(config: ExperimentConfig) -> dict:
    return RUNNERS[config.experiment](config)
