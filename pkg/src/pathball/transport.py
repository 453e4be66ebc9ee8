"""Transport-distance estimators and concentration statistics.

The ground metric is the truncated L2 distance min(||f - g||, 1).  Exact
Monge-Kantorovich (Wasserstein-1) values between equal-size empirical
measures come from an optimal assignment; larger instances use log-domain
Sinkhorn scaling; Lipschitz witness families give certified lower bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .lie_core import AlgebraBasis
from .path_group import partial_products, partial_products_batch, star_phi
from .path_space import StepPath, common_refinement, l2_inner, l2_norm, to_coords
from .sampling import MeasureSpec, sample_ball_coords

EXACT_SOLVER_CAP = 1024


@dataclass(frozen=True)
class TransportReport:
    method: str  # exact-assignment | entropic | witness-lower-bound
    value: float
    sample_size: int
    reg: float | None = None
    iterations: int | None = None
    witness_count: int | None = None
    seed: int | None = None
    converged: bool = True


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Uniformly weighted finite sample of step paths on one partition."""

    samples: list = field(repr=False)

    def __post_init__(self):
        if len(self.samples) < 1:
            raise ValueError("need at least one sample")
        n = self.samples[0].num_intervals
        d = self.samples[0].dim
        for s in self.samples:
            if s.num_intervals != n or s.dim != d:
                raise ValueError("all samples must share one partition and dim")

    def __len__(self):
        return len(self.samples)

    @property
    def num_intervals(self) -> int:
        return self.samples[0].num_intervals

    @property
    def dim(self) -> int:
        return self.samples[0].dim

    def coords(self, basis: AlgebraBasis | None = None) -> np.ndarray:
        basis = basis or AlgebraBasis(self.dim)
        return np.stack([to_coords(s, basis) for s in self.samples])


def _aligned_coords(A: EmpiricalMeasure, B: EmpiricalMeasure):
    if A.dim != B.dim:
        raise ValueError("dimension mismatch between measures")
    n = math.lcm(A.num_intervals, B.num_intervals)
    basis = AlgebraBasis(A.dim)

    def coords(M):
        if M.num_intervals == n:
            return M.coords(basis)
        from .path_space import refine
        return np.stack([to_coords(refine(s, n // M.num_intervals), basis)
                         for s in M.samples])

    return coords(A), coords(B)


def cost_matrix(A: EmpiricalMeasure, B: EmpiricalMeasure) -> np.ndarray:
    """Pairwise truncated L2 distances, (len(A), len(B))."""
    ca, cb = _aligned_coords(A, B)
    return np.minimum(cdist(ca, cb), 1.0)


def mk_exact(A: EmpiricalMeasure, B: EmpiricalMeasure) -> TransportReport:
    """Exact W1 between equal-size empirical measures via optimal assignment."""
    if len(A) != len(B):
        raise ValueError("exact solver needs equal sample sizes")
    if len(A) > EXACT_SOLVER_CAP:
        raise ValueError(f"sample size {len(A)} above exact-solver cap {EXACT_SOLVER_CAP}")
    M = cost_matrix(A, B)
    rows, cols = linear_sum_assignment(M)
    return TransportReport(method="exact-assignment",
                           value=float(M[rows, cols].mean()),
                           sample_size=len(A))


class SinkhornDivergence(RuntimeError):
    """Raised when the scaling iterations fail to meet the marginal tolerance."""


def mk_entropic(A: EmpiricalMeasure, B: EmpiricalMeasure, reg: float,
                iters: int = 10_000, marginal_tol: float = 1e-8) -> TransportReport:
    """Entropy-regularized transport cost via log-domain Sinkhorn scaling."""
    if reg <= 0:
        raise ValueError("reg must be positive")
    M = cost_matrix(A, B)
    na, nb = M.shape
    log_a = -math.log(na) * np.ones(na)
    log_b = -math.log(nb) * np.ones(nb)
    f = np.zeros(na)
    g = np.zeros(nb)
    total_it = 0
    # epsilon scaling: anneal the temperature down to reg, warm-starting the
    # potentials, which keeps the iteration count flat for small reg
    levels = [reg * 4.0 ** k for k in range(8, -1, -1) if reg * 4.0 ** k < 1.0] or [reg]
    if levels[-1] != reg:
        levels.append(reg)
    inner_tol = max(marginal_tol, 1e-6)
    for eps in levels:
        K = -M / eps
        for _ in range(iters):
            total_it += 1
            f = eps * log_a - eps * _lse(K + g[None, :] / eps, axis=1)
            g = eps * log_b - eps * _lse(K.T + f[None, :] / eps, axis=1)
            p = np.exp(K + f[:, None] / eps + g[None, :] / eps)
            err = max(np.abs(p.sum(axis=1) - 1.0 / na).sum(),
                      np.abs(p.sum(axis=0) - 1.0 / nb).sum())
            if err <= (inner_tol if eps == reg else 1e-4):
                break
    p = _round_to_marginals(p, np.full(na, 1.0 / na), np.full(nb, 1.0 / nb))
    err = max(np.abs(p.sum(axis=1) - 1.0 / na).sum(),
              np.abs(p.sum(axis=0) - 1.0 / nb).sum())
    if err > marginal_tol:
        raise SinkhornDivergence(
            f"marginal violation {err:.3e} above {marginal_tol:.1e} "
            f"after {total_it} iterations")
    return TransportReport(method="entropic", value=float((p * M).sum()),
                           sample_size=na, reg=reg, iterations=total_it)


def _round_to_marginals(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Project a near-feasible plan onto the transport polytope.

    Rows and columns are scaled down where they overshoot, then the
    remaining mass deficit is restored by a rank-one correction; the
    cost changes by at most the starting marginal violation.
    """
    p = p * np.minimum(a / np.maximum(p.sum(axis=1), 1e-300), 1.0)[:, None]
    p = p * np.minimum(b / np.maximum(p.sum(axis=0), 1e-300), 1.0)[None, :]
    da = a - p.sum(axis=1)
    db = b - p.sum(axis=0)
    deficit = da.sum()
    if deficit > 0:
        p = p + np.outer(da, db) / deficit
    return p


def _lse(x: np.ndarray, axis: int) -> np.ndarray:
    m = x.max(axis=axis, keepdims=True)
    return (m + np.log(np.exp(x - m).sum(axis=axis, keepdims=True))).squeeze(axis)


class LipschitzViolation(ValueError):
    pass


def witness_gap(A: EmpiricalMeasure, B: EmpiricalMeasure, witnesses,
                check_pairs: int = 1000, seed: int = 0) -> TransportReport:
    """Dual lower bound max_F |mean_A F - mean_B F| over verified witnesses.

    Each witness must be 1-Lipschitz for the truncated metric and bounded by
    one in absolute value; both are spot-checked on random sample pairs
    before the gap is trusted.
    """
    if not witnesses:
        raise ValueError("need at least one witness")
    from .path_space import truncated_distance
    rng = np.random.default_rng(seed)
    pool = list(A.samples) + list(B.samples)
    idx = rng.integers(0, len(pool), size=(check_pairs, 2))
    for w_i, F in enumerate(witnesses):
        vals = {}
        for i, j in idx:
            vi = vals.setdefault(i, F(pool[i]))
            vj = vals.setdefault(j, F(pool[j]))
            if abs(vi) > 1.0 + 1e-9 or abs(vj) > 1.0 + 1e-9:
                raise LipschitzViolation(f"witness {w_i} exceeds the unit bound")
            if abs(vi - vj) > truncated_distance(pool[i], pool[j]) + 1e-9:
                raise LipschitzViolation(f"witness {w_i} violates 1-Lipschitz check")
    gap = 0.0
    for F in witnesses:
        ma = float(np.mean([F(s) for s in A.samples]))
        mb = float(np.mean([F(s) for s in B.samples]))
        gap = max(gap, abs(ma - mb))
    return TransportReport(method="witness-lower-bound", value=gap,
                           sample_size=len(A), witness_count=len(witnesses),
                           seed=seed)


def anchor_witness(c: StepPath):
    """The 1-Lipschitz functional f -> min(||f - c||, 1)."""
    from .path_space import truncated_distance

    def F(f: StepPath) -> float:
        return truncated_distance(f, c)

    return F


def twisted_alignment(f: StepPath, g: StepPath,
                      table=None) -> StepPath:
    """The step path with values Ad_{holonomy_i} g_i, the partner in the angle."""
    if table is None:
        table = partial_products(f)
    p = table.products[:-1]
    return StepPath(p @ g.values @ p.transpose(0, 2, 1))


def angle_statistic(f: StepPath, g: StepPath) -> float:
    """Angle in [0, pi] between f and the holonomy-twisted copy of g."""
    nf, ng = l2_norm(f), l2_norm(g)
    if nf == 0.0 or ng == 0.0:
        raise ValueError("angle undefined for zero-norm input")
    h = twisted_alignment(f, g)
    cosine = l2_inner(f, h) / (nf * ng)  # the twist is an isometry, ||h|| = ||g||
    return float(np.arccos(np.clip(cosine, -1.0, 1.0)))


def angle_statistics_batch(values: np.ndarray, g: StepPath) -> np.ndarray:
    """Angles for a batch (b, N, 3, 3) of so(3) step paths against one g."""
    b, n = values.shape[:2]
    tables = partial_products_batch(values)[:, :-1]  # (b, N, 3, 3)
    h = tables @ g.values[None] @ tables.transpose(0, 1, 3, 2)
    inner = np.sum(values * h, axis=(1, 2, 3)) / n
    nf = np.sqrt(np.sum(values ** 2, axis=(1, 2, 3)) / n)
    ng = l2_norm(g)
    return np.arccos(np.clip(inner / (nf * ng), -1.0, 1.0))


def escape_fraction(spec: MeasureSpec, g: StepPath, count: int) -> float:
    """Fraction of ball samples whose twisted translate leaves the ball."""
    if g.num_intervals != spec.n or g.dim != spec.dim:
        raise ValueError("g must live on the spec's partition")
    basis = AlgebraBasis(spec.dim)
    coords = sample_ball_coords(spec, count)
    dk = basis.algebra_dim
    values = basis.matrix(coords.reshape(count, spec.n, dk) * math.sqrt(spec.n))
    if spec.dim == 3:
        tables = partial_products_batch(values)[:, :-1]
        h = tables @ g.values[None] @ tables.transpose(0, 1, 3, 2)
        phi = values + h
        norms = np.sqrt(np.sum(phi ** 2, axis=(1, 2, 3)) / spec.n)
    else:
        norms = np.array([l2_norm(star_phi(StepPath(v), g)) for v in values])
    return float(np.mean(norms > spec.radius))


def volume_ratio(n: int, radius: float, eps: float, C: float,
                 algebra_dim: int = 3) -> float:
    """Volume of the (R + C eps)-ball over the R-ball in dimension d_k * N."""
    if radius <= 0 or eps < 0:
        raise ValueError("radius must be positive and eps nonnegative")
    return float((1.0 + C * eps / radius) ** (algebra_dim * n))
