"""Step functions on the uniform partition of [0, 1) with values in the algebra.

A :class:`StepPath` holds N skew matrices, the value on [i/N, (i+1)/N).  The
L2 structure is the integral of the Frobenius pairing, i.e. the average of
the per-interval pairings.  The coordinate map sends a path to the
sqrt(1/N)-scaled basis coordinates of its values, a linear isometry onto
Euclidean space of dimension N * d(d-1)/2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .lie_core import AlgebraBasis, require_skew


class PartitionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class StepPath:
    """An algebra-valued step function on the uniform N-partition."""

    values: np.ndarray = field(repr=False)  # (N, d, d), each skew-symmetric

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3 or v.shape[1] != v.shape[2]:
            raise ValueError(f"values must be (N, d, d), got {v.shape}")
        if v.shape[0] < 1:
            raise ValueError("need at least one interval")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def num_intervals(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def validate(self, tol: float = 1e-12) -> "StepPath":
        for v in self.values:
            require_skew(v, tol)
        return self

    def interval_of(self, t: float) -> int:
        """Index of the half-open interval [i/N, (i+1)/N) containing t.

        t = 1 is folded into the last interval.
        """
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t={t} outside [0, 1]")
        return min(int(t * self.num_intervals), self.num_intervals - 1)

    def __call__(self, t: float) -> np.ndarray:
        return self.values[self.interval_of(t)]

    @staticmethod
    def zero(n: int, dim: int) -> "StepPath":
        return StepPath(np.zeros((n, dim, dim)))

    @staticmethod
    def constant(X, n: int = 1) -> "StepPath":
        X = np.asarray(X, float)
        return StepPath(np.broadcast_to(X, (n,) + X.shape).copy())


@dataclass(frozen=True)
class BallSpec:
    """Radius-R ball in the space of step paths on the N-partition."""

    n: int
    radius: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.radius <= 0:
            raise ValueError("radius must be positive")


def _check_compatible(f: StepPath, g: StepPath):
    if f.dim != g.dim:
        raise PartitionMismatch(f"dims {f.dim} and {g.dim} differ")
    if f.num_intervals != g.num_intervals:
        raise PartitionMismatch(
            f"partitions {f.num_intervals} and {g.num_intervals} differ; refine first")


def l2_inner(f: StepPath, g: StepPath) -> float:
    """(1/N) sum_i tr(f_i^T g_i), the L2 pairing of the step functions."""
    _check_compatible(f, g)
    return float(np.sum(f.values * g.values)) / f.num_intervals


def l2_norm(f: StepPath) -> float:
    return math.sqrt(l2_inner(f, f))


def sup_norm(f: StepPath) -> float:
    """max_i of the per-interval Hilbert-Schmidt norms."""
    return float(np.linalg.norm(f.values, axis=(1, 2)).max())


def refine(f: StepPath, m: int) -> StepPath:
    """Embed into the m-times finer partition by repeating each value."""
    if m < 1:
        raise ValueError("refinement multiple must be >= 1")
    if m == 1:
        return f
    return StepPath(np.repeat(f.values, m, axis=0))


def common_refinement(f: StepPath, g: StepPath) -> tuple[StepPath, StepPath]:
    """Refine both paths to the least common multiple of their partitions."""
    n = math.lcm(f.num_intervals, g.num_intervals)
    return refine(f, n // f.num_intervals), refine(g, n // g.num_intervals)


def truncated_distance(f: StepPath, g: StepPath) -> float:
    """min(||f - g||_2, 1), the ground metric for mass transport."""
    f, g = common_refinement(f, g)
    d = math.sqrt(float(np.sum((f.values - g.values) ** 2)) / f.num_intervals)
    return min(d, 1.0)


def to_coords(f: StepPath, basis: AlgebraBasis | None = None) -> np.ndarray:
    """Isometric coordinates: flat array of length N * d_k.

    Block i holds sqrt(1/N) times the basis coordinates of value i, so the
    Euclidean norm of the output equals the L2 norm of the path.
    """
    basis = basis or AlgebraBasis(f.dim)
    c = basis.coords(f.values) / math.sqrt(f.num_intervals)
    return c.reshape(-1)


def from_coords(coords: np.ndarray, n: int, basis: AlgebraBasis) -> StepPath:
    coords = np.asarray(coords, float)
    dk = basis.algebra_dim
    if coords.size != n * dk:
        raise ValueError(f"expected {n * dk} coordinates, got {coords.size}")
    c = coords.reshape(n, dk) * math.sqrt(n)
    return StepPath(basis.matrix(c))


def to_json(f: StepPath) -> str:
    basis = AlgebraBasis(f.dim)
    return json.dumps({
        "dim": f.dim,
        "N": f.num_intervals,
        "coords": to_coords(f, basis).tolist(),
    })


def from_json(text: str) -> StepPath:
    obj = json.loads(text)
    basis = AlgebraBasis(int(obj["dim"]))
    return from_coords(np.array(obj["coords"], float), int(obj["N"]), basis)
