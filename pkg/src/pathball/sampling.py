"""Reproducible uniform sampling from balls of step paths.

Each trial draws from its own counter-based Philox stream, keyed by mixing
the spec seed with the trial index through splitmix64.  Samples are therefore
independent of how trials are partitioned across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .lie_core import AlgebraBasis
from .path_space import StepPath, from_coords

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 scrambling round; the documented (seed, trial) mixer."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_key(seed: int, trial: int) -> int:
    return splitmix64(splitmix64(seed & _MASK64) ^ (trial & _MASK64))


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Counter-based generator for one trial, order-independent by design."""
    return np.random.Generator(np.random.Philox(key=trial_key(seed, trial)))


@dataclass(frozen=True)
class MeasureSpec:
    """Parameters of the normalized uniform measure on a radius-R ball."""

    n: int
    radius: float
    dim: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")

    @property
    def euclidean_dim(self) -> int:
        return self.n * self.dim * (self.dim - 1) // 2


@dataclass(frozen=True)
class RadiusSchedule:
    """Radius rule R_N = scale * N**exponent with 1/2 < exponent < 1.

    The exponent window makes the radii grow faster than sqrt(N) but slower
    than N, the regime in which the ball measures become asymptotically
    right-invariant.
    """

    exponent: float = 0.75
    scale: float = 1.0

    def __post_init__(self):
        if not 0.5 < self.exponent < 1.0:
            raise ValueError("exponent must lie strictly between 1/2 and 1")
        if self.scale <= 0:
            raise ValueError("scale must be positive")


def radius_for(schedule: RadiusSchedule, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return schedule.scale * n ** schedule.exponent


def sample_ball_coords(spec: MeasureSpec, count: int, start: int = 0,
                       workers: int = 1) -> np.ndarray:
    """Uniform samples from the radius-R ball, as (count, N*d_k) coordinates.

    Gaussian direction times a Beta-law radius R * u**(1/dim); exact in any
    dimension and O(dim) per sample.  Trial k (global index start + k) is a
    pure function of (spec.seed, k), so worker count never changes results.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    dim = spec.euclidean_dim

    def one(trial: int) -> np.ndarray:
        rng = trial_generator(spec.seed, trial)
        z = rng.standard_normal(dim)
        u = rng.random()
        r = spec.radius * u ** (1.0 / dim)
        return z * (r / np.linalg.norm(z))

    trials = range(start, start + count)
    if workers <= 1:
        rows = [one(k) for k in trials]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, trials))
    return np.stack(rows)


def sample_ball(spec: MeasureSpec, count: int, start: int = 0,
                workers: int = 1) -> list[StepPath]:
    """Uniform StepPath samples from the ball; see :func:`sample_ball_coords`."""
    basis = AlgebraBasis(spec.dim)
    coords = sample_ball_coords(spec, count, start=start, workers=workers)
    return [from_coords(c, spec.n, basis) for c in coords]
