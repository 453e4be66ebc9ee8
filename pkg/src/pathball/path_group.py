"""Group structure on step paths: product integrals, twisted product, inverse.

The product integral of a step path is the ordered product of interval
exponentials; its table of values at the partition points is the
piecewise-constant holonomy used by the twisted product

    (f * g)(t) = f(t) + Ad_{P_f(t)} g(t),

where P_f(t) is the product integral of f up to time t.  For step inputs the
product generally leaves the step space, so it is exposed as a lazy pointwise
evaluator; projections back onto a finer partition are explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lie_core import adjoint, exp_matrix, exp_so3_batch
from .path_space import StepPath, _check_compatible, l2_norm, sup_norm


@dataclass(frozen=True)
class PartialProductTable:
    """Values of the product integral at the partition points i/N.

    products[i] is the ordered product exp(f_{i-1}/N) ... exp(f_0/N), so
    products[0] is the identity.  The piecewise-constant holonomy takes the
    value products[i] on [i/N, (i+1)/N).
    """

    products: np.ndarray = field(repr=False)  # (N+1, d, d)

    @property
    def num_intervals(self) -> int:
        return self.products.shape[0] - 1

    def at_time(self, t: float) -> np.ndarray:
        """Piecewise-constant value on [i/N, (i+1)/N); t=1 uses the last interval."""
        n = self.num_intervals
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t={t} outside [0, 1]")
        return self.products[min(int(t * n), n - 1)]


def partial_products(f: StepPath) -> PartialProductTable:
    """Build the table of partial product integrals in N exponentials."""
    n, d = f.num_intervals, f.dim
    out = np.empty((n + 1, d, d))
    out[0] = np.eye(d)
    if d == 3:
        steps = exp_so3_batch(f.values / n)
    else:
        steps = np.stack([exp_matrix(v / n) for v in f.values])
    for i in range(n):
        out[i + 1] = steps[i] @ out[i]
    return PartialProductTable(out)


def partial_products_batch(values: np.ndarray) -> np.ndarray:
    """Partial products for a batch of so(3) step paths.

    values is (b, N, 3, 3); returns (b, N+1, 3, 3).  The loop is over
    intervals only, so large batches stay vectorized.
    """
    b, n = values.shape[:2]
    out = np.empty((b, n + 1, 3, 3))
    out[:, 0] = np.eye(3)
    steps = exp_so3_batch(values.reshape(b * n, 3, 3) / n).reshape(b, n, 3, 3)
    for i in range(n):
        out[:, i + 1] = steps[:, i] @ out[:, i]
    return out


def product_integral(f: StepPath, t: float,
                     table: PartialProductTable | None = None) -> np.ndarray:
    """Ordered exponential of f from 0 to t.

    Within interval j the value is exp((t - j/N) f_j) times the partial
    product up to j/N.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t} outside [0, 1]")
    n = f.num_intervals
    j = f.interval_of(t)
    if table is None:
        base = np.eye(f.dim)
        for i in range(j):
            base = exp_matrix(f.values[i] / n) @ base
    else:
        base = table.products[j]
    return exp_matrix((t - j / n) * f.values[j]) @ base


class StarResultEvaluator:
    """Lazy pointwise view of a product in the twisted group.

    Exposes value(t), the algebra-valued function, and holonomy(t), its
    product integral.  The holonomy of a product is the pointwise matrix
    product of the factor holonomies, which is exactly the integrated form
    of the logarithmic-derivative cocycle identity.
    """

    def value(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def holonomy(self, t: float) -> np.ndarray:
        raise NotImplementedError


class StepElement(StarResultEvaluator):
    def __init__(self, f: StepPath):
        self.path = f
        self.table = partial_products(f)
        self._cache: dict[float, np.ndarray] = {}

    def value(self, t):
        return self.path(t)

    def holonomy(self, t):
        # grid sweeps hit the same t from several nested products
        hit = self._cache.get(t)
        if hit is None:
            hit = self._cache[t] = product_integral(self.path, t, self.table)
        return hit


class StarElement(StarResultEvaluator):
    def __init__(self, left: StarResultEvaluator, right: StarResultEvaluator):
        self.left = left
        self.right = right

    def value(self, t):
        return self.left.value(t) + adjoint(self.left.holonomy(t), self.right.value(t))

    def holonomy(self, t):
        return self.left.holonomy(t) @ self.right.holonomy(t)


def star(left, right) -> StarElement:
    if isinstance(left, StepPath):
        left = StepElement(left)
    if isinstance(right, StepPath):
        right = StepElement(right)
    return StarElement(left, right)


def star_pointwise(f: StepPath, g: StepPath, t: float,
                   table: PartialProductTable | None = None) -> np.ndarray:
    """(f * g)(t) = f(t) + Ad_{P_f(t)} g(t)."""
    _check_compatible(f, g)
    if table is None:
        table = partial_products(f)
    return f(t) + adjoint(product_integral(f, t, table), g(t))


def star_phi(f: StepPath, g: StepPath,
             table: PartialProductTable | None = None) -> StepPath:
    """The step-space surrogate f + Ad_{holonomy} g.

    The holonomy is frozen at the left endpoint of each interval, which keeps
    the result on the same partition.
    """
    _check_compatible(f, g)
    if table is None:
        table = partial_products(f)
    p = table.products[:-1]  # holonomy value on interval i is products[i]
    return StepPath(f.values + p @ g.values @ p.transpose(0, 2, 1))


def inverse(f: StepPath, table: PartialProductTable | None = None) -> StepPath:
    """Group inverse: -Ad_{holonomy^{-1}} f, again a step path.

    Freezing the holonomy at interval endpoints is exact here because each
    value commutes with its own interval exponential.
    """
    if table is None:
        table = partial_products(f)
    p = table.products[:-1]
    return StepPath(-(p.transpose(0, 2, 1) @ f.values @ p))


def star_discretized(f: StepPath, g: StepPath, m: int) -> StepPath:
    """Project f * g onto the m-times finer partition by midpoint sampling."""
    if m < 1:
        raise ValueError("refinement multiple must be >= 1")
    _check_compatible(f, g)
    n, d = f.num_intervals, f.dim
    table = partial_products(f)
    f_rep = np.repeat(f.values, m, axis=0)
    g_rep = np.repeat(g.values, m, axis=0)
    # holonomy at the refined-interval midpoints
    offsets = (np.arange(m * n) % m + 0.5) / (m * n)  # t_mid - j/n per slot
    if d == 3:
        loc = exp_so3_batch(offsets[:, None, None] * f_rep)
    else:
        loc = np.stack([exp_matrix(o * v) for o, v in zip(offsets, f_rep)])
    hol = loc @ np.repeat(table.products[:-1], m, axis=0)
    fine = f_rep + hol @ g_rep @ hol.transpose(0, 2, 1)
    return StepPath(fine)


def correction_norm(f: StepPath, g: StepPath, quad_points: int = 32) -> float:
    """L2 norm of Ad_{P_f} g minus its interval-frozen surrogate.

    Composite midpoint quadrature with quad_points nodes per interval; the
    integrand is smooth inside each interval.
    """
    if quad_points < 1:
        raise ValueError("quad_points must be >= 1")
    _check_compatible(f, g)
    n, d = f.num_intervals, f.dim
    table = partial_products(f)
    s = (np.arange(quad_points) + 0.5) / (quad_points * n)  # offsets within one interval
    total = 0.0
    for i in range(n):
        if d == 3:
            loc = exp_so3_batch(s[:, None, None] * f.values[i])
        else:
            loc = np.stack([exp_matrix(si * f.values[i]) for si in s])
        r = loc @ table.products[i]          # exact holonomy at the nodes
        rho = table.products[i]              # frozen holonomy
        diff = r @ g.values[i] @ r.transpose(0, 2, 1) - rho @ g.values[i] @ rho.T
        total += np.sum(diff ** 2) / (quad_points * n)
    return math.sqrt(total)


def correction_bound(f: StepPath, g: StepPath) -> float:
    """Analytic bound 2 ||g||_sup ||f||_2 / N on the frozen-holonomy error."""
    return 2.0 * sup_norm(g) * l2_norm(f) / f.num_intervals


def log_derivative_numeric(path, t: float, h: float = 1e-5) -> np.ndarray:
    """Central-difference right logarithmic derivative of a group-valued path.

    path maps [0,1] to rotation matrices; the estimate (path(t+h) -
    path(t-h)) / 2h  * path(t)^{-1} is skew-symmetrized to suppress drift
    off the algebra.
    """
    if not (0.0 < t - h and t + h < 1.0):
        raise ValueError(f"[t-h, t+h] must sit inside (0, 1); t={t}, h={h}")
    vel = (np.asarray(path(t + h), float) - np.asarray(path(t - h), float)) / (2.0 * h)
    A = vel @ np.asarray(path(t), float).T
    return 0.5 * (A - A.T)
