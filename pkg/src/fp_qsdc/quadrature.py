"""Deterministic tensor-product Gauss-Legendre quadrature.

All integration in this package runs through the helpers below.  Nodes are
strictly interior, so integrands with inverse-square-root endpoint
singularities are never evaluated on the singular boundary; when the caller
declares such an endpoint, the axis is remapped with ``x = lo + (hi-lo)
sin^2(u)``, which absorbs the singularity into the Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

_LEGGAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


class QuadratureError(RuntimeError):
    """Raised when dyadic refinement fails to converge.

    Carries the last two estimates so callers can inspect the residual.
    """

    def __init__(self, message: str, estimates: tuple[float, float]):
        super().__init__(f"{message} (last estimates: {estimates[0]!r}, {estimates[1]!r})")
        self.estimates = estimates


@dataclass(frozen=True)
class QuadratureSpec:
    """Node budget and convergence target for one integral."""

    nodes: int = 32
    rel_tol: float = 1e-7
    max_refinements: int = 4

    def __post_init__(self):
        if self.nodes < 8:
            raise ValueError("nodes must be >= 8")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.max_refinements < 0:
            raise ValueError("max_refinements must be >= 0")


@dataclass(frozen=True)
class Integrand2D:
    """A real integrand g(x, y) on a rectangle.

    ``func`` must accept broadcastable arrays.  ``sqrt_singular_hi_x`` marks
    an inverse-square-root singularity at the upper x endpoint (the only kind
    produced by the passive-source density).
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    sqrt_singular_hi_x: bool = False


def leggauss_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on (-1, 1), cached."""
    if n not in _LEGGAUSS_CACHE:
        _LEGGAUSS_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _LEGGAUSS_CACHE[n]


def axis_nodes(n: int, lo: float, hi: float,
               singular_hi: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Interior nodes and weights for one axis of a tensor rule.

    With ``singular_hi`` the axis is reparametrized as
    ``x = lo + (hi-lo) sin^2(u)``; the Jacobian ``(hi-lo) sin(2u)`` vanishes at
    the upper endpoint and cancels an inverse-square-root divergence there.
    """
    x, w = leggauss_nodes(n)
    if not singular_hi:
        return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w
    u = 0.25 * np.pi * (x + 1.0)
    wu = 0.25 * np.pi * w
    s, c = np.sin(u), np.cos(u)
    return lo + (hi - lo) * s * s, wu * (hi - lo) * 2.0 * s * c


def _estimate_2d(g: Integrand2D, n: int) -> float:
    xs, wx = axis_nodes(n, *g.x_range, singular_hi=g.sqrt_singular_hi_x)
    ys, wy = axis_nodes(n, *g.y_range)
    vals = g.func(xs[:, None], ys[None, :])
    return float(wx @ vals @ wy)


def refine_until(g: Integrand2D, spec: QuadratureSpec = QuadratureSpec()
                 ) -> tuple[float, float]:
    """Integrate with dyadic node doubling until the estimate stabilizes.

    Returns ``(value, achieved)`` where ``achieved`` is the relative change of
    the final refinement step.  Raises :class:`QuadratureError` if the target
    is still missed after ``max_refinements`` doublings.
    """
    (xlo, xhi), (ylo, yhi) = g.x_range, g.y_range
    if xhi <= xlo or yhi <= ylo:
        return 0.0, 0.0
    n = spec.nodes
    prev = _estimate_2d(g, n)
    if spec.max_refinements == 0:
        return prev, np.inf
    cur = prev
    for _ in range(spec.max_refinements):
        n *= 2
        prev = cur
        cur = _estimate_2d(g, n)
        delta = abs(cur - prev) / max(abs(cur), 1e-300)
        if delta <= spec.rel_tol:
            return cur, delta
    raise QuadratureError(
        f"no convergence to rel_tol={spec.rel_tol} after "
        f"{spec.max_refinements} refinements", (prev, cur))


def integrate_2d(g: Integrand2D, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Tensor Gauss-Legendre integral of ``g`` over its rectangle."""
    value, _ = refine_until(g, spec)
    return value


def refine_vector(estimator: Callable[[int], np.ndarray],
                  spec: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Dyadic refinement of a batch of coupled integrals.

    ``estimator(nodes)`` must return the full result vector computed on one
    shared grid; refining jointly keeps ratios of the components consistent,
    which the interval averages rely on.  Convergence requires every
    component's relative change to drop below the tolerance (with an absolute
    floor of ``rel_tol`` for components near zero).
    """
    n = spec.nodes
    prev = np.asarray(estimator(n), dtype=float)
    if spec.max_refinements == 0:
        return prev
    cur = prev
    for _ in range(spec.max_refinements):
        n *= 2
        prev = cur
        cur = np.asarray(estimator(n), dtype=float)
        delta = np.abs(cur - prev) / np.maximum(np.abs(cur), 1.0)
        if float(delta.max()) <= spec.rel_tol:
            return cur
    raise QuadratureError(
        f"vector refinement missed rel_tol={spec.rel_tol} after "
        f"{spec.max_refinements} refinements",
        (float(prev.flat[int(np.argmax(delta))]), float(cur.flat[int(np.argmax(delta))])))
