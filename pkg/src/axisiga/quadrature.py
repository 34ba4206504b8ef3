"""Gauss-Legendre quadrature and per-element rules with cylindrical weight.

Nodes are computed as roots of the Legendre polynomial by Newton iteration
started from Chebyshev guesses; rules are cached per order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class QuadratureError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureRule1D:
    """Gauss-Legendre rule on (-1, 1): exact for degree <= 2n-1."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def mapped(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights transplanted to the interval [a, b]."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


def _legendre_and_deriv(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> QuadratureRule1D:
    """Gauss-Legendre rule with n points on (-1, 1)."""
    if not (1 <= n <= 30):
        raise QuadratureError(f"order {n} outside supported range [1, 30]")
    if n == 1:
        return QuadratureRule1D(1, np.zeros(1), np.full(1, 2.0))
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_deriv(n, x)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    p, dp = _legendre_and_deriv(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    idx = np.argsort(x)
    x, w = x[idx], w[idx]
    # kill roundoff asymmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return QuadratureRule1D(n, x, w)


@dataclass(frozen=True)
class ElementRule2D:
    """Tensor quadrature on one parametric element, with physical metadata.

    ``weights`` already include both 1D Gauss weights, the element scaling,
    |det J_F| and the cylindrical factor rho, so a weighted-L2_rho integral
    is simply ``sum(f(points) * weights)``.
    """

    element: tuple[tuple[float, float], tuple[float, float]]
    points: np.ndarray        # (nq, 2) parametric
    phys_points: np.ndarray   # (nq, 2) physical (rho, z)
    jacobians: np.ndarray     # (nq, 2, 2)
    dets: np.ndarray          # (nq,)
    weights: np.ndarray       # (nq,) includes rho * |det J|
    param_weights: np.ndarray  # (nq,) parametric measure only


def build_element_rule(geometry, element, n: int) -> ElementRule2D:
    """Quadrature rule for the weighted measure rho drho dz on one element.

    Parameters
    ----------
    geometry : NurbsGeometry
        Cross-section map F; must be regular (det J_F > 0) on the element.
    element : ((a1, b1), (a2, b2))
        Parametric bounds of the Bezier element.
    n : int
        Gauss points per direction.
    """
    (a1, b1), (a2, b2) = element
    rule = gauss_legendre(n)
    x1, w1 = rule.mapped(a1, b1)
    x2, w2 = rule.mapped(a2, b2)
    P1, P2 = np.meshgrid(x1, x2, indexing="ij")
    W = np.outer(w1, w2).ravel()
    pts = np.column_stack([P1.ravel(), P2.ravel()])
    nq = len(pts)
    phys = np.zeros((nq, 2))
    jacs = np.zeros((nq, 2, 2))
    dets = np.zeros(nq)
    for q, (u, v) in enumerate(pts):
        phys[q] = geometry.map_point(u, v)
        J, d = geometry.jacobian(u, v)
        jacs[q] = J
        dets[q] = d
    if np.any(dets <= 0.0):
        raise QuadratureError("non-positive Jacobian determinant at a quadrature node")
    rho = phys[:, 0]
    if np.any(rho < -1e-12):
        raise QuadratureError("negative rho at a quadrature node")
    rho = np.maximum(rho, 0.0)
    return ElementRule2D(
        element=((a1, b1), (a2, b2)),
        points=pts,
        phys_points=phys,
        jacobians=jacs,
        dets=dets,
        weights=W * dets * rho,
        param_weights=W,
    )
