"""Univariate and tensor-product B-spline / NURBS basis machinery.

Knot vectors are open (first and last knot repeated ``p+1`` times) on the
parametric interval [0, 1].  Evaluation uses the Cox-DeBoor recursion with
the 0/0 = 0 convention; the right endpoint x = 1 is evaluated by left limit
so the last basis function equals 1 there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class SplineError(ValueError):
    """Invalid knot vector, degree, or evaluation request."""


@dataclass(frozen=True)
class KnotVector:
    """Open knot vector described by breakpoints and multiplicities.

    Parameters
    ----------
    degree : int
        Polynomial degree p >= 0.
    breakpoints : array
        Strictly increasing, spanning [0, 1].
    multiplicities : array of int
        One entry per breakpoint.  End multiplicities must equal p+1;
        interior multiplicities satisfy 1 <= r_i <= p+1 (r_i = p+1 gives a
        discontinuous basis, regularity -1, which is legal for L2-type
        factor spaces).
    """

    degree: int
    breakpoints: np.ndarray
    multiplicities: np.ndarray
    knots: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = self.degree
        zeta = np.ascontiguousarray(np.asarray(self.breakpoints, dtype=float))
        mult = np.ascontiguousarray(np.asarray(self.multiplicities, dtype=int))
        if p < 0:
            raise SplineError("degree must be non-negative")
        if zeta.ndim != 1 or zeta.size < 2:
            raise SplineError("need at least two breakpoints")
        if not np.all(np.diff(zeta) > 0.0):
            raise SplineError("breakpoints must be strictly increasing")
        if abs(zeta[0]) > 0 or abs(zeta[-1] - 1.0) > 0:
            raise SplineError("breakpoints must span [0, 1]")
        if mult.shape != zeta.shape:
            raise SplineError("one multiplicity per breakpoint required")
        if mult[0] != p + 1 or mult[-1] != p + 1:
            raise SplineError("end multiplicities must equal degree + 1")
        if np.any(mult[1:-1] < 1) or np.any(mult[1:-1] > p + 1):
            raise SplineError("interior multiplicities must lie in [1, degree+1]")
        object.__setattr__(self, "breakpoints", zeta)
        object.__setattr__(self, "multiplicities", mult)
        object.__setattr__(self, "knots", np.repeat(zeta, mult))

    @classmethod
    def uniform(cls, degree: int, num_elements: int) -> "KnotVector":
        """Maximally smooth knot vector with ``num_elements`` equal elements."""
        if num_elements < 1:
            raise SplineError("need at least one element")
        zeta = np.linspace(0.0, 1.0, num_elements + 1)
        mult = np.full(num_elements + 1, 1, dtype=int)
        mult[0] = mult[-1] = degree + 1
        return cls(degree, zeta, mult)

    @property
    def num_basis(self) -> int:
        """n = sum of multiplicities - (p+1)."""
        return int(self.multiplicities.sum()) - (self.degree + 1)

    @property
    def regularities(self) -> np.ndarray:
        """Per-breakpoint regularity alpha_i = p - r_i."""
        return self.degree - self.multiplicities

    @property
    def element_sizes(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def quasi_uniformity(self) -> float:
        """Largest ratio between adjacent element sizes (recorded, not enforced)."""
        h = self.element_sizes
        if h.size == 1:
            return 1.0
        r = h[1:] / h[:-1]
        return float(max(r.max(), (1.0 / r).max()))


def _find_span(knots: np.ndarray, p: int, n: int, x: float) -> int:
    """Index i with knots[i] <= x < knots[i+1], left limit at the right end."""
    if x >= knots[n]:
        return n - 1
    if x <= knots[p]:
        return p
    return int(np.searchsorted(knots, x, side="right")) - 1


def _basis_funs(knots: np.ndarray, p: int, span: int, x: float) -> np.ndarray:
    """Cox-DeBoor triangle: the p+1 possibly-nonzero values at x."""
    vals = np.zeros(p + 1)
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
    vals[0] = 1.0
    for j in range(1, p + 1):
        left[j] = x - knots[span + 1 - j]
        right[j] = knots[span + j] - x
        saved = 0.0
        for r in range(j):
            denom = right[r + 1] + left[j - r]
            temp = vals[r] / denom if denom != 0.0 else 0.0
            vals[r] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        vals[j] = saved
    return vals


class SplineSpace1D:
    """Span of the n B-splines generated by an open knot vector."""

    def __init__(self, knot_vector: KnotVector):
        self.kv = knot_vector
        self.degree = knot_vector.degree
        self.num_basis = knot_vector.num_basis
        self.knots = knot_vector.knots
        self.breakpoints = knot_vector.breakpoints

    @property
    def elements(self) -> np.ndarray:
        """Array of shape (num_elements, 2) with element bounds."""
        z = self.breakpoints
        return np.column_stack([z[:-1], z[1:]])

    @property
    def num_elements(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def h(self) -> float:
        return float(self.kv.element_sizes.max())

    def _check_x(self, x: float) -> None:
        if not (0.0 <= x <= 1.0):
            raise SplineError(f"evaluation point {x} outside [0, 1]")

    def eval_basis(self, x: float) -> tuple[int, np.ndarray]:
        """Values of the p+1 possibly-nonzero basis functions at x.

        Returns the index of the first of them together with the values.
        """
        self._check_x(x)
        p = self.degree
        span = _find_span(self.knots, p, self.num_basis, x)
        return span - p, _basis_funs(self.knots, p, span, x)

    def eval_basis_deriv(self, x: float, order: int = 1) -> tuple[int, np.ndarray]:
        """First derivatives of the p+1 local basis functions at x."""
        if order != 1:
            raise SplineError("only first derivatives are supported")
        self._check_x(x)
        p = self.degree
        if p == 0:
            span = _find_span(self.knots, p, self.num_basis, x)
            return span, np.zeros(1)
        span = _find_span(self.knots, p, self.num_basis, x)
        low = _basis_funs(self.knots, p - 1, span, x)  # indices span-p+1 .. span
        ders = np.zeros(p + 1)
        for k, i in enumerate(range(span - p, span + 1)):
            a = 0.0
            if i >= span - p + 1:
                d = self.knots[i + p] - self.knots[i]
                if d > 0.0:
                    a = low[i - (span - p + 1)] / d
            b = 0.0
            if i + 1 <= span:
                d = self.knots[i + p + 1] - self.knots[i + 1]
                if d > 0.0:
                    b = low[i - (span - p)] / d
            ders[k] = p * (a - b)
        return span - p, ders

    def eval_field(self, coeffs: np.ndarray, xs: np.ndarray) -> np.ndarray:
        """Evaluate sum_i c_i B_i at the given points."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        out = np.zeros(xs.shape)
        for q, x in enumerate(xs):
            first, vals = self.eval_basis(x)
            out[q] = vals @ coeffs[first : first + self.degree + 1]
        return out

    def collocation_matrix(self, xs: np.ndarray, deriv: bool = False) -> sp.csr_matrix:
        """Sparse matrix of basis (or derivative) values at the given points."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        rows, cols, vals = [], [], []
        for q, x in enumerate(xs):
            first, v = (self.eval_basis_deriv(x) if deriv else self.eval_basis(x))
            for j, val in enumerate(v):
                rows.append(q)
                cols.append(first + j)
                vals.append(val)
        return sp.csr_matrix((vals, (rows, cols)), shape=(len(xs), self.num_basis))


def make_knot_vector(breakpoints, degree: int, multiplicities) -> KnotVector:
    return KnotVector(degree, np.asarray(breakpoints, float), np.asarray(multiplicities, int))


def reduce_degree_regularity(space: SplineSpace1D) -> SplineSpace1D:
    """The derivative space: same breakpoints, degree p-1, regularity alpha-1.

    Interior multiplicities are kept, so every d/dx image of the input space
    is exactly representable in the output space.
    """
    kv = space.kv
    p = kv.degree
    if p < 1:
        raise SplineError("cannot reduce a degree-0 space")
    if np.any(kv.regularities[1:-1] < 0):
        raise SplineError("input space is discontinuous; derivative space undefined")
    mult = kv.multiplicities.copy()
    mult[0] = mult[-1] = p
    return SplineSpace1D(KnotVector(p - 1, kv.breakpoints, mult))


def refine_uniform(space: SplineSpace1D, k: int) -> SplineSpace1D:
    """Split every element into k equal parts; inserted knots have multiplicity 1."""
    if k < 1:
        raise SplineError("subdivision factor must be >= 1")
    kv = space.kv
    new_z = [kv.breakpoints[0]]
    new_m = [kv.multiplicities[0]]
    for i in range(len(kv.breakpoints) - 1):
        a, b = kv.breakpoints[i], kv.breakpoints[i + 1]
        for j in range(1, k):
            new_z.append(a + (b - a) * j / k)
            new_m.append(1)
        new_z.append(b)
        new_m.append(kv.multiplicities[i + 1])
    return SplineSpace1D(KnotVector(kv.degree, np.array(new_z), np.array(new_m, int)))


def derivative_matrix(space: SplineSpace1D) -> tuple[SplineSpace1D, sp.csr_matrix]:
    """Exact coefficient matrix of d/dx from S^p_a into S^{p-1}_{a-1}.

    Row j carries the classical bidiagonal stencil
    ``p * (c_{j+1} - c_j) / (xi_{j+p+1} - xi_{j+1})``.
    """
    reduced = reduce_degree_regularity(space)
    p = space.degree
    n = space.num_basis
    xi = space.knots
    rows, cols, vals = [], [], []
    for j in range(n - 1):
        d = xi[j + p + 1] - xi[j + 1]
        c = p / d if d > 0.0 else 0.0
        rows += [j, j]
        cols += [j, j + 1]
        vals += [-c, c]
    D = sp.csr_matrix((vals, (rows, cols)), shape=(n - 1, n))
    if reduced.num_basis != n - 1:
        raise SplineError("inconsistent derivative-space dimension")
    return reduced, D


class TensorSplineSpace:
    """Tensor product of two univariate spaces on the parametric square.

    Coefficients are flattened C-style, direction 1 slowest:
    global index = i1 * n2 + i2.
    """

    def __init__(self, space1: SplineSpace1D, space2: SplineSpace1D):
        self.s1 = space1
        self.s2 = space2
        self.dim = space1.num_basis * space2.num_basis

    @property
    def shape(self) -> tuple[int, int]:
        return (self.s1.num_basis, self.s2.num_basis)

    @property
    def h(self) -> float:
        """Global mesh size: largest element diameter of the Bezier mesh."""
        h1 = self.s1.kv.element_sizes
        h2 = self.s2.kv.element_sizes
        return float(np.sqrt(h1.max() ** 2 + h2.max() ** 2))

    def ravel(self, i1, i2):
        return i1 * self.s2.num_basis + i2

    def eval_field(self, coeffs: np.ndarray, pts: np.ndarray,
                   deriv: bool = False) -> np.ndarray:
        """Evaluate a 2D spline field (and optionally its gradient) at points.

        pts has shape (npts, 2).  Returns values of shape (npts,) or, with
        deriv=True, (npts, 3) holding (value, d/dxi1, d/dxi2).
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        c = np.asarray(coeffs, dtype=float).reshape(self.shape)
        p1, p2 = self.s1.degree, self.s2.degree
        out = np.zeros((len(pts), 3 if deriv else 1))
        for q, (x, y) in enumerate(pts):
            f1, v1 = self.s1.eval_basis(x)
            f2, v2 = self.s2.eval_basis(y)
            block = c[f1 : f1 + p1 + 1, f2 : f2 + p2 + 1]
            out[q, 0] = v1 @ block @ v2
            if deriv:
                _, d1 = self.s1.eval_basis_deriv(x)
                _, d2 = self.s2.eval_basis_deriv(y)
                out[q, 1] = d1 @ block @ v2
                out[q, 2] = v1 @ block @ d2
        return out[:, 0] if not deriv else out


class NurbsBasis:
    """Rational tensor-product basis with strictly positive weights."""

    def __init__(self, space: TensorSplineSpace, weights: np.ndarray):
        weights = np.asarray(weights, dtype=float)
        if weights.shape != space.shape:
            raise SplineError("weight grid must match the tensor space shape")
        if np.any(weights <= 0.0):
            raise SplineError("weights must be strictly positive")
        self.space = space
        self.weights = weights

    def eval(self, x: float, y: float):
        """Local rational basis values and first derivatives at (x, y).

        Returns (first1, first2, N, dN1, dN2) where the arrays have shape
        (p1+1, p2+1) and cover the possibly-nonzero local functions.
        """
        s1, s2 = self.space.s1, self.space.s2
        f1, v1 = s1.eval_basis(x)
        f2, v2 = s2.eval_basis(y)
        _, d1 = s1.eval_basis_deriv(x) if s1.degree > 0 else (f1, np.zeros(1))
        _, d2 = s2.eval_basis_deriv(y) if s2.degree > 0 else (f2, np.zeros(1))
        w = self.weights[f1 : f1 + s1.degree + 1, f2 : f2 + s2.degree + 1]
        B = np.outer(v1, v2)
        B1 = np.outer(d1, v2)
        B2 = np.outer(v1, d2)
        W = float((w * B).sum())
        if W <= 0.0:
            raise SplineError("non-positive NURBS denominator")
        W1 = float((w * B1).sum())
        W2 = float((w * B2).sum())
        N = w * B / W
        dN1 = w * (B1 * W - B * W1) / W**2
        dN2 = w * (B2 * W - B * W2) / W**2
        return f1, f2, N, dN1, dN2
