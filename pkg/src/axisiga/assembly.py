"""Per-mode weighted Galerkin assembly in tilde variables.

All bilinear forms are integrals over the cross-section with the cylindrical
measure rho drho dz.  Trial/test fields are expanded in the Cartesian factor
spaces of the discrete complex; at each quadrature point the parametric basis
values are pushed forward through the geometry (covariant for the
curl-conforming pair, Piola for the div-conforming pair, density scaling for
top forms) and converted to physical cylindrical components through the
eta^{-1} maps, which multiply by rho and never divide — every integrand is
smooth up to the axis.

The mode m enters assembly only through eta^{-1}; since the integrands pair
like components, the matrices depend on m only through m**2 and coincide for
the symmetric (m > 0) and antisymmetric (m < 0) branches.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .derham import DeRhamComplex2D, DeRhamError, eta_inverse
from .geometry import EDGES, NurbsGeometry
from .quadrature import gauss_legendre
from .splines import SplineSpace1D


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True)
class MaterialConstants:
    """Permittivity (F/m) and permeability (H/m)."""

    eps: float = 8.8541878128e-12
    mu: float = 4.0e-7 * np.pi

    def __post_init__(self):
        if self.eps <= 0 or self.mu <= 0:
            raise AssemblyError("material constants must be positive")


VACUUM = MaterialConstants()


def default_nquad(complex_: DeRhamComplex2D) -> int:
    """Gauss points per direction.

    The worst integrand factor is rho**3 times a spline product (from the
    rho-weighted measure and the rho factors of eta^{-1}), of 1D degree
    2p + 3 on affine geometry, so p + 2 points are exact there; p + 1 would
    not be.
    """
    return max(complex_.degrees) + 2


# ---------------------------------------------------------------------------
# quadrature tabulation
# ---------------------------------------------------------------------------

def _tabulate_direction(spaces: list[SplineSpace1D], nq: int):
    """Per-element Gauss nodes/weights and local basis tables for a direction.

    All spaces must share the same breakpoints.  Returns
    (nodes (nel, nq), weights (nel, nq), tables) where tables[i] =
    (firsts (nel,), vals (nel, nq, p_i+1)) for the i-th space.
    """
    z = spaces[0].breakpoints
    for s in spaces[1:]:
        if not np.array_equal(s.breakpoints, z):
            raise AssemblyError("factor spaces disagree on breakpoints")
    rule = gauss_legendre(nq)
    nel = len(z) - 1
    nodes = np.zeros((nel, nq))
    weights = np.zeros((nel, nq))
    for e in range(nel):
        nodes[e], weights[e] = rule.mapped(z[e], z[e + 1])
    tables = []
    for s in spaces:
        firsts = np.zeros(nel, dtype=int)
        vals = np.zeros((nel, nq, s.degree + 1))
        for e in range(nel):
            for q in range(nq):
                f, v = s.eval_basis(nodes[e, q])
                vals[e, q] = v
                if q == 0:
                    firsts[e] = f
                elif f != firsts[e]:
                    raise AssemblyError("quadrature node left its element span")
        tables.append((firsts, vals))
    return nodes, weights, tables


class _QuadCache:
    """Element-wise quadrature data shared by all assembly passes."""

    def __init__(self, complex_: DeRhamComplex2D, geometry: NurbsGeometry, nq: int):
        cx = complex_
        if not np.array_equal(cx.s1.breakpoints, geometry.basis.space.s1.breakpoints) \
                or not np.array_equal(cx.s2.breakpoints, geometry.basis.space.s2.breakpoints):
            # analysis mesh refines the geometry mesh; only require nesting of
            # geometry breakpoints into analysis breakpoints
            for gz, az in ((geometry.basis.space.s1.breakpoints, cx.s1.breakpoints),
                           (geometry.basis.space.s2.breakpoints, cx.s2.breakpoints)):
                if not np.all(np.isin(np.round(gz, 12), np.round(az, 12))):
                    raise AssemblyError(
                        "geometry breakpoints must be nested in the analysis mesh")
        self.complex = cx
        self.geometry = geometry
        self.nq = nq
        self.nodes1, self.w1, self.tab1 = _tabulate_direction(
            [cx.s1, cx.s1r], nq)
        self.nodes2, self.w2, self.tab2 = _tabulate_direction(
            [cx.s2, cx.s2r], nq)
        self.nel1 = self.nodes1.shape[0]
        self.nel2 = self.nodes2.shape[0]
        # geometry data per element, computed lazily and cached
        self._geo = {}

    def geo(self, e1: int, e2: int):
        """(rho, z, J (nq2d,2,2), det, wdet = gauss weights * det) per point."""
        key = (e1, e2)
        if key in self._geo:
            return self._geo[key]
        nq = self.nq
        pts1 = self.nodes1[e1]
        pts2 = self.nodes2[e2]
        n2d = nq * nq
        rho = np.zeros(n2d)
        zz = np.zeros(n2d)
        J = np.zeros((n2d, 2, 2))
        det = np.zeros(n2d)
        q = 0
        for i in range(nq):
            for j in range(nq):
                r, z = self.geometry.map_point(pts1[i], pts2[j])
                Jq, dq = self.geometry.jacobian(pts1[i], pts2[j])
                rho[q], zz[q], J[q], det[q] = r, z, Jq, dq
                q += 1
        if np.any(det <= 0):
            raise AssemblyError("non-positive Jacobian at a quadrature point")
        w2d = np.outer(self.w1[e1], self.w2[e2]).ravel()
        data = (rho, zz, J, det, w2d * det)
        self._geo[key] = data
        return data

    def local_basis(self, space_id: tuple[int, int], e1: int, e2: int):
        """2D local values for the factor space (d1_choice, d2_choice).

        choice 0 = full-degree factor, 1 = reduced factor.  Returns
        (global_indices (nloc,), values (nloc, nq2d)).
        """
        f1, v1 = self.tab1[space_id[0]]
        f2, v2 = self.tab2[space_id[1]]
        V = np.einsum("qa,rb->abqr", v1[e1], v2[e2])
        pl1, pl2 = V.shape[:2]
        V = V.reshape(pl1 * pl2, self.nq * self.nq)
        n2 = (self.complex.s2.num_basis if space_id[1] == 0
              else self.complex.s2r.num_basis)
        i1 = f1[e1] + np.arange(pl1)
        i2 = f2[e2] + np.arange(pl2)
        idx = (i1[:, None] * n2 + i2[None, :]).ravel()
        return idx, V


# factor-space descriptors per form degree: (d1_choice, d2_choice, role)
# role: 'c1'/'c2' covariant pair, 'p1'/'p2' Piola pair, 's' plain scalar,
#       'd' density (1/det)
_FACTORS = {
    0: [((0, 0), "s")],
    1: [((1, 0), "c1"), ((0, 1), "c2"), ((0, 0), "s")],
    2: [((0, 1), "p1"), ((1, 0), "p2"), ((1, 1), "d")],
    3: [((1, 1), "d")],
}


def _tilde_components(cache: _QuadCache, k: int, e1: int, e2: int):
    """All local Z^k basis functions as tilde 3-vectors at the quad points.

    Returns (global_indices (nloc,), U (nloc, nq2d, ncomp)) where global
    indices refer to the stacked Z^k coefficient vector.
    """
    rho, zz, J, det, _ = cache.geo(e1, e2)
    slices = cache.complex.block_slices(k)
    ncomp = 3 if k in (1, 2) else 1
    idx_all = []
    blocks = []
    for (space_id, role), sl in zip(_FACTORS[k], slices):
        idx, V = cache.local_basis(space_id, e1, e2)
        nloc = len(idx)
        U = np.zeros((nloc, V.shape[1], ncomp))
        if role == "s":
            U[..., ncomp - 1] = V  # scalar factor: last component (or only one)
        elif role == "c1":
            # covariant push-forward of (N, 0): J^{-T} columns
            U[..., 0] = V * (J[:, 1, 1] / det)
            U[..., 1] = V * (-J[:, 0, 1] / det)
        elif role == "c2":
            U[..., 0] = V * (-J[:, 1, 0] / det)
            U[..., 1] = V * (J[:, 0, 0] / det)
        elif role == "p1":
            # Piola push-forward of (N, 0): J columns / det
            U[..., 0] = V * (J[:, 0, 0] / det)
            U[..., 1] = V * (J[:, 1, 0] / det)
        elif role == "p2":
            U[..., 0] = V * (J[:, 0, 1] / det)
            U[..., 1] = V * (J[:, 1, 1] / det)
        elif role == "d":
            U[..., ncomp - 1] = V / det
        idx_all.append(idx + sl.start)
        blocks.append(U)
    return np.concatenate(idx_all), np.concatenate(blocks, axis=0)


def _weight_values(weight, rho, zz):
    if callable(weight):
        return np.asarray(weight(rho, zz), dtype=float)
    return float(weight) * np.ones_like(rho)


# ---------------------------------------------------------------------------
# matrix assembly
# ---------------------------------------------------------------------------

def assemble_mass(complex_: DeRhamComplex2D, geometry: NurbsGeometry, m: int,
                  k: int = 1, weight=1.0, nquad: int | None = None,
                  cache: _QuadCache | None = None) -> sp.csr_matrix:
    """Weighted L2_rho mass matrix on Z^k_h for mode m.

    Entries are integrals weight * (eta^{-1} tilde_j) . (eta^{-1} tilde_i)
    rho drho dz; ``weight`` is a constant or a callable of (rho, z).
    """
    if m == 0:
        raise DeRhamError("mode m must be nonzero")
    if cache is None:
        cache = _QuadCache(complex_, geometry, nquad or default_nquad(complex_))
    dim = complex_.dim(k)
    rows, cols, vals = [], [], []
    for e1 in range(cache.nel1):
        for e2 in range(cache.nel2):
            rho, zz, J, det, wdet = cache.geo(e1, e2)
            idx, U = _tilde_components(cache, k, e1, e2)
            if k in (1, 2):
                P = eta_inverse(m, k, rho, U)
            else:
                P = eta_inverse(m, k, rho, U[..., 0])[..., None]
            wq = wdet * rho * _weight_values(weight, rho, zz)
            local = np.einsum("aqc,bqc,q->ab", P, P, wq)
            rows.append(np.repeat(idx, len(idx)))
            cols.append(np.tile(idx, len(idx)))
            vals.append(local.ravel())
    M = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim))
    M.sum_duplicates()
    return M


def assemble_curlcurl(complex_: DeRhamComplex2D, geometry: NurbsGeometry,
                      m: int, weight=None, materials: MaterialConstants = VACUUM,
                      nquad: int | None = None,
                      cache: _QuadCache | None = None) -> sp.csr_matrix:
    """Curl-curl stiffness A_m = C^T M2(weight) C on Z^1_h.

    ``weight`` defaults to 1/mu.  The curl is applied exactly through the
    coefficient matrix C; only the weighted Z^2 mass is integrated.
    """
    if weight is None:
        weight = 1.0 / materials.mu
    M2 = assemble_mass(complex_, geometry, m, k=2, weight=weight,
                       nquad=nquad, cache=cache)
    C = complex_.C
    A = (C.T @ M2 @ C).tocsr()
    return 0.5 * (A + A.T)


def assemble_mixed(complex_: DeRhamComplex2D, geometry: NurbsGeometry, m: int,
                   weight=None, materials: MaterialConstants = VACUUM,
                   nquad: int | None = None,
                   cache: _QuadCache | None = None) -> sp.csr_matrix:
    """Gradient-coupling block B_m = M1(weight) G (Z^0 multipliers -> Z^1).

    ``weight`` defaults to the permittivity.
    """
    if weight is None:
        weight = materials.eps
    M1 = assemble_mass(complex_, geometry, m, k=1, weight=weight,
                       nquad=nquad, cache=cache)
    return (M1 @ complex_.G).tocsr()


# ---------------------------------------------------------------------------
# load assembly
# ---------------------------------------------------------------------------

_EDGE_GEOM = {
    # edge -> (fixed parametric coordinate value index/direction, sign of
    # outward normal in the (T_z, -T_rho) convention)
    "west": ("xi1", 0.0, -1.0),
    "east": ("xi1", 1.0, +1.0),
    "south": ("xi2", 0.0, +1.0),
    "north": ("xi2", 1.0, -1.0),
}


def assemble_load(complex_: DeRhamComplex2D, geometry: NurbsGeometry, m: int,
                  source=None, neumann=None, nquad: int | None = None,
                  cache: _QuadCache | None = None) -> np.ndarray:
    """Load vector on Z^1_h for mode m.

    source(m, rho, z) -> (npts, 3): cylindrical components of the current
    density Fourier coefficient; integrated against eta_1^{-1} of each test
    function with measure rho drho dz.

    neumann(m, rho, z, normal) -> (npts, 3): surface term density
    (mu^{-1} curl A) x n on edges labeled 'neumann', integrated with the line
    measure rho |T| dt.
    """
    if m == 0:
        raise DeRhamError("mode m must be nonzero")
    if cache is None:
        cache = _QuadCache(complex_, geometry, nquad or default_nquad(complex_))
    f = np.zeros(complex_.dim(1))
    if source is not None:
        for e1 in range(cache.nel1):
            for e2 in range(cache.nel2):
                rho, zz, J, det, wdet = cache.geo(e1, e2)
                idx, U = _tilde_components(cache, 1, e1, e2)
                P = eta_inverse(m, 1, rho, U)
                Jv = np.asarray(source(m, rho, zz), dtype=float)
                np.add.at(f, idx, np.einsum("aqc,qc,q->a", P, Jv, wdet * rho))
    if neumann is not None:
        f += _neumann_load(cache, m, neumann)
    return f


def _neumann_load(cache: _QuadCache, m: int, neumann) -> np.ndarray:
    cx = cache.complex
    geo = cache.geometry
    nq = cache.nq
    f = np.zeros(cx.dim(1))
    slices = cx.block_slices(1)
    for edge in EDGES:
        if geo.edge_labels[edge] != "neumann":
            continue
        fixed_dir, fixed_val, sign = _EDGE_GEOM[edge]
        along = cache.nodes2 if fixed_dir == "xi1" else cache.nodes1
        wts = cache.w2 if fixed_dir == "xi1" else cache.w1
        nel = along.shape[0]
        for e in range(nel):
            for q in range(nq):
                t = along[e, q]
                w = wts[e, q]
                xi = (fixed_val, t) if fixed_dir == "xi1" else (t, fixed_val)
                rho, z = geo.map_point(*xi)
                J, det = geo.jacobian(*xi)
                T = J[:, 1] if fixed_dir == "xi1" else J[:, 0]
                nrmT = float(np.hypot(T[0], T[1]))
                normal = sign * np.array([T[1], -T[0]]) / nrmT
                g = np.asarray(neumann(m, np.array([rho]), np.array([z]),
                                       normal), dtype=float).reshape(3)
                # local Z1 test functions on the edge point
                idx, U = _edge_basis(cache, xi, J, det, slices)
                P = eta_inverse(m, 1, np.array([rho]), U)[:, 0, :]
                f[idx] += (P @ g) * w * nrmT * rho
    return f


def _edge_basis(cache: _QuadCache, xi, J, det, slices):
    """Local tilde 3-vectors of all Z1 basis functions nonzero at point xi."""
    cx = cache.complex
    JTinv = np.array([[J[1, 1], -J[1, 0]], [-J[0, 1], J[0, 0]]]) / det
    idx_all, rows = [], []
    specs = [(cx.X1a, "c1"), (cx.X1b, "c2"), (cx.X0, "s")]
    for (space, role), sl in zip(specs, slices):
        f1, v1 = space.s1.eval_basis(xi[0])
        f2, v2 = space.s2.eval_basis(xi[1])
        V = np.outer(v1, v2).ravel()
        i1 = f1 + np.arange(len(v1))
        i2 = f2 + np.arange(len(v2))
        idx = (i1[:, None] * space.s2.num_basis + i2[None, :]).ravel()
        U = np.zeros((len(idx), 1, 3))
        if role == "s":
            U[:, 0, 2] = V
        elif role == "c1":
            U[:, 0, 0] = V * JTinv[0, 0]
            U[:, 0, 1] = V * JTinv[1, 0]
        else:
            U[:, 0, 0] = V * JTinv[0, 1]
            U[:, 0, 1] = V * JTinv[1, 1]
        idx_all.append(idx + sl.start)
        rows.append(U)
    return np.concatenate(idx_all), np.concatenate(rows, axis=0)


# ---------------------------------------------------------------------------
# essential boundary conditions
# ---------------------------------------------------------------------------

def essential_dofs_z1(complex_: DeRhamComplex2D, edge_labels: dict) -> np.ndarray:
    """Constrained Z^1 DoFs for PEC (dirichlet) edges: the tangential-trace
    coefficients of the meridian pair plus the u_theta (X0 factor) boundary
    coefficients.  The axis edge constrains nothing."""
    cx = complex_
    n1, n2 = cx.s1.num_basis, cx.s2.num_basis
    n2r = cx.s2r.num_basis
    offs = cx.block_slices(1)
    out: set[int] = set()
    for edge in EDGES:
        if edge_labels.get(edge) != "dirichlet":
            continue
        if edge == "west":
            out.update(offs[1].start + 0 * n2r + np.arange(n2r))
            out.update(offs[2].start + 0 * n2 + np.arange(n2))
        elif edge == "east":
            out.update(offs[1].start + (n1 - 1) * n2r + np.arange(n2r))
            out.update(offs[2].start + (n1 - 1) * n2 + np.arange(n2))
        elif edge == "south":
            out.update(offs[0].start + np.arange(n1 - 1) * n2 + 0)
            out.update(offs[2].start + np.arange(n1) * n2 + 0)
        elif edge == "north":
            out.update(offs[0].start + np.arange(n1 - 1) * n2 + (n2 - 1))
            out.update(offs[2].start + np.arange(n1) * n2 + (n2 - 1))
    return np.array(sorted(out), dtype=int)


def essential_dofs_z0(complex_: DeRhamComplex2D, edge_labels: dict) -> np.ndarray:
    """Constrained Z^0 multiplier DoFs on dirichlet edges."""
    n1, n2 = complex_.s1.num_basis, complex_.s2.num_basis
    out: set[int] = set()
    for edge in EDGES:
        if edge_labels.get(edge) != "dirichlet":
            continue
        if edge == "west":
            out.update(0 * n2 + np.arange(n2))
        elif edge == "east":
            out.update((n1 - 1) * n2 + np.arange(n2))
        elif edge == "south":
            out.update(np.arange(n1) * n2 + 0)
        elif edge == "north":
            out.update(np.arange(n1) * n2 + (n2 - 1))
    return np.array(sorted(out), dtype=int)


def free_dofs(dim: int, constrained: np.ndarray) -> np.ndarray:
    mask = np.ones(dim, dtype=bool)
    mask[constrained] = False
    return np.nonzero(mask)[0]


def apply_essential_bc(matrix, row_free: np.ndarray,
                       col_free: np.ndarray | None = None):
    """Restrict a matrix (or vector) to free rows/columns."""
    if sp.issparse(matrix):
        out = matrix.tocsr()[row_free]
        if col_free is not None:
            out = out[:, col_free]
        return out.tocsr()
    arr = np.asarray(matrix)
    if arr.ndim == 1:
        return arr[row_free]
    out = arr[np.ix_(row_free, col_free if col_free is not None else row_free)]
    return out


# ---------------------------------------------------------------------------
# mode system
# ---------------------------------------------------------------------------

@dataclass
class ModeSystem:
    """Assembled matrices of one Fourier mode, with boundary bookkeeping.

    Matrices are stored on the full coefficient spaces; ``free_z1`` /
    ``free_z0`` index the unconstrained DoFs used by the solvers.
    """

    m: int
    complex: DeRhamComplex2D
    geometry: NurbsGeometry
    materials: MaterialConstants
    A: sp.csr_matrix            # curl-curl (weight 1/mu) on Z1
    M: sp.csr_matrix            # mass (weight eps) on Z1
    B: sp.csr_matrix            # M(eps) G: Z0 -> Z1
    f: np.ndarray               # load on Z1
    constrained_z1: np.ndarray = field(default_factory=lambda: np.array([], int))
    constrained_z0: np.ndarray = field(default_factory=lambda: np.array([], int))

    @property
    def parity(self) -> str:
        return "symmetric" if self.m > 0 else "antisymmetric"

    @property
    def free_z1(self) -> np.ndarray:
        return free_dofs(self.complex.dim(1), self.constrained_z1)

    @property
    def free_z0(self) -> np.ndarray:
        return free_dofs(self.complex.dim(0), self.constrained_z0)

    def reduced(self):
        """(A, M, B, f) restricted to free DoFs."""
        r1, r0 = self.free_z1, self.free_z0
        return (apply_essential_bc(self.A, r1, r1),
                apply_essential_bc(self.M, r1, r1),
                apply_essential_bc(self.B, r1, r0),
                self.f[r1])

    def expand_z1(self, u_red: np.ndarray) -> np.ndarray:
        u = np.zeros(self.complex.dim(1))
        u[self.free_z1] = u_red
        return u


def build_mode_system(complex_: DeRhamComplex2D, geometry: NurbsGeometry,
                      m: int, materials: MaterialConstants = VACUUM,
                      source=None, neumann=None,
                      nquad: int | None = None) -> ModeSystem:
    """Assemble A_m, M_m, B_m and the load for one mode, with BC maps."""
    cache = _QuadCache(complex_, geometry, nquad or default_nquad(complex_))
    M = assemble_mass(complex_, geometry, m, k=1, weight=materials.eps,
                      cache=cache)
    A = assemble_curlcurl(complex_, geometry, m, materials=materials,
                          cache=cache)
    B = (M @ complex_.G).tocsr()
    f = assemble_load(complex_, geometry, m, source=source, neumann=neumann,
                      cache=cache)
    return ModeSystem(
        m=m, complex=complex_, geometry=geometry, materials=materials,
        A=A, M=M, B=B, f=f,
        constrained_z1=essential_dofs_z1(complex_, geometry.edge_labels),
        constrained_z0=essential_dofs_z0(complex_, geometry.edge_labels),
    )
