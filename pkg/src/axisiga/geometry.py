"""NURBS parametrization of the meridian cross-section and de Rham pullbacks.

The cross-section S in the (rho, z) half-plane is the image of the unit
square under a single-patch NURBS map F.  If an edge of the square maps onto
the symmetry axis {rho = 0} it must be the west edge, F({0} x [0,1]).

The four pullbacks relating physical fields on S to parametric fields on the
square are

    iota0(v) = v o F                      (scalars, 0-forms)
    iota1(v) = J^T (v o F)                (covariant / curl-conforming)
    iota1s(v) = det(J) J^{-1} (v o F)     (contravariant / div-conforming)
    iota2(v) = det(J) (v o F)             (densities, 2-forms)

with J = J_F the 2x2 Jacobian; push-forwards are their inverses.
"""

from __future__ import annotations

import numpy as np

from .splines import KnotVector, NurbsBasis, SplineSpace1D, TensorSplineSpace

EDGES = ("west", "east", "south", "north")
EDGE_LABELS = ("axis", "dirichlet", "neumann")


class GeometryError(ValueError):
    pass


class NurbsGeometry:
    """Single-patch NURBS map F: [0,1]^2 -> S subset {rho >= 0}.

    Parameters
    ----------
    basis : NurbsBasis
        Rational tensor-product basis.
    control : array, shape (n1, n2, 2)
        Control points (rho, z).
    edge_labels : dict
        Maps each of 'west', 'east', 'south', 'north' to one of
        'axis', 'dirichlet', 'neumann'.  An axis label is only legal on
        the west edge.
    """

    def __init__(self, basis: NurbsBasis, control: np.ndarray, edge_labels: dict):
        control = np.asarray(control, dtype=float)
        if control.shape != basis.space.shape + (2,):
            raise GeometryError("control grid must have shape (n1, n2, 2)")
        missing = [e for e in EDGES if e not in edge_labels]
        if missing:
            raise GeometryError(f"untagged edges: {missing}")
        for e in EDGES:
            if edge_labels[e] not in EDGE_LABELS:
                raise GeometryError(f"unknown label {edge_labels[e]!r} on edge {e}")
        axis_edges = [e for e in EDGES if edge_labels[e] == "axis"]
        if axis_edges and axis_edges != ["west"]:
            raise GeometryError("the axis edge must be the west edge, F({0} x [0,1])")
        self.basis = basis
        self.control = control
        self.edge_labels = dict(edge_labels)
        self._validate()

    # -- construction checks ------------------------------------------------

    def _validate(self, nsample: int = 7):
        xs = np.linspace(0.02, 0.98, nsample)
        for u in xs:
            for v in xs:
                _, det = self.jacobian(u, v)
                if det < 1e-10:
                    raise GeometryError(
                        f"degenerate Jacobian det {det:.3e} at ({u:.2f}, {v:.2f})")
                rho, _ = self.map_point(u, v)
                if rho < -1e-12:
                    raise GeometryError(f"negative rho at ({u:.2f}, {v:.2f})")
        if self.edge_labels["west"] == "axis":
            for v in np.linspace(0.0, 1.0, nsample):
                rho, _ = self.map_point(0.0, v)
                if abs(rho) > 1e-12:
                    raise GeometryError("declared axis edge does not lie on rho = 0")

    # -- evaluation ---------------------------------------------------------

    def map_point(self, xi1: float, xi2: float) -> np.ndarray:
        """Physical point F(xi) = (rho, z)."""
        f1, f2, N, _, _ = self.basis.eval(xi1, xi2)
        p1, p2 = N.shape
        block = self.control[f1 : f1 + p1, f2 : f2 + p2]
        return np.einsum("ij,ijc->c", N, block)

    def jacobian(self, xi1: float, xi2: float) -> tuple[np.ndarray, float]:
        """Jacobian J_F(xi) and its determinant."""
        f1, f2, _, dN1, dN2 = self.basis.eval(xi1, xi2)
        p1, p2 = dN1.shape
        block = self.control[f1 : f1 + p1, f2 : f2 + p2]
        col1 = np.einsum("ij,ijc->c", dN1, block)
        col2 = np.einsum("ij,ijc->c", dN2, block)
        J = np.column_stack([col1, col2])
        return J, float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])

    @property
    def breakpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.basis.space.s1.breakpoints, self.basis.space.s2.breakpoints)

    def elements(self):
        """Parametric Bezier elements as ((a1,b1),(a2,b2)) tuples."""
        z1, z2 = self.breakpoints
        out = []
        for i in range(len(z1) - 1):
            for j in range(len(z2) - 1):
                out.append(((z1[i], z1[i + 1]), (z2[j], z2[j + 1])))
        return out


# -- pullbacks / push-forwards ----------------------------------------------

_FORM_KINDS = ("0", "1", "1*", "2")


def pullback(k: str, geometry: NurbsGeometry, xi, value):
    """Pull a physical field value at F(xi) back to the parametric square."""
    if k not in _FORM_KINDS:
        raise GeometryError(f"unknown form kind {k!r}")
    J, det = geometry.jacobian(*xi)
    if k == "0":
        return value
    if k == "1":
        return J.T @ np.asarray(value)
    if k == "1*":
        Jinv = np.array([[J[1, 1], -J[0, 1]], [-J[1, 0], J[0, 0]]]) / det
        return det * (Jinv @ np.asarray(value))
    return det * value


def push_forward(k: str, geometry: NurbsGeometry, xi, value):
    """Inverse of :func:`pullback` for the same form kind."""
    if k not in _FORM_KINDS:
        raise GeometryError(f"unknown form kind {k!r}")
    J, det = geometry.jacobian(*xi)
    if k == "0":
        return value
    if k == "1":
        JT_inv = np.array([[J[1, 1], -J[1, 0]], [-J[0, 1], J[0, 0]]]) / det
        return JT_inv @ np.asarray(value)
    if k == "1*":
        return (J @ np.asarray(value)) / det
    return value / det


# -- built-in geometries ----------------------------------------------------

def _bilinear_basis():
    kv = KnotVector.uniform(1, 1)
    space = TensorSplineSpace(SplineSpace1D(kv), SplineSpace1D(kv))
    return NurbsBasis(space, np.ones(space.shape))


def rectangle(rho_min: float, rho_max: float, z_min: float, z_max: float,
              edge_labels: dict | None = None) -> NurbsGeometry:
    """Axis-aligned rectangle [rho_min, rho_max] x [z_min, z_max].

    Default tagging: west edge is 'axis' when rho_min == 0 else 'neumann';
    the other edges 'neumann'.
    """
    if rho_min < 0 or rho_max <= rho_min or z_max <= z_min:
        raise GeometryError("invalid rectangle bounds")
    if edge_labels is None:
        edge_labels = {
            "west": "axis" if rho_min == 0.0 else "neumann",
            "east": "neumann", "south": "neumann", "north": "neumann",
        }
    control = np.zeros((2, 2, 2))
    for i, r in enumerate((rho_min, rho_max)):
        for j, z in enumerate((z_min, z_max)):
            control[i, j] = (r, z)
    return NurbsGeometry(_bilinear_basis(), control, edge_labels)


def pillbox_section(radius: float, length: float) -> NurbsGeometry:
    """Meridian rectangle [0, R] x [0, L] of a pillbox cavity, PEC on Gamma."""
    return rectangle(0.0, radius, 0.0, length, edge_labels={
        "west": "axis", "east": "dirichlet",
        "south": "dirichlet", "north": "dirichlet",
    })


def quarter_annulus(r_inner: float, r_outer: float,
                    edge_labels: dict | None = None) -> NurbsGeometry:
    """Exact quarter annulus in the first quadrant of the (rho, z) plane.

    Direction 1 is radial (inner -> outer), direction 2 sweeps the arc from
    the rho-axis to the z-axis; a degree-2 NURBS with the classic conic
    weights (1, sqrt(2)/2, 1) represents the circular arcs exactly.
    """
    if not (0 < r_inner < r_outer):
        raise GeometryError("need 0 < r_inner < r_outer")
    kv1 = KnotVector.uniform(1, 1)
    kv2 = KnotVector.uniform(2, 1)
    space = TensorSplineSpace(SplineSpace1D(kv1), SplineSpace1D(kv2))
    weights = np.ones(space.shape)
    weights[:, 1] = np.sqrt(2.0) / 2.0
    basis = NurbsBasis(space, weights)
    control = np.zeros((2, 3, 2))
    for i, r in enumerate((r_inner, r_outer)):
        control[i, 0] = (r, 0.0)
        control[i, 1] = (r, r)
        control[i, 2] = (0.0, r)
    if edge_labels is None:
        edge_labels = {"west": "neumann", "east": "neumann",
                       "south": "neumann", "north": "neumann"}
    return NurbsGeometry(basis, control, edge_labels)


BUILTIN_GEOMETRIES = {
    "rectangle": lambda: rectangle(0.0, 1.0, 4.0, 5.0, edge_labels={
        "west": "axis", "east": "neumann",
        "south": "neumann", "north": "dirichlet"}),
    "pillbox-section": lambda: pillbox_section(0.035, 0.1),
    "quarter-annulus": lambda: quarter_annulus(1.0, 2.0),
}


# -- geometry file I/O ------------------------------------------------------

def save_geometry(geometry: NurbsGeometry, path: str) -> None:
    """Write a geometry to the plain-text format read by :func:`load_geometry`."""
    s1 = geometry.basis.space.s1
    s2 = geometry.basis.space.s2
    lines = []
    lines.append(f"degree1 {s1.degree}")
    lines.append(f"degree2 {s2.degree}")
    lines.append("breakpoints1 " + " ".join(repr(float(x)) for x in s1.breakpoints))
    lines.append("multiplicities1 " + " ".join(str(int(m)) for m in s1.kv.multiplicities))
    lines.append("breakpoints2 " + " ".join(repr(float(x)) for x in s2.breakpoints))
    lines.append("multiplicities2 " + " ".join(str(int(m)) for m in s2.kv.multiplicities))
    lines.append("edges " + " ".join(f"{e}={geometry.edge_labels[e]}" for e in EDGES))
    lines.append("control")
    n1, n2 = geometry.basis.space.shape
    for i in range(n1):
        for j in range(n2):
            r, z = geometry.control[i, j]
            lines.append(f"{float(r)!r} {float(z)!r}")
    lines.append("weights")
    for i in range(n1):
        for j in range(n2):
            lines.append(repr(float(geometry.basis.weights[i, j])))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_geometry(path: str) -> NurbsGeometry:
    """Read a geometry from the plain-text schema (see README)."""
    scalars: dict[str, str] = {}
    control_vals: list[tuple[float, float]] = []
    weight_vals: list[float] = []
    section = None
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line == "control":
                section = "control"
                continue
            if line == "weights":
                section = "weights"
                continue
            if section == "control":
                parts = line.split()
                if len(parts) != 2:
                    raise GeometryError(f"bad control-point line: {line!r}")
                control_vals.append((float(parts[0]), float(parts[1])))
            elif section == "weights":
                weight_vals.append(float(line))
            else:
                key, _, rest = line.partition(" ")
                scalars[key] = rest.strip()
    try:
        p1 = int(scalars["degree1"])
        p2 = int(scalars["degree2"])
        z1 = np.array([float(t) for t in scalars["breakpoints1"].split()])
        m1 = np.array([int(t) for t in scalars["multiplicities1"].split()])
        z2 = np.array([float(t) for t in scalars["breakpoints2"].split()])
        m2 = np.array([int(t) for t in scalars["multiplicities2"].split()])
        edge_labels = dict(tok.split("=", 1) for tok in scalars["edges"].split())
    except KeyError as exc:
        raise GeometryError(f"geometry file missing field {exc.args[0]!r}") from exc
    s1 = SplineSpace1D(KnotVector(p1, z1, m1))
    s2 = SplineSpace1D(KnotVector(p2, z2, m2))
    space = TensorSplineSpace(s1, s2)
    n1, n2 = space.shape
    if len(control_vals) != n1 * n2:
        raise GeometryError(
            f"expected {n1 * n2} control points, found {len(control_vals)}")
    if len(weight_vals) != n1 * n2:
        raise GeometryError(f"expected {n1 * n2} weights, found {len(weight_vals)}")
    control = np.array(control_vals).reshape(n1, n2, 2)
    weights = np.array(weight_vals).reshape(n1, n2)
    return NurbsGeometry(NurbsBasis(space, weights), control, edge_labels)
