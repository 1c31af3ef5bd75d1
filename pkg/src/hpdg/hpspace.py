"""hp degree distribution, dG dof maps, point location and field evaluation.

Per-element degrees follow the linear slope rule p_K = p0 + round(s * (ell - j))
for an element in layer j, so the innermost layer carries p0 and degrees grow
toward the boundary.  Local bases are tensor products of Legendre polynomials;
dofs are laid out contiguously per element, in element-id order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import mesh as meshmod
from ._kernels import legendre_table, tensor_rows
from .refelem import gauss_rule, legendre_l2_norms_sq

ROUNDINGS = ("half_up", "floor", "ceil")


def _round_degree(x: float, mode: str) -> int:
    if mode == "half_up":
        return int(math.floor(x + 0.5))
    if mode == "floor":
        return int(math.floor(x))
    if mode == "ceil":
        return int(math.ceil(x))
    raise ValueError(f"unknown rounding mode {mode!r}")


@dataclass
class HpSpace:
    mesh: meshmod.GradedMesh
    p0: int
    slope: float
    degrees: np.ndarray  # (n_elements,)
    offsets: np.ndarray  # (n_elements,)
    ndofs_el: np.ndarray  # (n_elements,)
    N: int

    def modes(self, eid: int) -> np.ndarray:
        """Tensor mode multi-indices of element eid, C-ordered, shape (n, d)."""
        p = int(self.degrees[eid])
        return _modes(p, self.mesh.d)

    def face_degree(self, face: meshmod.Face) -> int:
        """p_e = max of the adjacent element degrees."""
        ps = [int(self.degrees[o]) for o in face.owners if o is not None]
        return max(ps)

    def local_slice(self, eid: int) -> slice:
        off = int(self.offsets[eid])
        return slice(off, off + int(self.ndofs_el[eid]))


_MODE_CACHE: dict = {}


def _modes(p: int, d: int) -> np.ndarray:
    key = (p, d)
    if key not in _MODE_CACHE:
        grids = np.indices((p + 1,) * d)
        _MODE_CACHE[key] = grids.reshape(d, -1).T.copy()
    return _MODE_CACHE[key]


def build_space(mesh: meshmod.GradedMesh, p0: int, slope: float,
                rounding: str = "half_up") -> HpSpace:
    """Assign layer-based degrees and build the dG dof map."""
    if p0 < 1:
        raise ValueError(f"p0 must be >= 1, got {p0}")
    if slope < 0:
        raise ValueError(f"slope must be >= 0, got {slope}")
    if rounding not in ROUNDINGS:
        raise ValueError(f"rounding must be one of {ROUNDINGS}")
    degs = np.array(
        [p0 + _round_degree(slope * (mesh.ell - e.layer), rounding) for e in mesh.elements],
        dtype=np.int64,
    )
    ndofs = (degs + 1) ** mesh.d
    offsets = np.concatenate([[0], np.cumsum(ndofs)[:-1]])
    return HpSpace(mesh, int(p0), float(slope), degs, offsets, ndofs, int(ndofs.sum()))


@dataclass
class DiscreteField:
    space: HpSpace
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (self.space.N,):
            raise ValueError(
                f"coefficient vector has length {self.coeffs.shape}, space has N={self.space.N}"
            )

    def local(self, eid: int) -> np.ndarray:
        return self.coeffs[self.space.local_slice(eid)]


def constant_field(space: HpSpace, value: float = 1.0) -> DiscreteField:
    """The field identically equal to ``value`` (only P_0 modes active)."""
    c = np.zeros(space.N)
    c[space.offsets] = value
    return DiscreteField(space, c)


def locate_point(mesh: meshmod.GradedMesh, x) -> int:
    """Element whose closed box contains x; ties go to the smaller id."""
    x = np.asarray(x, dtype=float)
    inside = np.all((mesh.el_lo - meshmod.GEOM_TOL <= x) & (x <= mesh.el_hi + meshmod.GEOM_TOL), axis=1)
    ids = np.nonzero(inside)[0]
    if ids.size == 0:
        raise ValueError(f"point {x} lies outside the mesh domain")
    return int(ids[0])


def ref_coords(element: meshmod.Element, pts: np.ndarray) -> np.ndarray:
    """Map physical points into the element's [-1,1]^d reference coordinates."""
    return 2.0 * (pts - element.lo) / element.lengths - 1.0


def basis_matrix(element: meshmod.Element, p: int, pts: np.ndarray):
    """Values of the (p+1)^d tensor-Legendre basis at physical points pts."""
    xi = ref_coords(element, pts)
    tabs = [legendre_table(np.ascontiguousarray(xi[:, m]), p)[0] for m in range(xi.shape[1])]
    return tensor_rows(tabs)


def basis_matrices(element: meshmod.Element, p: int, pts: np.ndarray):
    """Values and physical-gradient tables of the tensor basis at pts.

    Returns (phi, grads) with phi of shape (npts, ndof) and grads a list of d
    arrays of the same shape (derivative along each physical axis).
    """
    xi = ref_coords(element, pts)
    d = xi.shape[1]
    vals, ders = [], []
    for m in range(d):
        v, dv = legendre_table(np.ascontiguousarray(xi[:, m]), p)
        vals.append(v)
        ders.append(dv)
    phi = tensor_rows(vals)
    grads = []
    for m in range(d):
        tabs = [ders[k] * (2.0 / element.lengths[k]) if k == m else vals[k] for k in range(d)]
        grads.append(tensor_rows(tabs))
    return phi, grads


def evaluate_in_element(field: DiscreteField, eid: int, pts: np.ndarray) -> np.ndarray:
    """Evaluate the element-local expansion of ``field`` at physical points."""
    p = int(field.space.degrees[eid])
    phi = basis_matrix(field.space.mesh.elements[eid], p, np.atleast_2d(pts))
    return phi @ field.local(eid)


def evaluate(field: DiscreteField, x) -> float:
    """Point value of the field; on faces, the smaller-id element's trace."""
    x = np.asarray(x, dtype=float)
    eid = locate_point(field.space.mesh, x)
    return float(evaluate_in_element(field, eid, x[None, :])[0])


def project(space: HpSpace, f) -> DiscreteField:
    """Element-local L2 projection of a callable f(points) -> values."""
    coeffs = np.zeros(space.N)
    d = space.mesh.d
    for e in space.mesh.elements:
        p = int(space.degrees[e.id])
        rule = gauss_rule(p + 4)
        axes = [e.lo[m] + (rule.points + 1.0) * (e.lengths[m] / 2.0) for m in range(d)]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        w = np.ones(1)
        for m in range(d):
            w = np.multiply.outer(w, rule.weights * (e.lengths[m] / 2.0)).ravel()
        phi = basis_matrix(e, p, pts)
        mass_diag = _local_mass_diag(e, p, d)
        coeffs[space.local_slice(e.id)] = (phi.T @ (w * np.asarray(f(pts)))) / mass_diag
    return DiscreteField(space, coeffs)


def _local_mass_diag(element: meshmod.Element, p: int, d: int) -> np.ndarray:
    norms = legendre_l2_norms_sq(p)
    modes = _modes(p, d)
    diag = np.ones(modes.shape[0])
    for m in range(d):
        diag *= norms[modes[:, m]] * (element.lengths[m] / 2.0)
    return diag


def inject(field: DiscreteField, fine_space: HpSpace) -> DiscreteField:
    """Represent a field on a finer nested space by local L2 projection.

    Exact whenever each fine element is contained in a coarse element of
    degree at most the fine one (the situation along a refinement chain).
    """
    coarse = field.space
    coeffs = np.zeros(fine_space.N)
    d = fine_space.mesh.d
    for e in fine_space.mesh.elements:
        p = int(fine_space.degrees[e.id])
        cid = locate_point(coarse.mesh, e.center)
        nq = p + 4
        rule = gauss_rule(nq)
        axes = [e.lo[m] + (rule.points + 1.0) * (e.lengths[m] / 2.0) for m in range(d)]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        w = np.ones(1)
        for m in range(d):
            w = np.multiply.outer(w, rule.weights * (e.lengths[m] / 2.0)).ravel()
        vals = evaluate_in_element(field, cid, pts)
        phi = basis_matrix(e, p, pts)
        coeffs[fine_space.local_slice(e.id)] = (phi.T @ (w * vals)) / _local_mass_diag(e, p, d)
    return DiscreteField(fine_space, coeffs)


def save_field(field: DiscreteField, path) -> None:
    """Text serialization: header (d sigma ell p0 slope), then N coefficients."""
    sp = field.space
    with open(path, "w") as fh:
        fh.write(f"{sp.mesh.d} {sp.mesh.sigma!r} {sp.mesh.ell} {sp.p0} {sp.slope!r}\n")
        for c in field.coeffs:
            fh.write(f"{float(c)!r}\n")


def load_field(path) -> DiscreteField:
    """Rebuild the space from the header and read the coefficients back."""
    with open(path) as fh:
        head = fh.readline().split()
        d, sigma, ell, p0, slope = int(head[0]), float(head[1]), int(head[2]), int(head[3]), float(head[4])
        coeffs = np.array([float(line) for line in fh if line.strip()])
    m = meshmod.build_graded_mesh(d, sigma, ell)
    space = build_space(m, p0, slope)
    return DiscreteField(space, coeffs)
