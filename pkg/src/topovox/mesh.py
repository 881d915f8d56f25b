"""Regular hexahedral voxel grid: design domain, topology, regions, load cases.

Numbering conventions (fixed package-wide):
  node id  n = ix + (nx+1) * (iy + (ny+1) * iz)
  dof id   d = 3 * n + axis          (axis 0=x, 1=y, 2=z)
  elem id  e = ix + nx * (iy + ny * iz)

Elements are uniform cubes of edge ``h``. Geometry is described as a CSG
sequence of axis-aligned boxes and cylinders evaluated at element centroids;
elements outside the resulting design mask stay in the grid with ersatz
occupancy so the stiffness operator remains nonsingular on any topology.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .elements import NODE_OFFSETS
from .errors import BadDimension, EmptyDomain, EmptyLoadRegion, SemanticError

log = logging.getLogger(__name__)

# Ersatz relative stiffness assigned to void / non-design elements.
EPS_VOID = 1.0e-6

_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class CsgPrimitive:
    """One step of the centroid-membership CSG mask.

    op is "add" or "subtract". Boxes use (min, max) corners; cylinders are
    axis-aligned with (axis, center, radius, span) where center is the 2D
    point in the plane normal to the axis and span bounds the axial extent.
    """

    op: str
    shape: str
    min: tuple | None = None
    max: tuple | None = None
    axis: str | None = None
    center: tuple | None = None
    radius: float | None = None
    span: tuple | None = None

    def contains(self, pts: np.ndarray, tol: float) -> np.ndarray:
        if self.shape == "box":
            lo = np.asarray(self.min, dtype=float)
            hi = np.asarray(self.max, dtype=float)
            return np.all((pts >= lo - tol) & (pts <= hi + tol), axis=1)
        if self.shape == "cylinder":
            ax = _AXES[self.axis]
            plane = [i for i in range(3) if i != ax]
            c = np.asarray(self.center, dtype=float)
            r2 = (self.radius + tol) ** 2
            d2 = (pts[:, plane[0]] - c[0]) ** 2 + (pts[:, plane[1]] - c[1]) ** 2
            inside = d2 <= r2
            if self.span is not None:
                inside &= (pts[:, ax] >= self.span[0] - tol) & (pts[:, ax] <= self.span[1] + tol)
            return inside
        raise ValueError(f"unknown CSG shape {self.shape!r}")


class Domain:
    """Design domain: the bounding voxel grid plus a per-element design mask."""

    def __init__(self, nx, ny, nz, h, design_mask=None, origin=(0.0, 0.0, 0.0)):
        if min(nx, ny, nz) < 1:
            raise BadDimension(f"element counts must be >= 1, got {(nx, ny, nz)}")
        if h <= 0.0:
            raise BadDimension(f"edge length must be positive, got {h}")
        self.nx, self.ny, self.nz = int(nx), int(ny), int(nz)
        self.h = float(h)
        self.origin = np.asarray(origin, dtype=float)
        self.n_elems = self.nx * self.ny * self.nz
        self.n_nodes = (self.nx + 1) * (self.ny + 1) * (self.nz + 1)
        self.n_dofs = 3 * self.n_nodes
        if design_mask is None:
            design_mask = np.ones(self.n_elems, dtype=bool)
        self.design_mask = np.asarray(design_mask, dtype=bool)
        if self.design_mask.shape != (self.n_elems,):
            raise BadDimension("design_mask length does not match element count")
        if not self.design_mask.any():
            raise EmptyDomain("design mask contains no elements")
        self.n_design = int(self.design_mask.sum())
        self.elem_dofs = self._build_elem_dofs()

    def _build_elem_dofs(self) -> np.ndarray:
        e = np.arange(self.n_elems)
        ix = e % self.nx
        iy = (e // self.nx) % self.ny
        iz = e // (self.nx * self.ny)
        nxy = (self.nx + 1) * (self.ny + 1)
        dofs = np.empty((self.n_elems, 24), dtype=np.int32)
        for i, (dx, dy, dz) in enumerate(NODE_OFFSETS):
            node = (ix + dx) + (self.nx + 1) * (iy + dy) + nxy * (iz + dz)
            dofs[:, 3 * i] = 3 * node
            dofs[:, 3 * i + 1] = 3 * node + 1
            dofs[:, 3 * i + 2] = 3 * node + 2
        return dofs

    def elem_grid_coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        e = np.arange(self.n_elems)
        return e % self.nx, (e // self.nx) % self.ny, e // (self.nx * self.ny)

    def elem_centroids(self) -> np.ndarray:
        ix, iy, iz = self.elem_grid_coords()
        return self.origin + self.h * (np.stack([ix, iy, iz], axis=1) + 0.5)

    def node_coords(self) -> np.ndarray:
        n = np.arange(self.n_nodes)
        ix = n % (self.nx + 1)
        iy = (n // (self.nx + 1)) % (self.ny + 1)
        iz = n // ((self.nx + 1) * (self.ny + 1))
        return self.origin + self.h * np.stack([ix, iy, iz], axis=1)

    @property
    def tol(self) -> float:
        """Boundary-inclusion tolerance for region selection."""
        return self.h * 1.0e-9


class Topology:
    """Binary material layout over a domain: occupancy in {EPS_VOID, 1}.

    Non-design elements are pinned at EPS_VOID. Value semantics: use copy()
    for snapshots, never share a mutable instance across optimizer states.
    """

    def __init__(self, domain: Domain, occupancy: np.ndarray | None = None):
        self.domain = domain
        if occupancy is None:
            occupancy = np.where(domain.design_mask, 1.0, EPS_VOID)
        self.occupancy = np.asarray(occupancy, dtype=float).copy()
        self.occupancy[~domain.design_mask] = EPS_VOID
        self._recompute()

    def _recompute(self):
        solid = (self.occupancy == 1.0) & self.domain.design_mask
        self.volume_fraction = float(solid.sum()) / self.domain.n_design

    @classmethod
    def full(cls, domain: Domain) -> "Topology":
        return cls(domain)

    @classmethod
    def from_solid(cls, domain: Domain, solid: np.ndarray) -> "Topology":
        """Topology with occupancy 1 exactly on `solid & design_mask`."""
        occ = np.where(solid & domain.design_mask, 1.0, EPS_VOID)
        return cls(domain, occ)

    def copy(self) -> "Topology":
        return Topology(self.domain, self.occupancy)

    def solid_elements(self) -> np.ndarray:
        return np.flatnonzero((self.occupancy == 1.0) & self.domain.design_mask)

    def set_void(self, elems) -> "Topology":
        """New topology with the given elements switched to void."""
        occ = self.occupancy.copy()
        occ[np.asarray(elems, dtype=int)] = EPS_VOID
        return Topology(self.domain, occ)

    def __eq__(self, other):
        return isinstance(other, Topology) and np.array_equal(self.occupancy, other.occupancy)


@dataclass(frozen=True)
class RegionSelector:
    """Deterministic node/element picker: box, sphere, or explicit id list."""

    shape: str  # "box" | "sphere" | "ids"
    target: str = "nodes"  # "nodes" | "elements"
    min: tuple | None = None
    max: tuple | None = None
    center: tuple | None = None
    radius: float | None = None
    ids: tuple | None = None


def select(domain: Domain, sel: RegionSelector) -> np.ndarray:
    """Sorted, duplicate-free ids of the nodes/elements inside the selector."""
    if sel.shape == "ids":
        ids = np.unique(np.asarray(sel.ids, dtype=np.int64))
        limit = domain.n_nodes if sel.target == "nodes" else domain.n_elems
        if ids.size and (ids.min() < 0 or ids.max() >= limit):
            raise SemanticError(f"explicit id outside [0, {limit})")
        return ids
    pts = domain.node_coords() if sel.target == "nodes" else domain.elem_centroids()
    tol = domain.tol
    if sel.shape == "box":
        lo = np.asarray(sel.min, dtype=float) - tol
        hi = np.asarray(sel.max, dtype=float) + tol
        mask = np.all((pts >= lo) & (pts <= hi), axis=1)
    elif sel.shape == "sphere":
        c = np.asarray(sel.center, dtype=float)
        mask = np.einsum("ij,ij->i", pts - c, pts - c) <= (sel.radius + tol) ** 2
    else:
        raise ValueError(f"unknown selector shape {sel.shape!r}")
    if sel.target == "elements":
        mask &= domain.design_mask
    return np.flatnonzero(mask).astype(np.int64)


@dataclass(frozen=True)
class LoadCase:
    """One independent static analysis: Dirichlet regions + simultaneous loads.

    Every load inside one case acts simultaneously; distinct cases are
    separate analyses with their own constraint bindings.
    """

    id: str
    dirichlet: tuple = ()  # ((RegionSelector, (fix_x, fix_y, fix_z)), ...)
    loads: tuple = ()  # ((RegionSelector, (fx, fy, fz), "total"|"per_node"), ...)


def dirichlet_dofs(domain: Domain, case: LoadCase) -> np.ndarray:
    """Sorted fixed-DOF ids for a load case."""
    out = []
    for region, axes in case.dirichlet:
        nodes = select(domain, region)
        for ax in range(3):
            if axes[ax]:
                out.append(3 * nodes + ax)
    if not out:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.concatenate(out))


def validate_case(domain: Domain, case: LoadCase) -> None:
    """Reject statically singular cases: need one region clamping
    at least three non-collinear nodes on all axes."""
    coords = domain.node_coords()
    for region, axes in case.dirichlet:
        if not all(axes):
            continue
        nodes = select(domain, region)
        if nodes.size < 3:
            continue
        p = coords[nodes]
        d = p[1:] - p[0]
        cross = np.cross(d[0], d[1:]) if d.shape[0] >= 2 else np.empty((0, 3))
        if cross.size and np.linalg.norm(cross, axis=1).max() > domain.tol:
            return
    raise SemanticError(
        f"load case {case.id!r} has no Dirichlet region fixing three "
        "non-collinear nodes on all axes; the static problem is singular"
    )


def assemble_force(domain: Domain, case: LoadCase) -> np.ndarray:
    """Per-DOF force vector for a case; entries on fixed DOFs are zeroed."""
    f = np.zeros(domain.n_dofs)
    for region, force, distribution in case.loads:
        nodes = select(domain, region)
        if nodes.size == 0:
            raise EmptyLoadRegion(f"load region in case {case.id!r} selected no nodes")
        vec = np.asarray(force, dtype=float)
        if distribution == "total":
            vec = vec / nodes.size
        elif distribution != "per_node":
            raise ValueError(f"unknown load distribution {distribution!r}")
        for ax in range(3):
            f[3 * nodes + ax] += vec[ax]
    fixed = dirichlet_dofs(domain, case)
    had_load = np.any(f != 0.0)
    f[fixed] = 0.0
    if had_load and not np.any(f != 0.0):
        log.warning("case %r: all loaded DOFs are Dirichlet-fixed; force vector is zero", case.id)
    return f


def build_domain(nx, ny, nz, h, csg=(), origin=(0.0, 0.0, 0.0)) -> Domain:
    """Domain from grid dimensions and a CSG mask sequence.

    The mask starts full unless the first primitive is an "add", in which
    case it starts empty (union-style construction). Membership is tested at
    element centroids; staircase boundaries are accepted.
    """
    if min(nx, ny, nz) < 1 or h <= 0.0:
        raise BadDimension(f"invalid grid spec nx={nx} ny={ny} nz={nz} h={h}")
    probe = Domain(nx, ny, nz, h, origin=origin)
    prims = [p if isinstance(p, CsgPrimitive) else CsgPrimitive(**p) for p in csg]
    mask = np.ones(probe.n_elems, dtype=bool)
    if prims and prims[0].op == "add":
        mask[:] = False
    pts = probe.elem_centroids()
    for prim in prims:
        inside = prim.contains(pts, probe.tol)
        if prim.op == "add":
            mask |= inside
        elif prim.op == "subtract":
            mask &= ~inside
        else:
            raise ValueError(f"unknown CSG op {prim.op!r}")
    if not mask.any():
        raise EmptyDomain("CSG mask removed every element")
    return Domain(nx, ny, nz, h, design_mask=mask, origin=origin)
