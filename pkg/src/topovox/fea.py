"""Matrix-free linear elasticity on the voxel grid.

The global stiffness is never assembled: ``StiffnessOperator.apply`` loops
elements, gathers 24 displacement entries, multiplies by the one canonical
element matrix scaled by occupancy, and scatters. Static solves use Jacobi
preconditioned conjugate gradients, optionally deflated with per-block
rigid-body modes. A dense assembly path exists solely as a test oracle and
refuses systems above 3000 DOFs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from . import backends
from .elements import Material, centroid_b_matrix, elasticity_matrix, hex_stiffness, von_mises
from .errors import DimensionMismatch, NoConvergence, SingularSystem
from .mesh import Domain, Topology

log = logging.getLogger(__name__)

DENSE_ORACLE_DOF_LIMIT = 3000


class StiffnessOperator:
    """Implicit K = sum_e occupancy_e * k0 with homogeneous Dirichlet DOFs."""

    def __init__(self, domain: Domain, topology: Topology, material: Material, dirichlet=()):
        self.domain = domain
        self.topology = topology
        self.material = material
        self.k0 = hex_stiffness(material, domain.h)
        self.dirichlet = np.asarray(np.unique(dirichlet), dtype=np.int64)
        self.free_mask = np.ones(domain.n_dofs, dtype=bool)
        self.free_mask[self.dirichlet] = False
        ix, iy, iz = domain.elem_grid_coords()
        self._color_perm, self._color_ptr = backends.element_coloring(ix, iy, iz)
        self._diag = None

    @property
    def n_dofs(self) -> int:
        return self.domain.n_dofs

    def apply(self, u: np.ndarray, raw: bool = False) -> np.ndarray:
        """K @ u. With raw=True the Dirichlet rows/columns are kept
        (needed for lifting inhomogeneous boundary data)."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n_dofs,):
            raise DimensionMismatch(f"expected {self.n_dofs} DOFs, got {u.shape}")
        if not raw and self.dirichlet.size:
            u = u.copy()
            u[self.dirichlet] = 0.0
        out = np.zeros(self.n_dofs)
        backends.apply_block24(
            u, out, self.domain.elem_dofs, self.topology.occupancy, self.k0,
            self._color_perm, self._color_ptr,
        )
        if not raw and self.dirichlet.size:
            out[self.dirichlet] = 0.0
        return out

    def apply_subset(self, u: np.ndarray, elems: np.ndarray) -> np.ndarray:
        """K @ u using only the listed elements (local deflation columns)."""
        out = np.zeros(self.n_dofs)
        backends.apply_block24_subset(
            u, out, np.asarray(elems, dtype=np.int64), self.domain.elem_dofs,
            self.topology.occupancy, self.k0,
        )
        if self.dirichlet.size:
            out[self.dirichlet] = 0.0
        return out

    def diagonal(self) -> np.ndarray:
        """diag(K), computed assembly-free; cached."""
        if self._diag is None:
            d = np.zeros(self.n_dofs)
            backends.diag_block24(d, self.domain.elem_dofs, self.topology.occupancy,
                                  np.diag(self.k0).copy())
            self._diag = d
        return self._diag


@dataclass
class SolveResult:
    u: np.ndarray
    iterations: int
    residual: float


class DeflationSpace:
    """Per-agglomerate rigid-body deflation basis.

    The voxel grid is partitioned into cubic blocks of ``block`` elements
    per side; each block holding at least one solid element contributes up
    to six rigid-body vectors supported on its structural nodes, zeroed on
    Dirichlet DOFs and orthonormalized per block. The coarse operator
    E = W^T K W is prepared lazily against a concrete StiffnessOperator.
    """

    def __init__(self, domain: Domain, topology: Topology, dirichlet=(), block: int = 4):
        if block < 2:
            raise ValueError(f"agglomerate side must be >= 2, got {block}")
        self.domain = domain
        self.block = int(block)
        self._prepared_for = None
        self._build_basis(topology, np.asarray(np.unique(dirichlet), dtype=np.int64))

    def _build_basis(self, topology: Topology, dirichlet: np.ndarray):
        dom = self.domain
        b = self.block
        fixed = np.zeros(dom.n_dofs, dtype=bool)
        fixed[dirichlet] = True

        solid = (topology.occupancy == 1.0) & dom.design_mask
        # nodes adjacent to at least one solid element
        structural = np.zeros(dom.n_nodes, dtype=bool)
        node_ids = dom.elem_dofs[solid][:, ::3] // 3
        structural[node_ids.ravel()] = True

        ix, iy, iz = dom.elem_grid_coords()
        bid = (ix // b) + (ix.max() // b + 1) * ((iy // b) + (iy.max() // b + 1) * (iz // b))
        coords = dom.node_coords()

        cols_i, cols_j, cols_v = [], [], []
        self.block_elems = []  # per kept block: elements for the local K apply
        ncols = 0
        nxe, nye = dom.nx, dom.ny
        for blk in np.unique(bid):
            elems = np.flatnonzero(bid == blk)
            if not solid[elems].any():
                continue
            nodes = np.unique(dom.elem_dofs[elems][:, ::3] // 3)
            nodes = nodes[structural[nodes]]
            if nodes.size == 0:
                continue
            c = coords[nodes].mean(axis=0)
            rel = coords[nodes] - c
            nn = nodes.size
            basis = np.zeros((3 * nn, 6))
            basis[0::3, 0] = 1.0
            basis[1::3, 1] = 1.0
            basis[2::3, 2] = 1.0
            basis[1::3, 3] = -rel[:, 2]  # rotation about x
            basis[2::3, 3] = rel[:, 1]
            basis[0::3, 4] = rel[:, 2]  # rotation about y
            basis[2::3, 4] = -rel[:, 0]
            basis[0::3, 5] = -rel[:, 1]  # rotation about z
            basis[1::3, 5] = rel[:, 0]
            dofs = (3 * nodes[:, None] + np.arange(3)[None, :]).ravel()
            basis[fixed[dofs]] = 0.0
            q, r = np.linalg.qr(basis)
            keep = np.abs(np.diag(r)) > 1e-10 * max(np.abs(np.diag(r)).max(), 1e-300)
            q = q[:, keep]
            if q.shape[1] == 0:
                continue
            # elements whose nodes can overlap this block's nodes
            ex0, ex1 = max(ix[elems].min() - 1, 0), min(ix[elems].max() + 1, nxe - 1)
            ey0, ey1 = max(iy[elems].min() - 1, 0), min(iy[elems].max() + 1, nye - 1)
            ez0, ez1 = max(iz[elems].min() - 1, 0), min(iz[elems].max() + 1, dom.nz - 1)
            near = (
                (ix >= ex0) & (ix <= ex1) & (iy >= ey0) & (iy <= ey1) & (iz >= ez0) & (iz <= ez1)
            )
            near_ids = np.flatnonzero(near)
            for j in range(q.shape[1]):
                cols_i.append(dofs)
                cols_j.append(np.full(dofs.size, ncols + j, dtype=np.int64))
                cols_v.append(q[:, j])
                self.block_elems.append(near_ids)
            ncols += q.shape[1]

        self.n_vectors = ncols
        if ncols == 0:
            self.W = None
            return
        self.W = scipy.sparse.csc_matrix(
            (np.concatenate(cols_v), (np.concatenate(cols_i), np.concatenate(cols_j))),
            shape=(dom.n_dofs, ncols),
        )

    def prepare(self, op: StiffnessOperator) -> None:
        """Compute KW and factorize E = W^T K W for the given operator."""
        if self.W is None or self._prepared_for is op:
            return
        cols = []
        for j in range(self.n_vectors):
            w = np.zeros(op.n_dofs)
            start, stop = self.W.indptr[j], self.W.indptr[j + 1]
            w[self.W.indices[start:stop]] = self.W.data[start:stop]
            kw = op.apply_subset(w, self.block_elems[j])
            cols.append(scipy.sparse.csc_matrix(kw.reshape(-1, 1)))
        self.KW = scipy.sparse.hstack(cols, format="csc")
        E = np.asarray((self.W.T @ self.KW).todense())
        E = 0.5 * (E + E.T)
        try:
            self._chol = scipy.linalg.cho_factor(E)
            self._pinv = None
        except scipy.linalg.LinAlgError:
            log.warning("deflation coarse matrix not SPD; falling back to pseudo-inverse")
            self._chol = None
            self._pinv = np.linalg.pinv(E)
        self._prepared_for = op

    def coarse_solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._chol is not None:
            return scipy.linalg.cho_solve(self._chol, rhs)
        return self._pinv @ rhs


def build_deflation(domain: Domain, topology: Topology, dirichlet=(), block: int = 4) -> DeflationSpace:
    return DeflationSpace(domain, topology, dirichlet, block)


def solve_static(
    op: StiffnessOperator,
    f: np.ndarray,
    tol: float = 1.0e-8,
    max_iters: int | None = None,
    deflation: DeflationSpace | None = None,
    apply_op=None,
    diag=None,
) -> SolveResult:
    """Solve K u = f to a relative residual on the free DOFs.

    apply_op/diag override the operator action (used for shifted solves in
    the eigen module); deflation is skipped when it carries no vectors.
    """
    if not 0.0 < tol <= 1.0e-2:
        raise ValueError(f"tolerance must lie in (0, 1e-2], got {tol}")
    f = np.asarray(f, dtype=float)
    if f.shape != (op.n_dofs,):
        raise DimensionMismatch(f"force vector has {f.shape}, expected ({op.n_dofs},)")
    if not np.all(np.isfinite(f)):
        raise ValueError("force vector is not finite")
    A = apply_op if apply_op is not None else op.apply
    d = diag if diag is not None else op.diagonal()

    free = op.free_mask
    fnorm = np.linalg.norm(f[free])
    if fnorm == 0.0:
        return SolveResult(np.zeros(op.n_dofs), 0, 0.0)
    if np.any(d[free] == 0.0):
        raise SingularSystem("zero stiffness diagonal on a loaded free DOF")
    inv_d = np.zeros(op.n_dofs)
    inv_d[free] = 1.0 / d[free]

    if max_iters is None:
        max_iters = max(200, int(10 * np.sqrt(op.n_dofs)))

    defl = deflation if (deflation is not None and deflation.W is not None) else None
    if defl is not None:
        defl.prepare(op)

        def project_out(v):
            return defl.W @ defl.coarse_solve(np.asarray(defl.KW.T @ v).ravel())

        x = defl.W @ defl.coarse_solve(np.asarray(defl.W.T @ f).ravel())
        x = np.asarray(x).ravel()
    else:
        x = np.zeros(op.n_dofs)

    r = f - A(x) if np.any(x) else f.copy()
    r[~free] = 0.0
    res = np.linalg.norm(r) / fnorm
    if res <= tol:
        return SolveResult(x, 0, res)

    z = inv_d * r
    p = z - project_out(z) if defl is not None else z.copy()
    rz = r @ z
    iters = 0
    for iters in range(1, max_iters + 1):
        q = A(p)
        alpha = rz / (p @ q)
        x += alpha * p
        r -= alpha * q
        res = np.linalg.norm(r) / fnorm
        if res <= tol:
            break
        z = inv_d * r
        rz_new = r @ z
        beta = rz_new / rz
        rz = rz_new
        if defl is not None:
            p = z + beta * p - project_out(z)
        else:
            p = z + beta * p
    else:
        raise NoConvergence(
            f"CG did not reach {tol:g} in {max_iters} iterations (residual {res:.3e})",
            residual=res,
            iterations=max_iters,
        )
    x[~free] = 0.0
    return SolveResult(x, iters, res)


def batch_element_state(op: StiffnessOperator, u: np.ndarray):
    """Centroid strain/stress (Voigt, engineering shear) and von Mises for
    every element, with ersatz scaling folded into the stress."""
    B = centroid_b_matrix(op.domain.h)
    D = elasticity_matrix(op.material.E, op.material.nu)
    strains = u[op.domain.elem_dofs] @ B.T
    stresses = (strains @ D.T) * op.topology.occupancy[:, None]
    return strains, stresses, von_mises(stresses)


def element_state(op: StiffnessOperator, u: np.ndarray, e: int):
    """(strain tensor, stress tensor, von Mises) for one element."""
    from .elements import voigt_to_tensor

    strains, stresses, vm = batch_element_state(op, u)
    eps = voigt_to_tensor(strains[e])
    eps[0, 1] = eps[1, 0] = strains[e][3] / 2.0
    eps[1, 2] = eps[2, 1] = strains[e][4] / 2.0
    eps[0, 2] = eps[2, 0] = strains[e][5] / 2.0
    return eps, voigt_to_tensor(stresses[e]), float(vm[e])


def dense_stiffness(op: StiffnessOperator) -> np.ndarray:
    """Assembled K (raw, no Dirichlet) — test oracle, small systems only."""
    if op.n_dofs > DENSE_ORACLE_DOF_LIMIT:
        raise ValueError(f"dense oracle limited to {DENSE_ORACLE_DOF_LIMIT} DOFs")
    K = np.zeros((op.n_dofs, op.n_dofs))
    for e in range(op.domain.n_elems):
        dofs = op.domain.elem_dofs[e]
        K[np.ix_(dofs, dofs)] += op.topology.occupancy[e] * op.k0
    return K


def dense_solve(op: StiffnessOperator, f: np.ndarray) -> np.ndarray:
    """Direct solve on the free DOFs via Cholesky — test oracle."""
    K = dense_stiffness(op)
    free = op.free_mask
    u = np.zeros(op.n_dofs)
    c = scipy.linalg.cho_factor(K[np.ix_(free, free)])
    u[free] = scipy.linalg.cho_solve(c, f[free])
    return u
