"""Canonical matrices for the trilinear 8-node hexahedral element.

All elements in a domain are identical cubes of edge ``h``, so a single
unit-modulus stiffness matrix ``k0`` (and companion integration tensors)
serves the whole grid; per-element stiffness is ``occupancy * E * k0 / E_ref``
obtained by scaling. Integration uses full 2x2x2 Gauss quadrature.

Node ordering follows the VTK hexahedron convention, with local node i at
grid offset NODE_OFFSETS[i] from the element's min corner:

    0:(0,0,0) 1:(1,0,0) 2:(1,1,0) 3:(0,1,0)
    4:(0,0,1) 5:(1,0,1) 6:(1,1,1) 7:(0,1,1)

Voigt order for stress/strain is (xx, yy, zz, xy, yz, zx); strain vectors
use engineering shear (gamma = 2*eps), so sigma . eps is the tensor double
contraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NODE_OFFSETS = np.array(
    [
        [0, 0, 0],
        [1, 0, 0],
        [1, 1, 0],
        [0, 1, 0],
        [0, 0, 1],
        [1, 0, 1],
        [1, 1, 1],
        [0, 1, 1],
    ],
    dtype=np.int64,
)

# Local corner signs (xi_i, eta_i, zeta_i) for the shape functions.
_SIGNS = 2.0 * NODE_OFFSETS - 1.0

# sigma_vm^2 = sigma^T VONMISES_Q sigma in Voigt order.
VONMISES_Q = np.array(
    [
        [1.0, -0.5, -0.5, 0.0, 0.0, 0.0],
        [-0.5, 1.0, -0.5, 0.0, 0.0, 0.0],
        [-0.5, -0.5, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 3.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 3.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 3.0],
    ]
)


@dataclass(frozen=True)
class Material:
    """Isotropic linear-elastic material."""

    E: float = 2.0e11
    nu: float = 0.3
    rho: float = 7800.0

    def __post_init__(self):
        if self.E <= 0.0:
            raise ValueError(f"Young's modulus must be positive, got {self.E}")
        if not 0.0 <= self.nu < 0.5:
            raise ValueError(f"Poisson ratio must lie in [0, 0.5), got {self.nu}")
        if self.rho <= 0.0:
            raise ValueError(f"density must be positive, got {self.rho}")


def elasticity_matrix(E: float, nu: float) -> np.ndarray:
    """6x6 isotropic elasticity matrix in Voigt order (engineering shear)."""
    c = E / ((1.0 + nu) * (1.0 - 2.0 * nu))
    D = np.zeros((6, 6))
    D[:3, :3] = c * nu
    D[0, 0] = D[1, 1] = D[2, 2] = c * (1.0 - nu)
    D[3, 3] = D[4, 4] = D[5, 5] = c * (1.0 - 2.0 * nu) / 2.0
    return D


def shape_gradients(xi: float, eta: float, zeta: float) -> np.ndarray:
    """dN/d(xi,eta,zeta) for the 8 trilinear shape functions, shape (8, 3)."""
    g = np.empty((8, 3))
    for i in range(8):
        sx, sy, sz = _SIGNS[i]
        g[i, 0] = sx * (1.0 + sy * eta) * (1.0 + sz * zeta) / 8.0
        g[i, 1] = sy * (1.0 + sx * xi) * (1.0 + sz * zeta) / 8.0
        g[i, 2] = sz * (1.0 + sx * xi) * (1.0 + sy * eta) / 8.0
    return g


def _b_matrix(dndx: np.ndarray) -> np.ndarray:
    """Strain-displacement matrix (6, 24) from physical shape gradients (8, 3)."""
    B = np.zeros((6, 24))
    for i in range(8):
        bx, by, bz = dndx[i]
        c = 3 * i
        B[0, c] = bx
        B[1, c + 1] = by
        B[2, c + 2] = bz
        B[3, c] = by
        B[3, c + 1] = bx
        B[4, c + 1] = bz
        B[4, c + 2] = by
        B[5, c] = bz
        B[5, c + 2] = bx
    return B


def gauss_points() -> np.ndarray:
    """The 8 Gauss points of the 2x2x2 rule (unit weights), shape (8, 3)."""
    a = 1.0 / np.sqrt(3.0)
    return a * _SIGNS.copy()


def hex_stiffness(material: Material, h: float) -> np.ndarray:
    """Element stiffness (24, 24) for a cube of edge h, full quadrature.

    Scales linearly in E and linearly in h. Symmetric positive semidefinite
    with the six rigid-body modes as nullspace.
    """
    if h <= 0.0:
        raise ValueError(f"edge length must be positive, got {h}")
    D = elasticity_matrix(material.E, material.nu)
    detJ = (h / 2.0) ** 3
    k = np.zeros((24, 24))
    for xi, eta, zeta in gauss_points():
        dndx = shape_gradients(xi, eta, zeta) * (2.0 / h)
        B = _b_matrix(dndx)
        k += B.T @ D @ B * detJ
    return 0.5 * (k + k.T)


def centroid_b_matrix(h: float) -> np.ndarray:
    """Strain-displacement matrix (6, 24) evaluated at the element centroid."""
    dndx = shape_gradients(0.0, 0.0, 0.0) * (2.0 / h)
    return _b_matrix(dndx)


def geometric_tensor(h: float) -> np.ndarray:
    """Integration tensor A[p, q, i, j] = sum_gp dNi/dxp * dNj/dxq * detJ.

    Contracting a (constant) element stress tensor against (p, q) gives the
    8x8 nodal block of the initial-stress matrix; the full 24x24 element
    matrix is that block replicated on each displacement component.
    """
    detJ = (h / 2.0) ** 3
    A = np.zeros((3, 3, 8, 8))
    for xi, eta, zeta in gauss_points():
        dndx = shape_gradients(xi, eta, zeta) * (2.0 / h)
        A += np.einsum("ip,jq->pqij", dndx, dndx) * detJ
    return A


def voigt_to_tensor(v: np.ndarray) -> np.ndarray:
    """Symmetric 3x3 tensor from a Voigt 6-vector (xx, yy, zz, xy, yz, zx)."""
    return np.array(
        [
            [v[0], v[3], v[5]],
            [v[3], v[1], v[4]],
            [v[5], v[4], v[2]],
        ]
    )


def von_mises(stress_voigt: np.ndarray) -> np.ndarray:
    """Von Mises stress for Voigt stress rows (..., 6)."""
    s = np.asarray(stress_voigt)
    q = np.einsum("...i,ij,...j->...", s, VONMISES_Q, s)
    return np.sqrt(np.maximum(q, 0.0))
