"""Pure-numpy fallbacks for the hot kernels.

np.add.at accumulates duplicate indices unbuffered, so these are exact
drop-ins for the numba kernels; the coloring arguments are accepted for
signature compatibility but not needed.
"""

import numpy as np


def apply_block24(u, out, elem_dofs, scale, k0, color_perm, color_ptr):
    fe = (u[elem_dofs] @ k0) * scale[:, None]
    np.add.at(out, elem_dofs, fe)


def apply_block24_subset(u, out, elem_ids, elem_dofs, scale, k0):
    ed = elem_dofs[elem_ids]
    fe = (u[ed] @ k0) * scale[elem_ids, None]
    np.add.at(out, ed, fe)


def diag_block24(out, elem_dofs, scale, k0_diag):
    np.add.at(out, elem_dofs, scale[:, None] * k0_diag[None, :])


def apply_nodal_block8(u, out, elem_dofs, blocks, color_perm, color_ptr):
    dofs = elem_dofs.reshape(-1, 8, 3)
    ue = u[dofs]  # (n, 8, 3)
    fe = np.einsum("eij,eja->eia", blocks, ue)
    np.add.at(out, dofs, fe)
