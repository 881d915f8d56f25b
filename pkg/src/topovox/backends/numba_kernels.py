"""Numba implementations of the hot gather/scatter kernels.

All scatter-adds run color-by-color (outer serial loop) with a prange over
the elements of one color, so no two parallel iterations write the same
DOF and the result is bitwise identical for any thread count.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True)
def apply_block24(u, out, elem_dofs, scale, k0, color_perm, color_ptr):
    """out += sum_e scale[e] * scatter(k0 @ gather(u, e))."""
    for c in range(color_ptr.shape[0] - 1):
        for idx in prange(color_ptr[c], color_ptr[c + 1]):
            e = color_perm[idx]
            s = scale[e]
            if s == 0.0:
                continue
            ue = np.empty(24)
            for a in range(24):
                ue[a] = u[elem_dofs[e, a]]
            for a in range(24):
                acc = 0.0
                for b in range(24):
                    acc += k0[a, b] * ue[b]
                out[elem_dofs[e, a]] += s * acc


@njit(cache=True)
def apply_block24_subset(u, out, elem_ids, elem_dofs, scale, k0):
    """Serial variant restricted to the given element ids (deflation setup)."""
    for t in range(elem_ids.shape[0]):
        e = elem_ids[t]
        s = scale[e]
        if s == 0.0:
            continue
        ue = np.empty(24)
        for a in range(24):
            ue[a] = u[elem_dofs[e, a]]
        for a in range(24):
            acc = 0.0
            for b in range(24):
                acc += k0[a, b] * ue[b]
            out[elem_dofs[e, a]] += s * acc


@njit(cache=True)
def diag_block24(out, elem_dofs, scale, k0_diag):
    """out += scatter of the scaled element-matrix diagonal (serial)."""
    n = elem_dofs.shape[0]
    for e in range(n):
        s = scale[e]
        if s == 0.0:
            continue
        for a in range(24):
            out[elem_dofs[e, a]] += s * k0_diag[a]


@njit(cache=True, parallel=True)
def apply_nodal_block8(u, out, elem_dofs, blocks, color_perm, color_ptr):
    """out += scatter of per-element 8x8 nodal blocks acting on each
    displacement component independently (geometric stiffness)."""
    for c in range(color_ptr.shape[0] - 1):
        for idx in prange(color_ptr[c], color_ptr[c + 1]):
            e = color_perm[idx]
            for a in range(3):
                ue = np.empty(8)
                for j in range(8):
                    ue[j] = u[elem_dofs[e, 3 * j + a]]
                for i in range(8):
                    acc = 0.0
                    for j in range(8):
                        acc += blocks[e, i, j] * ue[j]
                    out[elem_dofs[e, 3 * i + a]] += acc
