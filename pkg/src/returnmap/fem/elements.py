"""Reference elements for plane strain: linear triangle and 8-node serendipity quad."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ReferenceElement:
    name: str
    n_nodes: int
    points: np.ndarray   # (nq, 2) quadrature points
    weights: np.ndarray  # (nq,)
    vtk_type: int

    def shape(self, xi):
        return _SHAPE[self.name](np.atleast_2d(xi))

    def shape_grad(self, xi):
        """Reference gradients ``(nq, 2, n_nodes)``."""
        return _GRAD[self.name](np.atleast_2d(xi))


def gauss_legendre(n: int):
    pts, wts = np.polynomial.legendre.leggauss(n)
    return pts, wts


def tensor_gauss(n: int):
    pts, wts = gauss_legendre(n)
    xi, eta = np.meshgrid(pts, pts, indexing="ij")
    w = np.outer(wts, wts)
    return np.column_stack([xi.ravel(), eta.ravel()]), w.ravel()


def _tri3_shape(x):
    xi, eta = x[:, 0], x[:, 1]
    return np.column_stack([1.0 - xi - eta, xi, eta])


def _tri3_grad(x):
    g = np.array([[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
    return np.broadcast_to(g, (x.shape[0], 2, 3)).copy()


# corner and mid-side node positions, counterclockwise
QUAD8_NODES = np.array([
    [-1, -1], [1, -1], [1, 1], [-1, 1],
    [0, -1], [1, 0], [0, 1], [-1, 0],
], dtype=float)


def _quad8_shape(x):
    xi, eta = x[:, :1], x[:, 1:]
    xn, en = QUAD8_NODES[:, 0], QUAD8_NODES[:, 1]
    corner = 0.25 * (1 + xi * xn) * (1 + eta * en) * (xi * xn + eta * en - 1)
    mid_x = 0.5 * (1 - xi**2) * (1 + eta * en)   # nodes with xn == 0
    mid_y = 0.5 * (1 + xi * xn) * (1 - eta**2)   # nodes with en == 0
    return np.where(xn == 0, mid_x, np.where(en == 0, mid_y, corner))


def _quad8_grad(x):
    xi, eta = x[:, :1], x[:, 1:]
    xn, en = QUAD8_NODES[:, 0], QUAD8_NODES[:, 1]
    c_dxi = 0.25 * xn * (1 + eta * en) * (2 * xi * xn + eta * en)
    c_deta = 0.25 * en * (1 + xi * xn) * (xi * xn + 2 * eta * en)
    mx_dxi = -xi * (1 + eta * en)
    mx_deta = 0.5 * (1 - xi**2) * en
    my_dxi = 0.5 * xn * (1 - eta**2)
    my_deta = -eta * (1 + xi * xn)
    dxi = np.where(xn == 0, mx_dxi, np.where(en == 0, my_dxi, c_dxi))
    deta = np.where(xn == 0, mx_deta, np.where(en == 0, my_deta, c_deta))
    return np.stack([dxi, deta], axis=1)


_SHAPE = {"tri3": _tri3_shape, "quad8": _quad8_shape}
_GRAD = {"tri3": _tri3_grad, "quad8": _quad8_grad}

TRI3 = ReferenceElement("tri3", 3, np.array([[1.0 / 3.0, 1.0 / 3.0]]), np.array([0.5]), vtk_type=5)
_q, _w = tensor_gauss(3)
QUAD8 = ReferenceElement("quad8", 8, _q, _w, vtk_type=23)

ELEMENTS = {"tri3": TRI3, "quad8": QUAD8}


def get_element(etype: str) -> ReferenceElement:
    try:
        return ELEMENTS[etype]
    except KeyError:
        raise ValueError(f"unknown element type {etype!r}; use one of {sorted(ELEMENTS)}") from None


def strain_displacement(ref: ReferenceElement, coords):
    """B matrices and ``weight * detJ`` at the quadrature points.

    ``coords`` has shape ``(ne, n_nodes, 2)``.  Returns ``B`` of shape
    ``(ne, nq, 3, 2 n_nodes)`` mapping element displacements (x1, y1, x2, ...)
    to engineering strain ``(exx, eyy, gamma_xy)``, and ``wdet`` ``(ne, nq)``.
    """
    coords = np.asarray(coords, dtype=float)
    dref = ref.shape_grad(ref.points)                       # (nq, 2, nn)
    jac = np.einsum("qan,enb->eqab", dref, coords)          # (ne, nq, 2, 2)
    detj = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
    if np.any(detj <= 0.0):
        raise ValueError("non-positive Jacobian determinant in mesh")
    inv = np.empty_like(jac)
    inv[..., 0, 0] = jac[..., 1, 1]
    inv[..., 1, 1] = jac[..., 0, 0]
    inv[..., 0, 1] = -jac[..., 0, 1]
    inv[..., 1, 0] = -jac[..., 1, 0]
    inv /= detj[..., None, None]
    dphys = np.einsum("eqab,qbn->eqan", inv, dref)          # (ne, nq, 2, nn)
    ne, nq, _, nn = dphys.shape
    B = np.zeros((ne, nq, 3, 2 * nn))
    B[:, :, 0, 0::2] = dphys[:, :, 0]
    B[:, :, 1, 1::2] = dphys[:, :, 1]
    B[:, :, 2, 0::2] = dphys[:, :, 1]
    B[:, :, 2, 1::2] = dphys[:, :, 0]
    return B, detj * ref.weights
