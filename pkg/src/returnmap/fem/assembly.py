"""Internal forces, tangent stiffness and loads for plane-strain meshes.

Quadrature-point history (plastic strain and hardening variable) lives in
:class:`QuadratureState`.  Evaluating the operators never touches it; the
caller decides when a new state is committed.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .. import tensors as tn
from ..state import CorrectorFailure, PointUpdate, integrate
from .elements import get_element, strain_displacement
from .mesh import BoundaryTag, Mesh


@dataclass
class DofSystem:
    """Two displacement unknowns per node, ordered (u_x, u_y) node by node."""

    n_nodes: int
    fixed: np.ndarray  # bool mask over all 2 n_nodes dofs

    def __post_init__(self):
        self.fixed = np.asarray(self.fixed, dtype=bool)
        self.free = np.flatnonzero(~self.fixed)
        self.free_index = np.full(2 * self.n_nodes, -1, dtype=np.int64)
        self.free_index[self.free] = np.arange(len(self.free))

    @classmethod
    def from_mesh(cls, mesh: Mesh) -> "DofSystem":
        """Bottom nodes fully fixed; left and right sides fixed horizontally."""
        fixed = np.zeros((mesh.n_nodes, 2), dtype=bool)
        bottom = mesh.tags == BoundaryTag.BOTTOM
        sides = (mesh.tags == BoundaryTag.LEFT) | (mesh.tags == BoundaryTag.RIGHT)
        fixed[bottom] = True
        fixed[sides, 0] = True
        return cls(mesh.n_nodes, fixed.ravel())

    @property
    def n_free(self) -> int:
        return len(self.free)

    def expand(self, u_free):
        u = np.zeros(2 * self.n_nodes)
        u[self.free] = u_free
        return u

    def restrict(self, u_full):
        return np.asarray(u_full)[self.free]


@dataclass
class QuadratureState:
    """Committed history at every integration point (flattened element-major)."""

    eps_p: np.ndarray
    eps_bar_p: np.ndarray
    delta_lambda: np.ndarray
    kind: np.ndarray

    @classmethod
    def zeros(cls, n_points: int) -> "QuadratureState":
        return cls(np.zeros((n_points, 6)), np.zeros(n_points), np.zeros(n_points),
                   np.zeros(n_points, dtype=np.int8))

    @classmethod
    def from_update(cls, update: PointUpdate) -> "QuadratureState":
        return cls(update.eps_p.copy(), np.array(update.eps_bar_p, dtype=float),
                   np.array(update.delta_lambda, dtype=float), np.array(update.kind))

    def copy(self) -> "QuadratureState":
        return QuadratureState(self.eps_p.copy(), self.eps_bar_p.copy(),
                               self.delta_lambda.copy(), self.kind.copy())

    def __len__(self):
        return len(self.eps_bar_p)


def _concat(parts) -> PointUpdate:
    fields = {}
    for name in ("sigma", "tangent", "eps_p", "eps_bar_p", "delta_lambda", "kind"):
        values = [getattr(p, name) for p in parts]
        fields[name] = None if values[0] is None else np.concatenate(values)
    return PointUpdate(**fields)


def _voigt_stress(sigma):
    return sigma @ tn.PLANE


def _voigt_tangent(T):
    return np.einsum("ia,nij,jb->nab", tn.PLANE, T, tn.PLANE)


class Assembler:
    """Vectorized evaluation of F(u) and K(u) on the free dofs of a mesh.

    The material is any object with ``moduli`` and
    ``return_map(trial, tangent)``.  With ``threads > 1`` the constitutive
    update runs in contiguous chunks on a thread pool; results are gathered
    in a fixed order, so the output does not depend on the thread count.
    """

    def __init__(self, mesh: Mesh, dofs: DofSystem, material, threads: int = 1):
        self.mesh = mesh
        self.dofs = dofs
        self.material = material
        self.threads = max(1, int(threads))
        self.ref = get_element(mesh.etype)
        self.B, self.wdet = strain_displacement(self.ref, mesh.element_coords())
        ne, nq = self.wdet.shape
        self.n_points = ne * nq
        nodes = mesh.elements
        self.edofs = np.stack([2 * nodes, 2 * nodes + 1], axis=-1).reshape(ne, -1)
        self._pattern()

    def _pattern(self):
        fi = self.dofs.free_index[self.edofs]                   # (ne, nd)
        nf = self.dofs.n_free
        rows = np.broadcast_to(fi[:, :, None], fi.shape + fi.shape[1:])
        cols = np.broadcast_to(fi[:, None, :], rows.shape)
        mask = (rows >= 0) & (cols >= 0)
        self._kmask = mask.ravel()
        keys = rows.ravel()[self._kmask] * nf + cols.ravel()[self._kmask]
        ukeys, self._kinv = np.unique(keys, return_inverse=True)
        self._kinv = self._kinv.ravel()
        r, c = np.divmod(ukeys, nf)
        self._indices = c.astype(np.int32)
        self._indptr = np.searchsorted(r, np.arange(nf + 1)).astype(np.int32)
        self._fmask = (fi >= 0).ravel()
        self._fidx = fi.ravel()[self._fmask]

    def scatter_vector(self, fe):
        """Sum element vectors ``(ne, nd)`` into the free-dof vector."""
        return np.bincount(self._fidx, weights=fe.ravel()[self._fmask], minlength=self.dofs.n_free)

    def scatter_matrix(self, ke):
        """Sum element matrices ``(ne, nd, nd)`` into a CSR matrix on the free dofs."""
        data = np.bincount(self._kinv, weights=ke.ravel()[self._kmask], minlength=len(self._indices))
        nf = self.dofs.n_free
        return sp.csr_matrix((data, self._indices, self._indptr), shape=(nf, nf))

    def strain(self, u_free):
        """Mandel strains at all integration points, shape ``(ne * nq, 6)``."""
        ue = self.dofs.expand(u_free)[self.edofs]
        eng = np.einsum("eqid,ed->eqi", self.B, ue).reshape(-1, 3)
        return tn.engineering_to_mandel(eng)

    def _integrate(self, eps, states: QuadratureState, tangent: bool) -> PointUpdate:
        n = len(eps)
        if self.threads == 1 or n < 2 * self.threads:
            return self._integrate_chunk(eps, states, slice(0, n), tangent)
        bounds = np.linspace(0, n, self.threads + 1).astype(int)
        chunks = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(self.threads) as pool:
            parts = list(pool.map(lambda s: self._integrate_chunk(eps, states, s, tangent), chunks))
        return _concat(parts)

    def _integrate_chunk(self, eps, states, chunk, tangent):
        try:
            return integrate(self.material, eps[chunk], states.eps_p[chunk],
                             states.eps_bar_p[chunk], tangent=tangent)
        except CorrectorFailure as exc:
            nq = self.wdet.shape[1]
            for k in range(chunk.start, chunk.stop):
                try:
                    integrate(self.material, eps[k:k + 1], states.eps_p[k:k + 1],
                              states.eps_bar_p[k:k + 1], tangent=False)
                except CorrectorFailure:
                    raise CorrectorFailure(
                        f"element {k // nq}, integration point {k % nq}: {exc}") from exc
            raise

    def evaluate(self, u_free, states: QuadratureState, tangent: bool = True):
        """Internal force, tangent (or None) and the uncommitted point update."""
        update = self._integrate(self.strain(u_free), states, tangent)
        ne, nq = self.wdet.shape
        sig = _voigt_stress(update.sigma).reshape(ne, nq, 3) * self.wdet[..., None]
        fe = np.einsum("eqid,eqi->ed", self.B, sig)
        F = self.scatter_vector(fe)
        if not tangent:
            return F, None, update
        D = _voigt_tangent(update.tangent).reshape(ne, nq, 3, 3) * self.wdet[..., None, None]
        DB = np.einsum("eqij,eqjd->eqid", D, self.B)
        ke = np.einsum("eqic,eqid->ecd", self.B, DB)
        return F, self.scatter_matrix(ke), update

    def gravity_load(self, unit_weight: float):
        """Body force (0, -unit_weight) per unit area on the free dofs."""
        N = self.ref.shape(self.ref.points)                   # (nq, nn)
        fy = -unit_weight * np.einsum("qn,eq->en", N, self.wdet)
        fe = np.zeros(self.edofs.shape)
        fe[:, 1::2] = fy
        return self.scatter_vector(fe)


def assemble(mesh: Mesh, dofs: DofSystem, u_free, material, states: QuadratureState,
             threads: int = 1):
    """One-shot evaluation returning ``(F, K, new_states)``."""
    F, K, update = Assembler(mesh, dofs, material, threads).evaluate(u_free, states)
    return F, K, QuadratureState.from_update(update)


def element_arrays(etype: str, coords, u_elem, material, states: QuadratureState | None = None):
    """Internal force vector and tangent of a single unconstrained element."""
    coords = np.asarray(coords, dtype=float)
    mesh = Mesh(coords, np.arange(len(coords))[None, :], etype,
                tags=np.zeros(len(coords), dtype=np.int8))
    dofs = DofSystem(len(coords), np.zeros(2 * len(coords), dtype=bool))
    asm = Assembler(mesh, dofs, material)
    if states is None:
        states = QuadratureState.zeros(asm.n_points)
    F, K, update = asm.evaluate(np.asarray(u_elem, dtype=float), states)
    return F, K.toarray(), QuadratureState.from_update(update)
