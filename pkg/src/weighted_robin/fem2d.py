"""P1 finite elements for the weighted Robin and Steklov problems on planar meshes.

Weighted volume terms use the three-edge-midpoint rule (exact for quadratics),
boundary terms two-point Gauss per edge.  With h = 0 this reduces to the
classical P1 stiffness and consistent mass matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .mesh import Mesh
from .weights import WeightProfile


class AssemblyError(RuntimeError):
    """Mass matrix not positive definite; usually a broken mesh."""


@dataclass(frozen=True)
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    kind: str
    alpha: float | None
    profile: str
    mesh: str

    def __len__(self):
        return len(self.eigenvalues)


@dataclass(frozen=True)
class Parts:
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    boundary_mass: sp.csr_matrix


def _midpoints(mesh: Mesh):
    p = mesh.nodes[mesh.triangles]
    # midpoint q sits opposite vertex q
    return np.stack([(p[:, 1] + p[:, 2]) / 2, (p[:, 2] + p[:, 0]) / 2, (p[:, 0] + p[:, 1]) / 2], axis=1)


def _radial_weight(profile: WeightProfile, pts):
    return profile.weight(np.linalg.norm(pts, axis=-1))


def assemble_parts(mesh: Mesh, profile: WeightProfile) -> Parts:
    """Weighted stiffness, weighted mass and weighted boundary mass."""
    tri = mesh.triangles
    p = mesh.nodes[tri]
    area = mesh.signed_areas()
    wq = _radial_weight(profile, _midpoints(mesh))  # (T, 3)

    # gradients of barycentric functions
    x, y = p[:, :, 0], p[:, :, 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1) / (2 * area[:, None])
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1) / (2 * area[:, None])
    wbar = wq.mean(axis=1)
    Ke = (wbar * area)[:, None, None] * (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :])

    # phi_a(mid_q) = 1/2 unless a == q
    phi = 0.5 * (1.0 - np.eye(3))  # [q, a]
    Me = (area / 3.0)[:, None, None] * np.einsum("tq,qa,qb->tab", wq, phi, phi)

    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    n = mesh.n_nodes
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((Me.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    e = mesh.boundary_edges
    pe = mesh.nodes[e]
    L = mesh.edge_lengths()
    g = 0.5 / np.sqrt(3.0)
    s = np.array([0.5 - g, 0.5 + g])
    pts = pe[:, None, 0] * (1 - s)[None, :, None] + pe[:, None, 1] * s[None, :, None]  # (E, 2, 2)
    we = _radial_weight(profile, pts)  # (E, 2)
    psi = np.stack([1 - s, s], axis=1)  # [q, a]
    Be = (L / 2.0)[:, None, None] * np.einsum("eq,qa,qb->eab", we, psi, psi)
    brow = np.repeat(e, 2, axis=1).ravel()
    bcol = np.tile(e, (1, 2)).ravel()
    B = sp.coo_matrix((Be.ravel(), (brow, bcol)), shape=(n, n)).tocsr()
    return Parts(_sym(K), _sym(M), _sym(B))


def _sym(A):
    return ((A + A.T) * 0.5).tocsr()


def assemble(mesh: Mesh, profile: WeightProfile, alpha: float):
    """(K, M) with K = weighted stiffness + alpha * weighted boundary mass."""
    parts = assemble_parts(mesh, profile)
    return (parts.stiffness + alpha * parts.boundary_mass).tocsr(), parts.mass


def _eigh(K, M, count):
    try:
        vals, vecs = la.eigh(K, M, subset_by_index=[0, count - 1], driver="gvx")
    except la.LinAlgError as exc:
        raise AssemblyError(f"generalized eigensolve failed: {exc}") from exc
    return vals, vecs


def _fix_signs(vecs, weights):
    """Deterministic eigenvector signs: largest-magnitude weighted entry positive."""
    out = vecs.copy()
    for k in range(out.shape[1]):
        v = out[:, k]
        i = int(np.argmax(np.abs(v) * weights))
        if v[i] < 0:
            out[:, k] = -v
    return out


def solve_robin(mesh: Mesh, profile: WeightProfile, alpha: float, count: int = 3, parts: Parts | None = None) -> EigenResult:
    """Smallest `count` eigenpairs of K v = lam M v (dense), M-orthonormal."""
    if count < 2:
        raise ValueError("count must be >= 2")
    parts = parts or assemble_parts(mesh, profile)
    K = (parts.stiffness + alpha * parts.boundary_mass).toarray()
    M = parts.mass.toarray()
    count = min(count, mesh.n_nodes)
    vals, vecs = _eigh(K, M, count)
    vecs = _fix_signs(vecs, np.ones(len(vecs)))
    return EigenResult(vals, vecs, "robin", float(alpha), profile.spec, mesh.name)


def solve_steklov(mesh: Mesh, profile: WeightProfile, count: int = 3, parts: Parts | None = None) -> EigenResult:
    """Smallest `count` Steklov eigenpairs K v = sigma B v.

    Interior unknowns are condensed out (discrete harmonic extension), which
    leaves the symmetric pencil (S, B_bb) on boundary nodes with S the
    Schur complement.  Index 0 is the constant mode (sigma = 0).
    """
    if count < 2:
        raise ValueError("count must be >= 2")
    parts = parts or assemble_parts(mesh, profile)
    K = parts.stiffness.tocsc()
    bnd = mesh.boundary_nodes
    mask = np.zeros(mesh.n_nodes, dtype=bool)
    mask[bnd] = True
    inn = np.flatnonzero(~mask)
    Kbb = K[bnd][:, bnd].toarray()
    Kbi = K[bnd][:, inn]
    Kii = K[inn][:, inn].tocsc()
    lu = splu(Kii)
    X = lu.solve(Kbi.T.toarray())  # K_ii^{-1} K_ib
    S = Kbb - Kbi @ X
    S = 0.5 * (S + S.T)
    Bbb = parts.boundary_mass[bnd][:, bnd].toarray()
    count = min(count, len(bnd))
    vals, vb = _eigh(S, Bbb, count)
    vecs = np.zeros((mesh.n_nodes, count))
    vecs[bnd] = vb
    vecs[inn] = -X @ vb
    vecs = _fix_signs(vecs, mask.astype(float))
    return EigenResult(vals, vecs, "steklov", None, profile.spec, mesh.name)


def first_nonzero_steklov(result: EigenResult) -> float:
    return float(result.eigenvalues[1])


def residuals(result: EigenResult, mesh: Mesh, profile: WeightProfile) -> np.ndarray:
    """||K v - lam M v|| / ||v|| per returned pair."""
    parts = assemble_parts(mesh, profile)
    if result.kind == "robin":
        K, M = parts.stiffness + result.alpha * parts.boundary_mass, parts.mass
    else:
        K, M = parts.stiffness, parts.boundary_mass
    out = []
    for lam, v in zip(result.eigenvalues, result.eigenvectors.T):
        out.append(np.linalg.norm(K @ v - lam * (M @ v)) / np.linalg.norm(v))
    return np.array(out)


def integrate_over_domain(mesh: Mesh, profile: WeightProfile, f) -> float:
    """Midpoint-rule quadrature of f(|x|) e^{h(|x|)} over the mesh."""
    mids = _midpoints(mesh)
    r = np.linalg.norm(mids, axis=-1)
    vals = np.asarray(f(r), dtype=float) * profile.weight(r)
    vals = np.broadcast_to(vals, r.shape)
    return float(np.sum(mesh.signed_areas() / 3.0 * vals.sum(axis=1)))


def interpolate(mesh: Mesh, fn) -> np.ndarray:
    """Nodal values of fn(x, y)."""
    return np.asarray(fn(mesh.nodes[:, 0], mesh.nodes[:, 1]), dtype=float)


def write_spectrum(path, result: EigenResult) -> None:
    with open(path, "w") as fh:
        fh.write("index,eigenvalue\n")
        for i, v in enumerate(result.eigenvalues):
            fh.write(f"{i},{v:.17g}\n")
