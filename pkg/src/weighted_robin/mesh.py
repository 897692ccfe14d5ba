"""Origin-symmetric star-shaped planar domains and their mapped-disk triangulations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

TWO_PI = 2.0 * math.pi


class DomainParameterError(ValueError):
    pass


class MeshError(RuntimeError):
    pass


@dataclass(frozen=True)
class StarDomain:
    """Domain {r * rho(theta) (cos theta, sin theta) : 0 <= r < 1}.

    `boundary` maps a parameter t in [0, 2 pi) to a boundary point and must
    satisfy boundary(t + pi) = -boundary(t).  Rings of the mesh sample t
    uniformly, so the parametrisation controls node placement (corners of
    the rectangle sit at t = pi/4 + k pi/2).
    """

    name: str
    params: tuple[float, ...]
    rho: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    boundary: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)

    @property
    def spec(self) -> str:
        return f"{self.name}:" + ",".join(f"{p:g}" for p in self.params)

    def symmetry_defect(self, n: int = 720) -> float:
        th = np.linspace(0.0, TWO_PI, n, endpoint=False)
        return float(np.max(np.abs(self.rho(th + math.pi) - self.rho(th))))


def _polar_boundary(rho):
    def boundary(t):
        t = np.asarray(t, dtype=float)
        r = rho(t)
        return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

    return boundary


def _disk(R):
    rho = lambda th: np.full_like(np.asarray(th, dtype=float), R)
    return rho, _polar_boundary(rho)


def _ellipse(a, b):
    def rho(th):
        th = np.asarray(th, dtype=float)
        return a * b / np.sqrt((b * np.cos(th)) ** 2 + (a * np.sin(th)) ** 2)

    def boundary(t):
        t = np.asarray(t, dtype=float)
        return np.stack([a * np.cos(t), b * np.sin(t)], axis=-1)

    return rho, boundary


def _rectangle(a, b):
    """Half-widths a, b.  Edges are traversed at constant speed in t."""

    def rho(th):
        th = np.asarray(th, dtype=float)
        c, s = np.abs(np.cos(th)), np.abs(np.sin(th))
        with np.errstate(divide="ignore"):
            return np.minimum(np.where(c > 0, a / c, np.inf), np.where(s > 0, b / s, np.inf))

    q = math.pi / 4

    def boundary(t):
        t = np.mod(np.asarray(t, dtype=float) + q, TWO_PI)  # right edge starts at 0
        side = np.minimum((t // (2 * q)).astype(int), 3)
        u = (t - side * 2 * q) / (2 * q)  # 0 -> 1 along the side
        x = np.select([side == 0, side == 1, side == 2, side == 3], [a + 0 * u, a - 2 * a * u, -a + 0 * u, -a + 2 * a * u])
        y = np.select([side == 0, side == 1, side == 2, side == 3], [-b + 2 * b * u, b + 0 * u, b - 2 * b * u, -b + 0 * u])
        return np.stack([x, y], axis=-1)

    return rho, boundary


def _stadium(a, r):
    """Flat half-length a, cap radius r."""

    def rho(th):
        th = np.asarray(th, dtype=float)
        c, s = np.abs(np.cos(th)), np.abs(np.sin(th))
        with np.errstate(divide="ignore", invalid="ignore"):
            flat = np.where(s > 0, r / s, np.inf)
            cap = a * c + np.sqrt(np.maximum(r * r - (a * s) ** 2, 0.0))
            return np.where(flat * c <= a, flat, cap)

    return rho, _polar_boundary(rho)


def _perturbed_disk(R, eps, k):
    rho = lambda th: R * (1.0 + eps * np.cos(k * np.asarray(th, dtype=float)))
    return rho, _polar_boundary(rho)


_KINDS = {
    "disk": (_disk, 1),
    "ellipse": (_ellipse, 2),
    "rectangle": (_rectangle, 2),
    "stadium": (_stadium, 2),
    "perturbed_disk": (_perturbed_disk, 3),
}


def make_domain(kind: str, params) -> StarDomain:
    if kind not in _KINDS:
        raise DomainParameterError(f"unknown domain kind {kind!r}")
    factory, nparams = _KINDS[kind]
    params = tuple(float(p) for p in params)
    if len(params) != nparams:
        raise DomainParameterError(f"{kind} takes {nparams} parameter(s), got {len(params)}")
    if not all(math.isfinite(p) for p in params):
        raise DomainParameterError(f"non-finite parameter for {kind}")
    if kind == "perturbed_disk":
        R, eps, k = params
        if R <= 0:
            raise DomainParameterError("perturbed_disk needs R > 0")
        if k != int(k) or int(k) % 2 != 0 or k <= 0:
            raise DomainParameterError(f"perturbed_disk needs an even positive k for central symmetry, got {k:g}")
        if not 0 <= abs(eps) < 1:
            raise DomainParameterError("perturbed_disk needs |eps| < 1")
    elif any(p <= 0 for p in params):
        raise DomainParameterError(f"{kind} needs positive dimensions, got {params}")
    rho, boundary = factory(*params)
    return StarDomain(kind, params, rho, boundary)


def parse_domain(spec: str) -> StarDomain:
    """"disk:1", "ellipse:1.5,0.8", "perturbed_disk:1,0.1,2", ..."""
    kind, _, rest = spec.strip().partition(":")
    try:
        params = [float(p) for p in rest.split(",")] if rest else []
    except ValueError as exc:
        raise DomainParameterError(f"bad parameters in domain {spec!r}") from exc
    return make_domain(kind, params)


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray = field(repr=False)
    triangles: np.ndarray = field(repr=False)
    boundary_edges: np.ndarray = field(repr=False)
    symmetry_map: np.ndarray = field(repr=False)
    name: str = ""
    rings: int = 0

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def area(self) -> float:
        return float(self.signed_areas().sum())

    def edge_normals(self) -> np.ndarray:
        """Outward unit normals of the boundary edges (boundary is counter-clockwise)."""
        p = self.nodes[self.boundary_edges]
        d = p[:, 1] - p[:, 0]
        n = np.stack([d[:, 1], -d[:, 0]], axis=1)
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def edge_lengths(self) -> np.ndarray:
        p = self.nodes[self.boundary_edges]
        return np.linalg.norm(p[:, 1] - p[:, 0], axis=1)

    @property
    def boundary_nodes(self) -> np.ndarray:
        return np.unique(self.boundary_edges)

    @property
    def h(self) -> float:
        p = self.nodes[self.triangles]
        e = np.concatenate([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]])
        return float(np.max(np.linalg.norm(e, axis=1)))


def rings_for(refinement: int) -> int:
    return 2 ** (refinement + 1)


def triangulate(domain: StarDomain, refinement: int) -> Mesh:
    """Concentric rings fanned from the origin; ring j carries 8 j nodes.

    Only the half ring t in [0, pi) is evaluated, the rest is its exact
    negation, so the node set is closed under x -> -x bit for bit.
    """
    if refinement < 1:
        raise ValueError("refinement must be >= 1")
    N = rings_for(refinement)
    coords = [np.zeros((1, 2))]
    offsets = [0]
    counts = [1]
    start = 1
    for j in range(1, N + 1):
        n = 8 * j
        half = np.arange(n // 2) * (TWO_PI / n)
        pts = (j / N) * domain.boundary(half)
        coords.append(np.concatenate([pts, -pts]))
        offsets.append(start)
        counts.append(n)
        start += n
    nodes = np.concatenate(coords)

    tris = []
    # ring 1 fan
    o1, n1 = offsets[1], counts[1]
    for k in range(n1):
        tris.append((0, o1 + k, o1 + (k + 1) % n1))
    for j in range(2, N + 1):
        oi, ni, oo, no = offsets[j - 1], counts[j - 1], offsets[j], counts[j]
        i = o = 0
        while i < ni or o < no:
            # compare next parameters (i+1)/ni and (o+1)/no exactly
            adv_inner = o >= no or (i < ni and (i + 1) * no < (o + 1) * ni)
            if adv_inner:
                tris.append((oi + i % ni, oo + o % no, oi + (i + 1) % ni))
                i += 1
            else:
                tris.append((oi + i % ni, oo + o % no, oo + (o + 1) % no))
                o += 1
    triangles = np.array(tris, dtype=np.int64)

    ob, nb = offsets[N], counts[N]
    bedges = np.array([(ob + k, ob + (k + 1) % nb) for k in range(nb)], dtype=np.int64)

    sym = np.zeros(len(nodes), dtype=np.int64)
    for j in range(1, N + 1):
        k = np.arange(counts[j])
        sym[offsets[j] + k] = offsets[j] + (k + counts[j] // 2) % counts[j]

    mesh = Mesh(nodes, triangles, bedges, sym, domain.spec, N)
    areas = mesh.signed_areas()
    if np.any(areas <= 1e-14 * np.mean(np.abs(areas))):
        raise MeshError(f"degenerate or inverted triangle in mesh of {domain.spec}")
    return mesh


def write_mesh(path, mesh: Mesh) -> None:
    """Plain text: counts header, then nodes, triangles and boundary edges (0-based)."""
    with open(path, "w") as fh:
        fh.write(f"{len(mesh.nodes)} {len(mesh.triangles)} {len(mesh.boundary_edges)}\n")
        for x, y in mesh.nodes:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")
        for a, b in mesh.boundary_edges:
            fh.write(f"{a} {b}\n")


def read_mesh(path) -> Mesh:
    with open(path) as fh:
        nn, nt, ne = (int(v) for v in fh.readline().split())
        nodes = np.array([[float(v) for v in fh.readline().split()] for _ in range(nn)])
        tris = np.array([[int(v) for v in fh.readline().split()] for _ in range(nt)], dtype=np.int64)
        edges = np.array([[int(v) for v in fh.readline().split()] for _ in range(ne)], dtype=np.int64)
    # rebuild the involution from coordinates
    key = {tuple(p): i for i, p in enumerate(nodes)}
    sym = np.array([key[(-x + 0.0, -y + 0.0)] for x, y in nodes], dtype=np.int64)
    return Mesh(nodes, tris, edges, sym)
