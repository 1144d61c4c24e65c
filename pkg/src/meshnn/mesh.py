"""Simplicial 2-D meshes and P1 nodal machinery.

Meshes are built by clipping a structured right-triangle grid against a
constructive domain: grid pitch is ``target_h / sqrt(2)`` so retained
triangles have hypotenuse (= diameter) ``target_h``. A triangle survives
when its three vertices and its centroid lie in the closed domain; a
vertex exactly on the boundary counts as inside.

Stored admissibility metrics: ``h`` (max element diameter), ``h_min``
(min element diameter) and ``sigma`` (worst-case ratio of element
diameter to inscribed-ball diameter).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateElement, EmptyMesh, InvalidStep, InvariantViolation, ParseError
from .geometry import Domain, parse_domain

_MASS_BLOCK = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


class Mesh:
    """Immutable triangulation: vertex coordinates, connectivity, metrics.

    Parameters
    ----------
    domain : Domain
        The constructive domain the mesh discretizes.
    vertices : (N, 2) float array
    triangles : (M, 3) int array
        Vertex index triples; orientation is normalized to positive
        signed area at construction.
    """

    def __init__(self, domain: Domain, vertices, triangles):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise InvariantViolation("vertices must be an (N, 2) array")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise InvariantViolation("triangles must be an (M, 3) array")
        if not np.all(np.isfinite(vertices)):
            raise InvariantViolation("non-finite vertex coordinates")
        if triangles.size and (triangles.min() < 0 or triangles.max() >= len(vertices)):
            raise InvariantViolation("triangle index out of range")

        # Normalize orientation: flip triangles with negative signed area.
        a, b, c = (vertices[triangles[:, k]] for k in range(3))
        signed = 0.5 * np.cross(b - a, c - a)
        flip = signed < 0
        triangles[flip] = triangles[flip][:, [0, 2, 1]]
        if np.any(signed == 0):
            raise InvariantViolation("degenerate (zero-area) triangle")

        self.domain = domain
        self.vertices = vertices
        self.triangles = triangles
        vertices.flags.writeable = False
        triangles.flags.writeable = False
        self.h, self.h_min, self.sigma = mesh_metrics(self)
        self._cache = {}

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def __repr__(self):
        return (f"Mesh({self.domain.descriptor}, {self.n_vertices} vertices, "
                f"{self.n_triangles} triangles, h={self.h:.4g})")


@dataclass(frozen=True)
class FeFunction:
    """P1 finite-element function identified by its vertex values."""

    mesh: Mesh
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (self.mesh.n_vertices,):
            raise InvariantViolation(
                f"coefficient vector has length {coeffs.shape}, mesh has "
                f"{self.mesh.n_vertices} vertices")
        if not np.all(np.isfinite(coeffs)):
            raise InvariantViolation("non-finite coefficients")
        object.__setattr__(self, "coeffs", coeffs)


def build_mesh(domain: Domain, target_h: float) -> Mesh:
    """Clip a structured grid of right triangles against `domain`.

    Grid pitch is ``target_h / sqrt(2)``; every retained triangle has
    longest edge ``target_h``, so the mesh stepsize equals ``target_h``.

    Raises
    ------
    InvalidStep
        If ``target_h <= 0``.
    EmptyMesh
        If no triangle survives clipping.
    """
    if not (target_h > 0):
        raise InvalidStep(f"target_h must be positive, got {target_h}")
    pitch = target_h / np.sqrt(2.0)
    (x0, y0), (x1, y1) = domain.bounding_box()
    nx = max(1, int(np.ceil((x1 - x0) / pitch)))
    ny = max(1, int(np.ceil((y1 - y0) / pitch)))

    xs = x0 + pitch * np.arange(nx + 1)
    ys = y0 + pitch * np.arange(ny + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    verts = np.column_stack([gx.ravel(), gy.ravel()])

    def vid(i, j):
        return i * (ny + 1) + j

    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    v00, v10 = vid(ii, jj), vid(ii + 1, jj)
    v01, v11 = vid(ii, jj + 1), vid(ii + 1, jj + 1)
    tris = np.vstack([np.column_stack([v00, v10, v11]),
                      np.column_stack([v00, v11, v01])])

    inside = domain.contains(verts)
    centroid = verts[tris].mean(axis=1)
    keep = inside[tris].all(axis=1) & domain.contains(centroid)
    tris = tris[keep]
    if len(tris) == 0:
        raise EmptyMesh(f"no triangle of pitch {pitch:.4g} fits inside {domain.descriptor}")

    used = np.unique(tris)
    remap = np.full(len(verts), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return Mesh(domain, verts[used], remap[tris])


def mesh_metrics(mesh: Mesh):
    """Return ``(h, h_min, sigma)`` recomputed from the mesh geometry.

    Per element: diameter = longest edge, inscribed-ball diameter
    ``R = 4*area / perimeter``. ``sigma`` is the worst-case (maximum)
    ratio diameter/R.
    """
    a, b, c = (mesh.vertices[mesh.triangles[:, k]] for k in range(3))
    areas = 0.5 * np.abs(np.cross(b - a, c - a))
    if np.any(areas == 0):
        raise DegenerateElement("zero-area triangle")
    la = np.linalg.norm(b - c, axis=1)
    lb = np.linalg.norm(c - a, axis=1)
    lc = np.linalg.norm(a - b, axis=1)
    h_k = np.maximum(la, np.maximum(lb, lc))
    r_k = 4.0 * areas / (la + lb + lc)  # 2 * area / semiperimeter
    return float(h_k.max()), float(h_k.min()), float((h_k / r_k).max())


def element_areas(mesh: Mesh) -> np.ndarray:
    a, b, c = (mesh.vertices[mesh.triangles[:, k]] for k in range(3))
    areas = 0.5 * np.cross(b - a, c - a)
    if np.any(areas <= 0):
        raise DegenerateElement("non-positive triangle area")
    return areas


def total_area(mesh: Mesh) -> float:
    return float(element_areas(mesh).sum())


def _basis_gradients(mesh: Mesh):
    """Constant gradients of the three P1 basis functions per element.

    Returns ``(grads, areas)`` with ``grads`` of shape (M, 3, 2):
    ``grads[e, i]`` is the gradient of the hat function of local vertex i.
    """
    key = "basis_gradients"
    if key in mesh._cache:
        return mesh._cache[key]
    a, b, c = (mesh.vertices[mesh.triangles[:, k]] for k in range(3))
    det = np.cross(b - a, c - a)  # = 2 * area, positive by orientation
    if np.any(det <= 0):
        raise DegenerateElement("non-positive triangle area")
    grads = np.empty((len(det), 3, 2))
    # grad N_i = perp(edge opposite to i) / (2A), perp = CCW 90-degree turn
    for i, (p, q) in enumerate([(b, c), (c, a), (a, b)]):
        e = q - p
        grads[:, i, 0] = -e[:, 1] / det
        grads[:, i, 1] = e[:, 0] / det
    mesh._cache[key] = (grads, 0.5 * det)
    return mesh._cache[key]


def assemble_mass_matrix(mesh: Mesh) -> sp.csr_matrix:
    """Consistent P1 mass matrix, entries ``int(phi_i phi_j)``."""
    key = "mass"
    if key in mesh._cache:
        return mesh._cache[key]
    areas = element_areas(mesh)
    tris = mesh.triangles
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    vals = (areas[:, None] * _MASS_BLOCK.ravel()[None, :]).ravel()
    n = mesh.n_vertices
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    mesh._cache[key] = mat
    return mat


def lumped_mass(mesh: Mesh) -> np.ndarray:
    """Row-sum (lumped) mass: the nodal quadrature weights."""
    key = "lumped"
    if key in mesh._cache:
        return mesh._cache[key]
    w = np.asarray(assemble_mass_matrix(mesh).sum(axis=1)).ravel()
    mesh._cache[key] = w
    return w


def assemble_stiffness_matrix(mesh: Mesh) -> sp.csr_matrix:
    """P1 stiffness matrix, entries ``int(grad phi_i . grad phi_j)``."""
    key = "stiffness"
    if key in mesh._cache:
        return mesh._cache[key]
    grads, areas = _basis_gradients(mesh)
    local = np.einsum("eid,ejd,e->eij", grads, grads, areas)
    tris = mesh.triangles
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    n = mesh.n_vertices
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mesh._cache[key] = mat
    return mat


def assemble_weighted_mass(mesh: Mesh, weight: np.ndarray) -> sp.csr_matrix:
    """Mass matrix weighted by a P1 function: ``int(w phi_i phi_j)``.

    Exact for the cubic integrand via the barycentric monomial formula
    ``int N1^a N2^b N3^c = 2A a! b! c! / (a+b+c+2)!``.
    """
    weight = np.asarray(weight, dtype=float)
    areas = element_areas(mesh)
    tris = mesh.triangles
    w = weight[tris]  # (M, 3)
    local = np.empty((len(tris), 3, 3))
    wsum = w.sum(axis=1)
    for i in range(3):
        for j in range(3):
            if i == j:
                # int(w_i N_i^3) + sum_{c != i} w_c int(N_i^2 N_c)
                local[:, i, j] = w[:, i] / 10.0 + (wsum - w[:, i]) / 30.0
            else:
                k = 3 - i - j
                local[:, i, j] = (w[:, i] + w[:, j]) / 30.0 + w[:, k] / 60.0
    local *= areas[:, None, None]
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    n = mesh.n_vertices
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def boundary_edges(mesh: Mesh) -> np.ndarray:
    """Edges used by exactly one triangle, as an (n, 2) index array."""
    tris = mesh.triangles
    edges = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    edges = np.sort(edges, axis=1)
    uniq, counts = np.unique(edges, axis=0, return_counts=True)
    return uniq[counts == 1]


def assemble_edge_mass(mesh: Mesh, edges: np.ndarray) -> sp.csr_matrix:
    """Line mass matrix ``int_e phi_i phi_j ds`` over the given edges."""
    n = mesh.n_vertices
    if len(edges) == 0:
        return sp.csr_matrix((n, n))
    p, q = mesh.vertices[edges[:, 0]], mesh.vertices[edges[:, 1]]
    lengths = np.linalg.norm(q - p, axis=1)
    block = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
    vals = (lengths[:, None] * block.ravel()[None, :]).ravel()
    rows = np.repeat(edges, 2, axis=1).ravel()
    cols = np.tile(edges, (1, 2)).ravel()
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def l2_norm(f: FeFunction) -> float:
    """L2 norm ``sqrt(c^T M c)`` with the consistent mass matrix."""
    m = assemble_mass_matrix(f.mesh)
    val = float(f.coeffs @ (m @ f.coeffs))
    return float(np.sqrt(max(val, 0.0)))


def p1_gradient(f: FeFunction) -> np.ndarray:
    """Exact per-element gradient of the piecewise-linear interpolant, (M, 2)."""
    grads, _ = _basis_gradients(f.mesh)
    vals = f.coeffs[f.mesh.triangles]  # (M, 3)
    return np.einsum("ei,eid->ed", vals, grads)


def save_mesh(mesh: Mesh, path) -> None:
    """Write the plain-text mesh format (round-trips bitwise)."""
    with open(path, "w") as fh:
        fh.write(f"MESH2D {mesh.n_vertices} {mesh.n_triangles}\n")
        for x, y in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{int(i)} {int(j)} {int(k)}\n")
        fh.write(f"DOMAIN {mesh.domain.descriptor}\n")


def load_mesh(path) -> Mesh:
    """Parse a mesh file; normalizes orientation and validates invariants.

    Raises
    ------
    ParseError
        On malformed or truncated files (carries the line number).
    InvariantViolation
        If the parsed mesh fails structural checks (degenerate element,
        out-of-range index, edge shared by more than two triangles).
    """
    with open(path) as fh:
        lines = fh.read().splitlines()

    def need(lineno):
        if lineno >= len(lines):
            raise ParseError("unexpected end of file", line=lineno + 1)
        return lines[lineno]

    header = need(0).split()
    if len(header) != 3 or header[0] != "MESH2D":
        raise ParseError("expected header 'MESH2D <n_vertices> <n_triangles>'", line=1)
    try:
        nv, nt = int(header[1]), int(header[2])
    except ValueError:
        raise ParseError("non-integer counts in header", line=1)

    verts = np.empty((nv, 2))
    for i in range(nv):
        parts = need(1 + i).split()
        if len(parts) != 2:
            raise ParseError("expected 'x y'", line=2 + i)
        try:
            verts[i] = [float(parts[0]), float(parts[1])]
        except ValueError:
            raise ParseError("bad vertex coordinate", line=2 + i)

    tris = np.empty((nt, 3), dtype=np.int64)
    for i in range(nt):
        parts = need(1 + nv + i).split()
        if len(parts) != 3:
            raise ParseError("expected 'i j k'", line=2 + nv + i)
        try:
            tris[i] = [int(p) for p in parts]
        except ValueError:
            raise ParseError("bad triangle index", line=2 + nv + i)

    tail = need(1 + nv + nt).split(maxsplit=1)
    if len(tail) != 2 or tail[0] != "DOMAIN":
        raise ParseError("expected 'DOMAIN <descriptor>'", line=2 + nv + nt)
    domain = parse_domain(tail[1])

    mesh = Mesh(domain, verts, tris)
    _check_conformity(mesh)
    return mesh


def _check_conformity(mesh: Mesh) -> None:
    tris = np.sort(mesh.triangles, axis=1)
    if len(np.unique(tris, axis=0)) != len(tris):
        raise InvariantViolation("duplicate triangle")
    edges = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [0, 2]]])
    _, counts = np.unique(edges, axis=0, return_counts=True)
    if counts.max(initial=0) > 2:
        raise InvariantViolation("edge shared by more than two triangles")


def point_mesh_distance(mesh: Mesh, points, block=512) -> np.ndarray:
    """Distance from each point to the union of mesh triangles (0 if covered).

    Brute force over all edges and triangles, blocked to bound memory;
    used by the exhaustiveness audit.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    tris = mesh.triangles
    a, b, c = (mesh.vertices[tris[:, k]] for k in range(3))
    seg_p = np.vstack([a, b, c])
    seg_q = np.vstack([b, c, a])
    seg_d = seg_q - seg_p
    seg_len2 = np.maximum(np.einsum("ed,ed->e", seg_d, seg_d), 1e-300)

    out = np.empty(len(points))
    for lo in range(0, len(points), block):
        pts = points[lo:lo + block]
        # distance to every edge
        diff = pts[:, None, :] - seg_p[None, :, :]
        t = np.clip(np.einsum("ped,ed->pe", diff, seg_d) / seg_len2, 0.0, 1.0)
        closest = seg_p[None, :, :] + t[:, :, None] * seg_d[None, :, :]
        d = np.linalg.norm(pts[:, None, :] - closest, axis=2).min(axis=1)
        # zero for points inside some triangle (all three cross products >= 0)
        s1 = np.cross(b - a, pts[:, None, :] - a[None, :, :])
        s2 = np.cross(c - b, pts[:, None, :] - b[None, :, :])
        s3 = np.cross(a - c, pts[:, None, :] - c[None, :, :])
        inside = ((s1 >= 0) & (s2 >= 0) & (s3 >= 0)).any(axis=1)
        d[inside] = 0.0
        out[lo:lo + block] = d
    return out


def exhaustiveness_audit(mesh: Mesh, n_samples=10_000, seed=0) -> float:
    """Max distance from uniformly sampled domain points to the mesh."""
    from .geometry import sample_points

    rng = np.random.default_rng(seed)
    pts = sample_points(mesh.domain, n_samples, rng)
    return float(point_mesh_distance(mesh, pts).max())
