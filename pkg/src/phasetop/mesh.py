"""Conforming triangular meshes with newest-vertex bisection refinement.

A triangle is stored as a vertex triple (v0, v1, v2) in counterclockwise
order; its refinement edge is (v0, v1) and v2 plays the role of the newest
vertex.  Bisecting inserts the midpoint m of (v0, v1) and produces the
children (v2, v0, m) and (v1, v2, m), which keeps orientation and makes m
the newest vertex of both children.  Meshes are immutable; `bisect` returns
a new mesh that records its parent, so nested-mesh field transfer stays
exact.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GeometryError, MeshError

# boundary tags
DIRICHLET = 0
NEUMANN = 1
FREE = 2
TAG_NAMES = {DIRICHLET: "dirichlet", NEUMANN: "neumann", FREE: "free"}

_SEG_TOL = 1e-9


def _ro(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Mesh:
    """Immutable conforming triangulation.

    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, ccw, refinement edge = (t[0], t[1])
    boundary_edges : (nb, 2) int array of vertex pairs on the boundary
    boundary_tags : (nb,) int array with DIRICHLET / NEUMANN / FREE entries
    generation : (nt,) int bisection depth per triangle
    parent : the mesh this one was bisected from, or None
    vertex_parents : (nv, 2) int; midpoint vertices store the two endpoint
        indices of the split edge, original vertices store (i, i)
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray
    generation: np.ndarray
    parent: "Mesh | None" = None
    vertex_parents: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", _ro(np.asarray(self.vertices, float)))
        object.__setattr__(self, "triangles", _ro(np.asarray(self.triangles, np.int64)))
        object.__setattr__(self, "boundary_edges", _ro(np.asarray(self.boundary_edges, np.int64).reshape(-1, 2)))
        object.__setattr__(self, "boundary_tags", _ro(np.asarray(self.boundary_tags, np.int64)))
        object.__setattr__(self, "generation", _ro(np.asarray(self.generation, np.int64)))
        if self.vertex_parents is None:
            idx = np.arange(self.n_vertices)
            object.__setattr__(self, "vertex_parents", _ro(np.column_stack([idx, idx])))
        else:
            object.__setattr__(self, "vertex_parents", _ro(np.asarray(self.vertex_parents, np.int64)))
        if self.triangles.size and self.triangles.max() >= self.n_vertices:
            raise MeshError("triangle refers to a nonexistent vertex")
        if np.any(self.signed_areas <= 0.0):
            raise MeshError("triangle with nonpositive signed area")

    # -- basic sizes -----------------------------------------------------
    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    # -- cached geometry -------------------------------------------------
    @cached_property
    def signed_areas(self):
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return _ro(0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]))

    @cached_property
    def areas(self):
        return self.signed_areas

    @cached_property
    def h(self):
        """Mesh size per element, h_T = |T|^(1/2)."""
        return _ro(np.sqrt(self.areas))

    @cached_property
    def grads(self):
        """Gradients of the three P1 basis functions, shape (nt, 3, 2)."""
        p = self.vertices[self.triangles]
        g = np.empty((self.n_triangles, 3, 2))
        twoa = (2.0 * self.areas)[:, None]
        for i in range(3):
            a, b = p[:, (i + 1) % 3], p[:, (i + 2) % 3]
            # grad of barycentric i is the inward rotation of the opposite edge
            g[:, i, 0] = (a[:, 1] - b[:, 1])
            g[:, i, 1] = (b[:, 0] - a[:, 0])
        g /= twoa[..., None]
        return _ro(g)

    @cached_property
    def _edge_table(self):
        t = self.triangles
        # local edge i is opposite vertex i
        raw = np.concatenate([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]])
        raw_sorted = np.sort(raw, axis=1)
        edges, inverse = np.unique(raw_sorted, axis=0, return_inverse=True)
        tri_edges = inverse.reshape(3, self.n_triangles).T
        ne = edges.shape[0]
        edge_tris = np.full((ne, 2), -1, np.int64)
        order = np.argsort(inverse, kind="stable")
        tri_of = np.tile(np.arange(self.n_triangles), 3)[order]
        eid = inverse[order]
        first = np.searchsorted(eid, np.arange(ne), side="left")
        last = np.searchsorted(eid, np.arange(ne), side="right")
        count = last - first
        if np.any(count > 2):
            raise MeshError("edge shared by more than two triangles")
        edge_tris[:, 0] = tri_of[first]
        has2 = count == 2
        edge_tris[has2, 1] = tri_of[last[has2] - 1]
        return _ro(edges), _ro(tri_edges), _ro(edge_tris)

    @property
    def edges(self):
        return self._edge_table[0]

    @property
    def tri_edges(self):
        """Edge index of local edge i (opposite vertex i), shape (nt, 3)."""
        return self._edge_table[1]

    @property
    def edge_tris(self):
        """Adjacent triangles per edge; second entry -1 on the boundary."""
        return self._edge_table[2]

    @cached_property
    def edge_tag(self):
        """Per-edge tag: -1 interior, else DIRICHLET/NEUMANN/FREE."""
        edges, _, edge_tris = self._edge_table
        tags = np.full(edges.shape[0], -1, np.int64)
        lookup = {}
        for (a, b), tag in zip(self.boundary_edges, self.boundary_tags):
            lookup[(min(a, b), max(a, b))] = int(tag)
        on_boundary = edge_tris[:, 1] < 0
        for i in np.where(on_boundary)[0]:
            key = (int(edges[i, 0]), int(edges[i, 1]))
            if key not in lookup:
                raise MeshError(f"boundary edge {key} carries no tag")
            tags[i] = lookup[key]
        if len(lookup) != int(on_boundary.sum()):
            raise MeshError("boundary tag list does not match mesh boundary")
        return _ro(tags)

    @cached_property
    def edge_lengths(self):
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return _ro(np.hypot(d[:, 0], d[:, 1]))

    @cached_property
    def edge_normals(self):
        """Unit normal per edge, oriented away from edge_tris[:, 0]."""
        v = self.vertices
        d = v[self.edges[:, 1]] - v[self.edges[:, 0]]
        n = np.column_stack([d[:, 1], -d[:, 0]]) / self.edge_lengths[:, None]
        mid = 0.5 * (v[self.edges[:, 0]] + v[self.edges[:, 1]])
        cent = v[self.triangles[self.edge_tris[:, 0]]].mean(axis=1)
        flip = np.einsum("ij,ij->i", n, cent - mid) > 0.0
        n[flip] *= -1.0
        return _ro(n)

    @cached_property
    def max_diameter(self):
        return float(self.edge_lengths.max())


@dataclass(frozen=True)
class ElementGeometry:
    """Per-element geometric data: area, size h_T = |T|^(1/2), edge lengths
    and outward unit normals (local edge i is opposite vertex i)."""

    area: float
    h: float
    edge_lengths: np.ndarray
    normals: np.ndarray


def element_geometry(mesh: Mesh, t: int) -> ElementGeometry:
    p = mesh.vertices[mesh.triangles[t]]
    lengths = np.empty(3)
    normals = np.empty((3, 2))
    for i in range(3):
        a, b = p[(i + 1) % 3], p[(i + 2) % 3]
        d = b - a
        lengths[i] = math.hypot(*d)
        normals[i] = np.array([d[1], -d[0]]) / lengths[i]
    area = float(mesh.areas[t])
    return ElementGeometry(area, math.sqrt(area), lengths, normals)


def mesh_size(mesh: Mesh) -> np.ndarray:
    """Piecewise constant mesh size h_T = |T|^(1/2) per element."""
    return mesh.h


# ---------------------------------------------------------------------------
# domain descriptions and initial meshing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridGeometry:
    """Union of axis-aligned rectangles minus an optional rectangular hole.

    All rectangle coordinates must be multiples of `snap`; the generated
    grid spacing divides `snap`, so every domain feature (corners, hole,
    support segments) lies exactly on mesh lines.
    """

    rects: tuple
    hole: tuple | None = None
    snap: float = 0.5

    def __post_init__(self):
        if not self.rects:
            raise GeometryError("empty rectangle union")
        for r in self.rects:
            x0, y0, x1, y1 = r
            if not (x1 > x0 and y1 > y0):
                raise GeometryError(f"degenerate rectangle {r}")
            for c in r:
                if abs(c / self.snap - round(c / self.snap)) > _SEG_TOL:
                    raise GeometryError(f"rectangle coordinate {c} off the {self.snap} grid")
        for i, a in enumerate(self.rects):
            for b in self.rects[i + 1:]:
                if a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]:
                    raise GeometryError("overlapping rectangles in union")
        if self.hole is not None:
            hx0, hy0, hx1, hy1 = self.hole
            if not (hx1 > hx0 and hy1 > hy0):
                raise GeometryError("degenerate hole")
            inside = any(hx0 >= r[0] and hy0 >= r[1] and hx1 <= r[2] and hy1 <= r[3]
                         for r in self.rects)
            if not inside:
                raise GeometryError("hole not contained in the rectangle union")

    def area(self):
        a = sum((r[2] - r[0]) * (r[3] - r[1]) for r in self.rects)
        if self.hole is not None:
            h = self.hole
            a -= (h[2] - h[0]) * (h[3] - h[1])
        return a

    def contains(self, xy):
        xy = np.asarray(xy, float)
        x, y = xy[..., 0], xy[..., 1]
        inside = np.zeros(x.shape, bool)
        for x0, y0, x1, y1 in self.rects:
            inside |= (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
        if self.hole is not None:
            hx0, hy0, hx1, hy1 = self.hole
            inside &= ~((x > hx0) & (x < hx1) & (y > hy0) & (y < hy1))
        return inside


@dataclass(frozen=True)
class ShearBandGeometry:
    """Band of constant vertical thickness over a piecewise-linear floor.

    The lower boundary is the polyline `curve` (uniformly spaced in x from
    x0 to x1); the upper boundary is the same polyline shifted by `height`.
    Used for curved domains whose arcs are approximated polygonally: the
    mesh is a vertically sheared structured grid, so areas are exact and
    element quality is controlled by the curve slope.
    """

    x0: float
    x1: float
    height: float
    curve: tuple

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.height > 0):
            raise GeometryError("degenerate band")
        xs = np.array([p[0] for p in self.curve])
        if len(xs) < 2 or abs(xs[0] - self.x0) > _SEG_TOL or abs(xs[-1] - self.x1) > _SEG_TOL:
            raise GeometryError("curve must span [x0, x1]")
        dx = np.diff(xs)
        if np.any(dx <= 0) or np.ptp(dx) > _SEG_TOL:
            raise GeometryError("curve nodes must be uniform and increasing in x")

    def area(self):
        return (self.x1 - self.x0) * self.height

    def floor(self, x):
        xs = np.array([p[0] for p in self.curve])
        ys = np.array([p[1] for p in self.curve])
        return np.interp(x, xs, ys)


def _point_on_segment(pts, p0, p1, tol=_SEG_TOL):
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    d = p1 - p0
    L = math.hypot(*d)
    if L < tol:
        raise GeometryError("zero-length tag segment")
    rel = pts - p0
    t = (rel @ d) / (L * L)
    perp = np.abs(rel[:, 0] * d[1] - rel[:, 1] * d[0]) / L
    return (perp <= tol) & (t >= -tol / L) & (t <= 1 + tol / L)


def _tag_boundary(vertices, bedges, dirichlet, neumann, untracked):
    mids = 0.5 * (vertices[bedges[:, 0]] + vertices[bedges[:, 1]])
    a = vertices[bedges[:, 0]]
    b = vertices[bedges[:, 1]]
    tags = np.full(bedges.shape[0], NEUMANN, np.int64)

    def on(segs):
        hit = np.zeros(bedges.shape[0], bool)
        for p0, p1 in segs:
            hit |= (_point_on_segment(a, p0, p1) & _point_on_segment(b, p0, p1)
                    & _point_on_segment(mids, p0, p1))
        return hit

    tags[on(untracked)] = FREE
    tags[on(neumann)] = NEUMANN
    tags[on(dirichlet)] = DIRICHLET
    return tags


def _longest_edge_first(vertices, triangles):
    """Cyclically rotate each triple so the longest edge is (v0, v1)."""
    p = vertices[triangles]
    l2 = np.empty((triangles.shape[0], 3))
    for i in range(3):
        d = p[:, (i + 2) % 3] - p[:, (i + 1) % 3]
        l2[:, i] = d[:, 0] ** 2 + d[:, 1] ** 2
    opp = np.argmax(l2, axis=1)  # vertex opposite the longest edge
    out = triangles.copy()
    for k in (0, 1):
        m = opp == k
        out[m] = np.roll(triangles[m], 2 - k, axis=1)
    return out


def _boundary_of(triangles):
    raw = np.concatenate([triangles[:, [1, 2]], triangles[:, [2, 0]], triangles[:, [0, 1]]])
    raw_sorted = np.sort(raw, axis=1)
    edges, counts = np.unique(raw_sorted, axis=0, return_counts=True)
    return edges[counts == 1]


def build_initial_mesh(geometry, target_h, dirichlet=(), neumann=(), untracked=()) -> Mesh:
    """Structured conforming triangulation of the domain.

    Cells are sized so the element diameter stays below target_h (hence
    h_T = |T|^(1/2) <= target_h as well).  Boundary edges lying on a
    `dirichlet` segment are tagged DIRICHLET; remaining boundary is
    traction boundary (NEUMANN) unless listed in `untracked`.
    Every triangle gets its longest edge as initial refinement edge.
    """
    if target_h <= 0:
        raise GeometryError("target_h must be positive")
    s_target = target_h / math.sqrt(2.0)

    if isinstance(geometry, GridGeometry):
        k = max(1, math.ceil(geometry.snap / s_target - _SEG_TOL))
        s = geometry.snap / k
        xs0 = min(r[0] for r in geometry.rects)
        xs1 = max(r[2] for r in geometry.rects)
        ys0 = min(r[1] for r in geometry.rects)
        ys1 = max(r[3] for r in geometry.rects)
        nx = round((xs1 - xs0) / s)
        ny = round((ys1 - ys0) / s)
        gx = xs0 + s * np.arange(nx + 1)
        gy = ys0 + s * np.arange(ny + 1)
        gx[-1], gy[-1] = xs1, ys1
        ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        centers = np.column_stack([gx[ii.ravel()] + 0.5 * s, gy[jj.ravel()] + 0.5 * s])
        keep = geometry.contains(centers)
        ci, cj = ii.ravel()[keep], jj.ravel()[keep]
        corner = lambda di, dj: (ci + di) * (ny + 1) + (cj + dj)
        v00, v10, v01, v11 = corner(0, 0), corner(1, 0), corner(0, 1), corner(1, 1)
        tris_global = np.concatenate([
            np.column_stack([v00, v11, v01]),
            np.column_stack([v11, v00, v10]),
        ])
        xx, yy = np.meshgrid(gx, gy, indexing="ij")
        all_pts = np.column_stack([xx.ravel(), yy.ravel()])
    elif isinstance(geometry, ShearBandGeometry):
        n_seg = len(geometry.curve) - 1
        seg_dx = (geometry.x1 - geometry.x0) / n_seg
        m = max(1, math.ceil(seg_dx / s_target - _SEG_TOL))
        nx = n_seg * m
        ny = max(1, math.ceil(geometry.height / s_target - _SEG_TOL))
        gx = np.linspace(geometry.x0, geometry.x1, nx + 1)
        floor = geometry.floor(gx)
        ti = np.linspace(0.0, geometry.height, ny + 1)
        xx = np.repeat(gx, ny + 1)
        yy = (floor[:, None] + ti[None, :]).ravel()
        all_pts = np.column_stack([xx, yy])
        ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        ci, cj = ii.ravel(), jj.ravel()
        corner = lambda di, dj: (ci + di) * (ny + 1) + (cj + dj)
        v00, v10, v01, v11 = corner(0, 0), corner(1, 0), corner(0, 1), corner(1, 1)
        tris_global = np.concatenate([
            np.column_stack([v00, v11, v01]),
            np.column_stack([v11, v00, v10]),
        ])
    else:
        raise GeometryError(f"unsupported geometry {type(geometry).__name__}")

    used = np.unique(tris_global)
    remap = np.full(all_pts.shape[0], -1, np.int64)
    remap[used] = np.arange(used.size)
    vertices = all_pts[used]
    triangles = remap[tris_global]
    triangles = _longest_edge_first(vertices, triangles)

    bedges = _boundary_of(triangles)
    btags = _tag_boundary(vertices, bedges, dirichlet, neumann, untracked)
    mesh = Mesh(vertices, triangles, bedges, btags, np.zeros(triangles.shape[0], np.int64))
    if float(mesh.h.max()) > target_h * (1 + 1e-12):
        raise MeshError("generated mesh exceeds the requested size")
    return mesh


# ---------------------------------------------------------------------------
# newest-vertex bisection
# ---------------------------------------------------------------------------

def bisect(mesh: Mesh, marked) -> Mesh:
    """Bisect the marked elements and apply conforming closure.

    Every marked element is bisected at least once; neighbors are bisected
    recursively through their refinement edges so the result has no hanging
    nodes.  The output mesh is nested in the input and records it as parent.
    """
    marked = np.unique(np.asarray(list(marked), dtype=np.int64)) if not isinstance(marked, np.ndarray) \
        else np.unique(marked.astype(np.int64))
    if marked.size == 0:
        return mesh
    if marked.min() < 0 or marked.max() >= mesh.n_triangles:
        raise MeshError("marked element out of range")

    edges = mesh.edges
    tri_edges = mesh.tri_edges
    ne = edges.shape[0]
    edge_marked = np.zeros(ne, bool)
    edge_marked[tri_edges[marked, 2]] = True

    # closure: any triangle touching a marked edge must split its refinement
    # edge first; the marked set grows monotonically, so the loop is bounded
    # by the number of edges
    for _ in range(ne + 3):
        tri_touched = edge_marked[tri_edges].any(axis=1)
        need = tri_touched & ~edge_marked[tri_edges[:, 2]]
        if not need.any():
            break
        edge_marked[tri_edges[need, 2]] = True
    else:
        raise MeshError("conforming closure did not terminate; refinement-edge data corrupted")

    split = np.where(edge_marked)[0]
    nv = mesh.n_vertices
    edge_mid = np.full(ne, -1, np.int64)
    edge_mid[split] = nv + np.arange(split.size)
    mid_pts = 0.5 * (mesh.vertices[edges[split, 0]] + mesh.vertices[edges[split, 1]])
    vertices = np.vstack([mesh.vertices, mid_pts])
    idx = np.arange(nv)
    vertex_parents = np.vstack([np.column_stack([idx, idx]), edges[split]])

    t = mesh.triangles
    gen = mesh.generation
    r = edge_marked[tri_edges[:, 2]]
    ma = edge_marked[tri_edges[:, 1]]  # edge (v2, v0)
    mb = edge_marked[tri_edges[:, 0]]  # edge (v1, v2)
    m2 = edge_mid[tri_edges[:, 2]]
    m1 = edge_mid[tri_edges[:, 1]]
    m0 = edge_mid[tri_edges[:, 0]]

    chunks_t, chunks_g = [], []

    def emit(cols, g):
        chunks_t.append(np.column_stack(cols))
        chunks_g.append(g)

    keep = ~r
    if keep.any():
        emit([t[keep, 0], t[keep, 1], t[keep, 2]], gen[keep])

    # child A = (v2, v0, m2): bisected again iff edge (v2, v0) is marked
    a_once = r & ~ma
    if a_once.any():
        emit([t[a_once, 2], t[a_once, 0], m2[a_once]], gen[a_once] + 1)
    a_twice = r & ma
    if a_twice.any():
        emit([m2[a_twice], t[a_twice, 2], m1[a_twice]], gen[a_twice] + 2)
        emit([t[a_twice, 0], m2[a_twice], m1[a_twice]], gen[a_twice] + 2)

    # child B = (v1, v2, m2): bisected again iff edge (v1, v2) is marked
    b_once = r & ~mb
    if b_once.any():
        emit([t[b_once, 1], t[b_once, 2], m2[b_once]], gen[b_once] + 1)
    b_twice = r & mb
    if b_twice.any():
        emit([m2[b_twice], t[b_twice, 1], m0[b_twice]], gen[b_twice] + 2)
        emit([t[b_twice, 2], m2[b_twice], m0[b_twice]], gen[b_twice] + 2)

    triangles = np.vstack(chunks_t)
    generation = np.concatenate(chunks_g)

    # split boundary edges inherit the parent tag
    btag = mesh.edge_tag
    bids = np.where(btag >= 0)[0]
    out_edges, out_tags = [], []
    for eid in bids:
        a, b = edges[eid]
        tag = btag[eid]
        m = edge_mid[eid]
        if m >= 0:
            out_edges.append((a, m))
            out_edges.append((m, b))
            out_tags.extend((tag, tag))
        else:
            out_edges.append((a, b))
            out_tags.append(tag)

    return Mesh(vertices, triangles, np.array(out_edges, np.int64),
                np.array(out_tags, np.int64), generation,
                parent=mesh, vertex_parents=vertex_parents)


def uniform_refine(mesh: Mesh, rounds: int = 1) -> Mesh:
    for _ in range(rounds):
        mesh = bisect(mesh, np.arange(mesh.n_triangles))
    return mesh


# ---------------------------------------------------------------------------
# audits and shape diagnostics
# ---------------------------------------------------------------------------

def audit_conformity(mesh: Mesh):
    """Raise MeshError unless every interior edge is shared by exactly two
    triangles and every single-triangle edge carries a boundary tag."""
    counts = np.where(mesh.edge_tris[:, 1] >= 0, 2, 1)
    boundary = counts == 1
    # edge_tag construction itself verifies the tag/boundary correspondence
    tags = mesh.edge_tag
    if np.any((tags >= 0) != boundary):
        raise MeshError("tagged edges do not coincide with the mesh boundary")
    if np.any(mesh.signed_areas <= 0):
        raise MeshError("nonpositive element area")
    return True


def min_angle(mesh: Mesh) -> float:
    """Smallest interior angle over all elements (radians)."""
    p = mesh.vertices[mesh.triangles]
    worst = np.inf
    for i in range(3):
        u = p[:, (i + 1) % 3] - p[:, i]
        v = p[:, (i + 2) % 3] - p[:, i]
        c = np.einsum("ij,ij->i", u, v) / (np.hypot(u[:, 0], u[:, 1]) * np.hypot(v[:, 0], v[:, 1]))
        worst = min(worst, float(np.arccos(np.clip(c, -1, 1)).min()))
    return worst


def _angle_key(p0, p1, p2):
    pts = np.array([p0, p1, p2])
    ang = []
    for i in range(3):
        u = pts[(i + 1) % 3] - pts[i]
        v = pts[(i + 2) % 3] - pts[i]
        c = float(np.dot(u, v) / (math.hypot(*u) * math.hypot(*v)))
        ang.append(math.acos(max(-1.0, min(1.0, c))))
    a0, a1, a2 = ang
    lo, hi = min(a0, a1), max(a0, a1)
    return (round(lo, 7), round(hi, 7), round(a2, 7))


def nvb_shape_classes(mesh: Mesh, cap: int = 1024):
    """Similarity classes reachable from the mesh by newest-vertex bisection.

    A class is keyed by the triangle angles relative to the refinement edge
    (mirror images identified).  Returns (keys, min_angle_over_classes).
    """
    seen = {}
    queue = []
    worst = math.inf
    p = mesh.vertices

    def visit(tri_pts):
        nonlocal worst
        key = _angle_key(*tri_pts)
        worst = min(worst, min(key))
        if key not in seen:
            seen[key] = True
            queue.append(tri_pts)

    for tri in mesh.triangles:
        visit((p[tri[0]], p[tri[1]], p[tri[2]]))
    while queue:
        if len(seen) > cap:
            raise MeshError("shape class enumeration exceeded cap")
        a, b, c = queue.pop()
        m = 0.5 * (np.asarray(a) + np.asarray(b))
        visit((c, a, m))
        visit((b, c, m))
    return list(seen), worst
