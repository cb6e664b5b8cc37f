"""Structured triangular meshes of a rectangle, with boundary markers and the
P1 dof map.

The grid has nx*ny cells, each split into two triangles along the lower-left
to upper-right diagonal (a fixed, deterministic choice).  Vertices are indexed
row-major: v = iy*(nx+1) + ix.
"""

import numpy as np

DIRICHLET = "dirichlet"
ROBIN = "robin"


class Mesh:
    """Triangulation of [0,width]x[0,height].

    Attributes
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, counterclockwise vertex triples
    boundary_edges : (ne, 2) int array of vertex pairs
    boundary_markers : list of str, per boundary edge ("dirichlet"/"robin")
    h : float, grid spacing width/nx (== height/ny on the uniform grids used
        in the experiments)
    """

    def __init__(self, vertices, triangles, boundary_edges, boundary_markers, h):
        self.vertices = vertices
        self.triangles = triangles
        self.boundary_edges = boundary_edges
        self.boundary_markers = list(boundary_markers)
        self.h = h
        self._areas = None
        self._barycenters = None

    @property
    def num_vertices(self):
        return self.vertices.shape[0]

    @property
    def num_triangles(self):
        return self.triangles.shape[0]

    def triangle_areas(self):
        if self._areas is None:
            p = self.vertices[self.triangles]
            d1 = p[:, 1] - p[:, 0]
            d2 = p[:, 2] - p[:, 0]
            self._areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        return self._areas

    def barycenters(self):
        if self._barycenters is None:
            self._barycenters = self.vertices[self.triangles].mean(axis=1)
        return self._barycenters


def build_rect_mesh(width, height, nx, ny):
    """Uniform triangular mesh of [0,width]x[0,height] with nx*ny cells.

    Every cell is split along the same lower-left -> upper-right diagonal.
    All outer edges are marked Dirichlet; use classify_boundary to move part
    of the boundary to Robin.
    """
    if width <= 0 or height <= 0:
        raise ValueError("width and height must be positive")
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be at least 1")

    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys)  # shape (ny+1, nx+1)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(ix, iy):
        return iy * (nx + 1) + ix

    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny))
    ix = ix.ravel()
    iy = iy.ravel()
    ll = vid(ix, iy)
    lr = vid(ix + 1, iy)
    ul = vid(ix, iy + 1)
    ur = vid(ix + 1, iy + 1)
    # lower triangle (ll, lr, ur) and upper triangle (ll, ur, ul), both CCW
    lower = np.column_stack([ll, lr, ur])
    upper = np.column_stack([ll, ur, ul])
    triangles = np.empty((2 * nx * ny, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    edges = []
    for i in range(nx):  # bottom, top
        edges.append((vid(i, 0), vid(i + 1, 0)))
        edges.append((vid(i, ny), vid(i + 1, ny)))
    for j in range(ny):  # left, right
        edges.append((vid(0, j), vid(0, j + 1)))
        edges.append((vid(nx, j), vid(nx, j + 1)))
    boundary_edges = np.array(edges, dtype=np.int64)
    markers = [DIRICHLET] * len(edges)

    return Mesh(vertices, triangles, boundary_edges, markers, width / nx)


def classify_boundary(mesh, robin_predicate):
    """Re-mark boundary edges: Robin where the predicate holds at the edge
    midpoint, Dirichlet elsewhere.  Returns a new Mesh sharing geometry."""
    mids = 0.5 * (
        mesh.vertices[mesh.boundary_edges[:, 0]]
        + mesh.vertices[mesh.boundary_edges[:, 1]]
    )
    markers = [
        ROBIN if robin_predicate(x, y) else DIRICHLET for x, y in mids
    ]
    return Mesh(mesh.vertices, mesh.triangles, mesh.boundary_edges, markers, mesh.h)


class DofMap:
    """P1 dof map: one dof per vertex (identity numbering) plus a Dirichlet
    flag per dof.  Dirichlet dofs are retained in the assembled systems and
    imposed by symmetric elimination with unit diagonal."""

    def __init__(self, num_dofs, dirichlet_mask):
        self.num_dofs = num_dofs
        self.dirichlet_mask = dirichlet_mask

    @property
    def dirichlet_dofs(self):
        return np.flatnonzero(self.dirichlet_mask)


def build_dof_map(mesh):
    """Dirichlet flags from the mesh's boundary markers (a vertex on any
    Dirichlet-marked edge is a Dirichlet dof)."""
    mask = np.zeros(mesh.num_vertices, dtype=bool)
    for edge, marker in zip(mesh.boundary_edges, mesh.boundary_markers):
        if marker == DIRICHLET:
            mask[edge[0]] = True
            mask[edge[1]] = True
    return DofMap(mesh.num_vertices, mask)


def boundary_vertex_mask(mesh):
    """Vertices lying on the outer boundary (any marker)."""
    mask = np.zeros(mesh.num_vertices, dtype=bool)
    mask[mesh.boundary_edges.ravel()] = True
    return mask


def write_mesh(mesh, path):
    """ASCII dump: vertex list, triangle list, boundary edges with markers."""
    with open(path, "w") as fh:
        fh.write(f"vertices {mesh.num_vertices}\n")
        for x, y in mesh.vertices:
            fh.write(f"{x!r} {y!r}\n")
        fh.write(f"triangles {mesh.num_triangles}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")
        fh.write(f"boundary_edges {len(mesh.boundary_edges)}\n")
        for (a, b), m in zip(mesh.boundary_edges, mesh.boundary_markers):
            fh.write(f"{a} {b} {m}\n")
