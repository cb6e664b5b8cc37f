"""Overlapping domain decomposition on a triangle mesh.

Pipeline: an element ownership partition (vertical strips or seeded greedy
growth), overlap growth by element layers, a partition of unity whose
diagonals D_j vanish on subdomain interfaces (ownership-indicator weights by
default, an optional linear ramp across the overlap), and local Robin
problems

    a_j(u,v) = int_{Omega_j}( ctilde uv + 1/2 a.grad(u) v - 1/2 u a.grad(v)
               + nu grad u . grad v ) + int_{dOmega_j \\ Gamma_D} alpha u v,

assembled from the same element kernels as the global matrix so that rows of
B_j R_j match rows of R_j A wherever D_j is nonzero.
"""

import heapq
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra

from . import linalg
from .mesh import DIRICHLET, boundary_vertex_mask, build_dof_map
from .problem import (
    _alpha_on_edges,
    edge_mass_kernels,
    element_kernels,
    eliminate_dirichlet,
    scatter_triplets,
)


@dataclass
class LocalSystem:
    """Local Robin matrix B, local weighted inner product F (no boundary
    term), their factorizations, and the applied Robin edge data (for
    reconstructing the interface mass in diagnostics).  factor_F is None when
    F is singular (possible when ctilde <= 0 locally)."""

    B: object
    F: object
    factor_B: object
    factor_F: object
    robin_edges: np.ndarray  # (ne, 2) local dof ids
    robin_alphas: np.ndarray
    robin_lengths: np.ndarray
    dirichlet_local: np.ndarray  # bool mask on local dofs


@dataclass
class Subdomain:
    index: int
    owned_elements: np.ndarray
    elements: np.ndarray  # owned + overlap layers
    dofs: np.ndarray  # sorted global dof ids; defines R_j as a gather
    interface_local: np.ndarray  # bool mask: dofs on the region boundary, off the global boundary
    weights: np.ndarray = None  # D_j diagonal, aligned with dofs
    local: LocalSystem = None

    @property
    def num_dofs(self):
        return len(self.dofs)

    def restrict(self, v):
        return v[self.dofs]

    def prolong(self, vloc, n):
        out = np.zeros(n)
        out[self.dofs] = vloc
        return out


@dataclass
class Decomposition:
    mesh: object
    N: int
    grow_layers: int  # layers added per subdomain side (k)
    partition_kind: str
    seed: int
    subdomains: list

    @property
    def overlap_layers(self):
        # total overlap between two neighbors: k layers from each side
        return 2 * self.grow_layers

    @property
    def delta(self):
        return self.overlap_layers * self.mesh.h


def element_adjacency(mesh):
    """Symmetric boolean CSR matrix: triangles sharing an edge."""
    tris = mesh.triangles
    nt = len(tris)
    nv = mesh.num_vertices
    pairs = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    lo = pairs.min(axis=1).astype(np.int64)
    hi = pairs.max(axis=1).astype(np.int64)
    enc = lo * nv + hi
    owner = np.tile(np.arange(nt), 3)
    order = np.argsort(enc, kind="stable")
    enc_s = enc[order]
    own_s = owner[order]
    same = enc_s[1:] == enc_s[:-1]
    a = own_s[:-1][same]
    b = own_s[1:][same]
    rows = np.concatenate([a, b])
    cols = np.concatenate([b, a])
    data = np.ones(len(rows), dtype=np.int8)
    return sp.csr_matrix((data, (rows, cols)), shape=(nt, nt))


def vertex_element_incidence(mesh):
    """Boolean CSR matrix (num_vertices x num_triangles): vertex in triangle."""
    tris = mesh.triangles
    nt = len(tris)
    rows = tris.ravel()
    cols = np.repeat(np.arange(nt), 3)
    data = np.ones(3 * nt, dtype=np.int8)
    return sp.csr_matrix((data, (rows, cols)), shape=(mesh.num_vertices, nt))


def partition_strips(mesh, N):
    """Ownership by vertical strips of equal width, elements assigned by
    barycenter.  Returns a list of element-id arrays."""
    x = mesh.vertices[:, 0]
    width = x.max() - x.min()
    nx_cells = int(round(width / mesh.h))
    if N > nx_cells:
        raise ValueError(f"N={N} exceeds the horizontal cell count {nx_cells}")
    xc = mesh.barycenters()[:, 0] - x.min()
    idx = np.clip(np.floor(xc / (width / N)).astype(int), 0, N - 1)
    return [np.flatnonzero(idx == j) for j in range(N)]


def partition_greedy(mesh, N, seed=0):
    """Seeded greedy partition: N seed elements spread by farthest-point
    sampling on the element adjacency graph, then balanced breadth-first
    growth (always extend the currently smallest subdomain)."""
    nt = mesh.num_triangles
    if N > nt:
        raise ValueError(f"N={N} exceeds the element count {nt}")
    adj = element_adjacency(mesh)
    rng = np.random.default_rng(seed)
    seeds = [int(rng.integers(nt))]
    dist = dijkstra(adj, unweighted=True, indices=seeds[0])
    for _ in range(N - 1):
        nxt = int(np.argmax(dist))
        seeds.append(nxt)
        dist = np.minimum(dist, dijkstra(adj, unweighted=True, indices=nxt))

    indptr, indices = adj.indptr, adj.indices
    owner = np.full(nt, -1, dtype=int)
    frontiers = [deque([s]) for s in seeds]
    sizes = [0] * N
    heap = [(0, j) for j in range(N)]
    heapq.heapify(heap)
    assigned = 0
    while heap and assigned < nt:
        size, j = heapq.heappop(heap)
        if size != sizes[j]:
            continue  # stale entry
        dq = frontiers[j]
        while dq and owner[dq[0]] != -1:
            dq.popleft()
        if not dq:
            continue  # region walled in; it stops growing
        e = dq.popleft()
        owner[e] = j
        sizes[j] += 1
        assigned += 1
        for nb in indices[indptr[e] : indptr[e + 1]]:
            if owner[nb] == -1:
                dq.append(nb)
        heapq.heappush(heap, (sizes[j], j))

    # mop up disconnected leftovers (rare): attach to an assigned neighbor
    while assigned < nt:
        progressed = False
        for e in np.flatnonzero(owner == -1):
            nbs = indices[indptr[e] : indptr[e + 1]]
            done = nbs[owner[nbs] != -1]
            if len(done):
                owner[e] = owner[done[0]]
                assigned += 1
                progressed = True
        if not progressed:
            owner[owner == -1] = 0
            break
    _rebalance_partition(owner, N, indptr, indices)
    return [np.flatnonzero(owner == j) for j in range(N)]


def _padded_neighbors(indptr, indices, nt):
    """Element adjacency as an (nt, 3) array padded with nt (a sentinel index
    whose owner lookup is made harmless by appending a -1 row)."""
    nb = np.full((nt, 3), nt, dtype=int)
    deg = np.diff(indptr)
    starts = indptr[:-1]
    for c in range(3):
        has = deg > c
        nb[has, c] = indices[starts[has] + c]
    return nb


def _grow_chunk(owner, donor, roots, m, nb):
    """Collect up to m donor-owned elements in breadth-first order starting
    from `roots` (donor elements on the recipient-facing boundary).  Any
    prefix of the BFS order is edge-connected to the recipient, so handing
    the chunk over keeps the recipient connected."""
    seen = np.zeros(owner.shape[0] + 1, dtype=bool)
    seen[-1] = True  # padded sentinel
    taken = []
    dq = deque()
    for r in roots:
        if len(taken) >= m:
            break
        seen[r] = True
        dq.append(r)
        taken.append(r)
    while dq and len(taken) < m:
        e = dq.popleft()
        for x in nb[e]:
            if not seen[x] and owner[x] == donor:
                seen[x] = True
                taken.append(x)
                if len(taken) >= m:
                    break
                dq.append(x)
    return np.asarray(taken, dtype=np.int64)


def _remnant_connected(donor_cells, chunk, nb, nt):
    """True when the donor region stays edge-connected after giving away
    `chunk` (one connected-components call on the remnant subgraph)."""
    inchunk = np.zeros(nt + 1, dtype=bool)
    inchunk[chunk] = True
    rem = donor_cells[~inchunk[donor_cells]]
    if rem.size <= 1:
        return True
    loc = np.full(nt + 1, -1, dtype=np.int64)
    loc[rem] = np.arange(rem.size)
    cols = loc[nb[rem]]
    rows = np.broadcast_to(np.arange(rem.size)[:, None], cols.shape)
    mask = cols >= 0
    g = sp.csr_matrix(
        (np.ones(int(mask.sum()), dtype=np.int8), (rows[mask], cols[mask])),
        shape=(rem.size, rem.size),
    )
    return connected_components(g, directed=False, return_labels=False) == 1


def _rebalance_partition(owner, N, indptr, indices, tol=0.10):
    """Even out element counts until every region is within `tol` of the
    mean.  Bulk routing is diffusive load balancing: solving the region
    adjacency-graph Laplacian L phi = sizes - avg gives per-edge transfer
    amounts phi_a - phi_b whose execution balances the partition exactly,
    and each sweep moves those amounts as connected boundary chunks
    (connectivity preserved on both sides; blocked demand is re-solved next
    sweep).  A final worst-deviation-first pass polishes rounding leftovers
    with half-difference chunk moves, which strictly shrink the squared-size
    spread and so terminate."""
    nt = owner.shape[0]
    avg = nt / N
    lo, hi = (1.0 - tol) * avg, (1.0 + tol) * avg
    sizes = np.bincount(owner, minlength=N)
    if sizes.min() >= lo and sizes.max() <= hi:
        return
    nb = _padded_neighbors(indptr, indices, nt)
    owner_ext = np.concatenate([owner, [-1]])  # sentinel row for padding

    def transfer(donor, recv, m):
        # move up to m elements as one connected chunk grown off the
        # donor/recipient boundary; halve on a failed connectivity check
        m = min(int(m), int(sizes[donor]) - 1)
        if m < 1:
            return 0
        donor_cells = np.flatnonzero(owner == donor)
        roots = donor_cells[np.any(owner_ext[nb[donor_cells]] == recv, axis=1)]
        if roots.size == 0:
            return 0
        while m >= 1:
            chunk = _grow_chunk(owner, donor, roots, m, nb)
            if _remnant_connected(donor_cells, chunk, nb, nt):
                owner[chunk] = recv
                owner_ext[chunk] = recv
                sizes[donor] -= chunk.size
                sizes[recv] += chunk.size
                return int(chunk.size)
            m //= 2
        return 0

    def region_edges():
        owner_nb = owner_ext[nb]
        cross = (owner_nb >= 0) & (owner_nb != owner[:, None])
        here = np.broadcast_to(owner[:, None], owner_nb.shape)
        enc = np.unique(here[cross].astype(np.int64) * N + owner_nb[cross])
        da, db = enc // N, enc % N
        keep = da < db
        return da[keep], db[keep]

    # bulk phase: diffusion-flow sweeps
    for _ in range(30):
        if sizes.min() >= lo and sizes.max() <= hi:
            break
        ea, eb = region_edges()
        lap = np.zeros((N, N))
        lap[ea, eb] = lap[eb, ea] = -1.0
        np.fill_diagonal(lap, -lap.sum(axis=1))
        phi = np.linalg.lstsq(lap, sizes - avg, rcond=None)[0]
        flow = phi[ea] - phi[eb]  # elements owed along each edge, signed
        moved = 0
        for i in np.argsort(-np.abs(flow)):
            m = int(round(abs(flow[i])))
            if m < 1:
                break
            if flow[i] > 0:
                donor, recv = int(ea[i]), int(eb[i])
            else:
                donor, recv = int(eb[i]), int(ea[i])
            # never overdraw a donor past the lower band on bulk moves
            m = min(m, int(sizes[donor] - np.ceil(lo)))
            moved += transfer(donor, recv, m)
        if moved == 0:
            break

    # polish phase: worst-deviation-first half-difference moves
    for _ in range(64 * N):
        if sizes.min() >= lo and sizes.max() <= hi:
            break
        owner_nb = owner_ext[nb]
        moved = False
        dev = np.maximum(lo - sizes, sizes - hi)
        for j in np.argsort(-dev):
            if dev[j] <= 0:
                break
            # regions adjacent to j
            if sizes[j] < lo:
                touch = (owner_nb == j).any(axis=1) & (owner != j)
                neigh = np.unique(owner[touch])
                neigh = neigh[sizes[neigh] - sizes[j] >= 2]
                # pull from the largest neighbor first
                attempts = [(int(r), int(j)) for r in neigh[np.argsort(-sizes[neigh])]]
            else:
                mine = owner == j
                touch = np.unique(owner_nb[mine])
                neigh = touch[(touch != j) & (touch >= 0)]
                neigh = neigh[sizes[j] - sizes[neigh] >= 2]
                # push into the smallest neighbor first
                attempts = [(int(j), int(r)) for r in neigh[np.argsort(sizes[neigh])]]
            for donor, recv in attempts:
                if transfer(donor, recv, (sizes[donor] - sizes[recv]) // 2):
                    moved = True
                    break
            if moved:
                break
        if not moved:
            # no out-of-range region can trade with a direct neighbor: take
            # one step along the steepest adjacent size gradient so mass can
            # route around intermediate regions
            ea, eb = region_edges()
            grad = sizes[ea] - sizes[eb]
            order = np.argsort(-np.abs(grad))
            for i in order:
                if abs(grad[i]) < 2:
                    break
                donor, recv = (int(ea[i]), int(eb[i])) if grad[i] > 0 else (int(eb[i]), int(ea[i]))
                if transfer(donor, recv, abs(int(grad[i])) // 2):
                    moved = True
                    break
        if not moved:
            break


def add_overlap_layers(mesh, ownership, k):
    """Grow each owned element set by k layers of shared-vertex adjacency and
    record dof sets and interface flags.  Returns a Decomposition skeleton
    (partition of unity and local systems not yet built)."""
    if k < 1:
        raise ValueError("overlap growth needs k >= 1")
    inc = vertex_element_incidence(mesh)
    inc_t = inc.T.tocsr()
    on_gamma = boundary_vertex_mask(mesh)
    subdomains = []
    for j, owned in enumerate(ownership):
        emask = np.zeros(mesh.num_triangles, dtype=bool)
        emask[owned] = True
        for _ in range(k):
            vmask = (inc @ emask.astype(np.int8)) > 0
            emask = (inc_t @ vmask.astype(np.int8)) > 0
        elems = np.flatnonzero(emask)
        dofs = np.unique(mesh.triangles[elems])
        bverts = _region_boundary_vertices(mesh, elems)
        interface = np.isin(dofs, bverts) & ~on_gamma[dofs]
        subdomains.append(
            Subdomain(
                index=j,
                owned_elements=np.asarray(owned),
                elements=elems,
                dofs=dofs,
                interface_local=interface,
            )
        )
    return subdomains


def _region_boundary_edges(mesh, elems):
    """Edges of the submesh with multiplicity 1, with the third vertex of the
    single adjacent in-region triangle (for normal orientation)."""
    tris = mesh.triangles[elems]
    nv = mesh.num_vertices
    pairs = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    opp = np.concatenate([tris[:, 2], tris[:, 0], tris[:, 1]])
    lo = pairs.min(axis=1).astype(np.int64)
    hi = pairs.max(axis=1).astype(np.int64)
    enc = lo * nv + hi
    uniq, first, counts = np.unique(enc, return_index=True, return_counts=True)
    single = first[counts == 1]
    return pairs[single], opp[single]


def _region_boundary_vertices(mesh, elems):
    edges, _ = _region_boundary_edges(mesh, elems)
    return np.unique(edges)


def build_partition_of_unity(mesh, subdomains, grow_layers, kind="ownership"):
    """Fill Subdomain.weights with a partition of unity supported away from
    the subdomain interfaces.

    kind="ownership" (default, matches the reference iteration counts): raw
    weight w_j(i) = 1 when dof i is a vertex of an element *owned* by
    subdomain j, else 0 — so chi_j is 1 strictly inside the ownership region,
    splits evenly on ownership seams, and vanishes on the whole grown ring
    (in particular on every interface dof, which sits k >= 1 layers outside
    the seam).

    kind="ramp": w_j(i) = min(layerdist_j(i), m)/m with m = 2k, where
    layerdist_j is the vertex graph distance (two dofs adjacent when they
    share an element of Omega_j) to the interface set; interface dofs get 0,
    dofs unreachable from the interface get 1.  This spreads chi_j linearly
    across the overlap.

    Either way chi_j = w_j / sum_l w_l, with the last contributing subdomain
    per dof taking 1 minus the others so the partition sums to 1 exactly.
    """
    if kind not in ("ownership", "ramp"):
        raise ValueError(f"unknown partition-of-unity kind {kind!r}")
    n = mesh.num_vertices
    m = 2 * grow_layers
    raw = []
    wsum = np.zeros(n)
    last = np.full(n, -1, dtype=int)
    for sd in subdomains:
        if kind == "ownership":
            owned_verts = np.unique(mesh.triangles[sd.owned_elements])
            w = np.isin(sd.dofs, owned_verts).astype(float)
        else:
            dist = _layer_distance(mesh, sd, cap=m)
            w = np.minimum(dist, m) / m
        raw.append(w)
        wsum[sd.dofs] += w
        pos = sd.dofs[w > 0]
        last[pos] = sd.index
    if not np.all(wsum[np.unique(np.concatenate([sd.dofs for sd in subdomains]))] > 0):
        raise AssertionError("partition of unity: a dof has zero total weight")

    chi_others = np.zeros(n)
    for sd, w in zip(subdomains, raw):
        chi = w / wsum[sd.dofs]
        sd.weights = chi
        not_last = last[sd.dofs] != sd.index
        chi_others[sd.dofs[not_last]] += chi[not_last]
    for sd in subdomains:
        is_last = last[sd.dofs] == sd.index
        sd.weights = sd.weights.copy()
        sd.weights[is_last] = 1.0 - chi_others[sd.dofs[is_last]]
    return subdomains


def _layer_distance(mesh, sd, cap):
    """Graph distance (in element layers) from the interface set, within the
    subdomain, capped at `cap`.  Returns an array aligned with sd.dofs."""
    dofs = sd.dofs
    nloc = len(dofs)
    tris = mesh.triangles[sd.elements]
    loc = np.searchsorted(dofs, tris)  # local triangle connectivity
    rows = np.repeat(loc, 3, axis=1).ravel()
    cols = np.tile(loc, (1, 3)).ravel()
    adj = sp.csr_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(nloc, nloc))
    dist = np.full(nloc, np.inf)
    frontier = sd.interface_local.copy()
    dist[frontier] = 0.0
    for level in range(1, cap + 1):
        if not frontier.any():
            break
        reached = (adj @ frontier.astype(np.int8)) > 0
        newly = reached & np.isinf(dist)
        dist[newly] = level
        frontier = newly
    return dist


def assemble_local(mesh, pd, sd, dirichlet_mask):
    """Assemble and factorize the local Robin problem B and the local
    weighted inner product F for one subdomain.

    B carries the Robin term (coefficient robin_alpha, outward normal) on
    every region boundary edge not marked Dirichlet on the global boundary;
    F has no boundary term.  Global Dirichlet dofs inside the subdomain are
    eliminated exactly as in the global assembly.  SUPG, when active in pd,
    enters through the shared element kernels.
    """
    dofs = sd.dofs
    nloc = len(dofs)
    tris = mesh.triangles[sd.elements]
    loc_tris = np.searchsorted(dofs, tris)

    A_e, F_e, _ = element_kernels(mesh, pd, sd.elements)
    rb, cb, vb = scatter_triplets(A_e, loc_tris)
    rf, cf, vf = scatter_triplets(F_e, loc_tris)

    edges, opp = _region_boundary_edges(mesh, sd.elements)
    marker = _global_edge_markers(mesh)
    keep = np.array(
        [marker.get(_ekey(e, mesh.num_vertices)) != DIRICHLET for e in edges], dtype=bool
    )
    edges = edges[keep]
    opp = opp[keep]
    if len(edges):
        p0 = mesh.vertices[edges[:, 0]]
        p1 = mesh.vertices[edges[:, 1]]
        mids = 0.5 * (p0 + p1)
        tang = p1 - p0
        lengths = np.linalg.norm(tang, axis=1)
        normals = np.column_stack([tang[:, 1], -tang[:, 0]]) / lengths[:, None]
        flip = np.einsum("ij,ij->i", normals, mesh.vertices[opp] - mids) > 0
        normals[flip] = -normals[flip]
        alphas = _alpha_on_edges(pd, mids, normals)
        E = edge_mass_kernels(lengths, alphas)
        loc_edges = np.searchsorted(dofs, edges)
        re, ce, ve = scatter_triplets(E, loc_edges)
        rb = np.concatenate([rb, re])
        cb = np.concatenate([cb, ce])
        vb = np.concatenate([vb, ve])
    else:
        loc_edges = np.zeros((0, 2), dtype=int)
        alphas = np.zeros(0)
        lengths = np.zeros(0)

    dir_loc = dirichlet_mask[dofs]
    rb, cb, vb = eliminate_dirichlet(rb, cb, vb, dir_loc)
    rf, cf, vf = eliminate_dirichlet(rf, cf, vf, dir_loc)
    B = linalg.sparse_from_triplets(nloc, nloc, (rb, cb, vb))
    F = linalg.sparse_from_triplets(nloc, nloc, (rf, cf, vf))

    factor_B = linalg.factorize(B)  # SingularMatrixError propagates: B must be invertible
    try:
        factor_F = linalg.factorize(F)
    except linalg.SingularMatrixError:
        factor_F = None

    return LocalSystem(
        B=B,
        F=F,
        factor_B=factor_B,
        factor_F=factor_F,
        robin_edges=loc_edges,
        robin_alphas=alphas,
        robin_lengths=lengths,
        dirichlet_local=dir_loc,
    )


def _ekey(edge, nv):
    a, b = int(edge[0]), int(edge[1])
    return (min(a, b) * nv + max(a, b))


def _global_edge_markers(mesh):
    nv = mesh.num_vertices
    return {
        _ekey(e, nv): mk for e, mk in zip(mesh.boundary_edges, mesh.boundary_markers)
    }


def build_geometry(mesh, N, grow_layers, partition="strips", seed=0, pu="ownership"):
    """Partition + overlap + partition of unity (no coefficient data)."""
    if partition == "strips":
        ownership = partition_strips(mesh, N)
    elif partition == "greedy":
        ownership = partition_greedy(mesh, N, seed)
    else:
        raise ValueError(f"unknown partition kind {partition!r}")
    subdomains = add_overlap_layers(mesh, ownership, grow_layers)
    build_partition_of_unity(mesh, subdomains, grow_layers, kind=pu)
    return Decomposition(
        mesh=mesh,
        N=N,
        grow_layers=grow_layers,
        partition_kind=partition,
        seed=seed,
        subdomains=subdomains,
    )


def attach_local_systems(dec, pd):
    """Assemble and factorize every subdomain's local system for the given
    coefficients (reusable geometry, fresh physics)."""
    dirichlet_mask = build_dof_map(dec.mesh).dirichlet_mask
    for sd in dec.subdomains:
        sd.local = assemble_local(dec.mesh, pd, sd, dirichlet_mask)
    return dec


def build_decomposition(mesh, pd, N, grow_layers, partition="strips", seed=0, pu="ownership"):
    """One-call pipeline: geometry plus local systems."""
    return attach_local_systems(build_geometry(mesh, N, grow_layers, partition, seed, pu), pd)


def pu_identity_defect(dec):
    """max_i |(sum_j R_j^T D_j R_j - I)_ii| — the partition-of-unity check
    (the operator is diagonal by construction)."""
    acc = np.zeros(dec.mesh.num_vertices)
    for sd in dec.subdomains:
        acc[sd.dofs] += sd.weights
    return np.abs(acc - 1.0).max()


def write_decomposition(dec, path):
    """ASCII dump: per subdomain, the dof list with partition-of-unity
    weights and interface flags."""
    with open(path, "w") as fh:
        fh.write(
            f"decomposition N={dec.N} grow_layers={dec.grow_layers} "
            f"partition={dec.partition_kind} seed={dec.seed}\n"
        )
        for sd in dec.subdomains:
            fh.write(
                f"subdomain {sd.index}: {len(sd.elements)} elements "
                f"({len(sd.owned_elements)} owned), {sd.num_dofs} dofs\n"
            )
            for i, dof in enumerate(sd.dofs):
                flag = "I" if sd.interface_local[i] else "."
                fh.write(f"  {dof} {sd.weights[i]:.17g} {flag}\n")
