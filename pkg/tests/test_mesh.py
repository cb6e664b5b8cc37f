"""Structured mesh invariants: counts, areas, boundary classification, and
the dof map."""

import numpy as np
import pytest

from schwarzdd.mesh import (
    DIRICHLET,
    ROBIN,
    boundary_vertex_mask,
    build_dof_map,
    build_rect_mesh,
    classify_boundary,
    write_mesh,
)


def test_structured_counts():
    nx, ny = 12, 5
    mesh = build_rect_mesh(1.2, 0.5, nx, ny)
    assert mesh.num_vertices == (nx + 1) * (ny + 1)
    assert mesh.num_triangles == 2 * nx * ny
    assert len(mesh.boundary_edges) == 2 * (nx + ny)
    assert mesh.h == pytest.approx(1.2 / nx)


def test_total_area_and_orientation():
    mesh = build_rect_mesh(0.6, 0.2, 18, 6)
    areas = mesh.triangle_areas()
    assert np.all(areas > 0)  # counterclockwise triangles
    assert abs(areas.sum() - 0.6 * 0.2) <= 1e-12 * 0.6 * 0.2


def test_uniform_spacing_in_experiment_configurations():
    # the experiment convention: [0, 0.2N] x [0, 0.2] with (cells*N) x cells
    for N, cells in ((1, 60), (5, 60), (3, 20)):
        mesh = build_rect_mesh(0.2 * N, 0.2, cells * N, cells)
        assert mesh.h == pytest.approx(0.2 / cells)
        assert 0.2 * N / (cells * N) == pytest.approx(0.2 / cells)


def test_boundary_edges_belong_to_exactly_one_triangle():
    mesh = build_rect_mesh(0.4, 0.3, 4, 3)
    # count triangles adjacent to each boundary edge
    edge_count = {}
    for tri in mesh.triangles:
        for i in range(3):
            a, b = tri[i], tri[(i + 1) % 3]
            edge_count[(min(a, b), max(a, b))] = edge_count.get((min(a, b), max(a, b)), 0) + 1
    for a, b in mesh.boundary_edges:
        assert edge_count[(min(a, b), max(a, b))] == 1


def test_all_dirichlet_by_default_and_dof_map():
    mesh = build_rect_mesh(1.0, 1.0, 6, 6)
    assert all(mk == DIRICHLET for mk in mesh.boundary_markers)
    dm = build_dof_map(mesh)
    assert dm.num_dofs == mesh.num_vertices
    # Dirichlet dofs == boundary vertices for an all-Dirichlet boundary
    assert np.array_equal(dm.dirichlet_mask, boundary_vertex_mask(mesh))
    assert dm.dirichlet_mask.sum() == 2 * (6 + 6)  # perimeter vertex count


def test_classify_boundary_moves_edges_to_robin():
    mesh = build_rect_mesh(1.0, 1.0, 8, 8)
    remarked = classify_boundary(mesh, lambda x, y: x > 0.999)  # right side
    robins = [m for m in remarked.boundary_markers if m == ROBIN]
    assert len(robins) == 8  # one column of edges
    # geometry shared, markers replaced
    assert remarked.vertices is mesh.vertices
    dm = build_dof_map(remarked)
    assert dm.dirichlet_mask.sum() < boundary_vertex_mask(remarked).sum()


def test_dofs_experiment_scale_counts():
    # the weak-scaling meshes: (60N+1)*61 dofs
    for N, want in ((2, 7381), (4, 14701), (5, 18361)):
        mesh = build_rect_mesh(0.2 * N, 0.2, 60 * N, 60)
        assert mesh.num_vertices == want


def test_invalid_arguments():
    with pytest.raises(ValueError):
        build_rect_mesh(0.0, 1.0, 4, 4)
    with pytest.raises(ValueError):
        build_rect_mesh(1.0, 1.0, 0, 4)


def test_write_mesh(tmp_path):
    mesh = build_rect_mesh(1.0, 0.5, 2, 1)
    path = tmp_path / "mesh.txt"
    write_mesh(mesh, path)
    lines = path.read_text().splitlines()
    assert lines[0] == f"vertices {mesh.num_vertices}"
    assert len(lines) == (
        1 + mesh.num_vertices + 1 + mesh.num_triangles + 1 + len(mesh.boundary_edges)
    )
