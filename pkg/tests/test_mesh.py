from pathlib import Path

import numpy as np
import pytest

from posefocal.mesh import (
    BUILTIN_MESHES,
    MeshError,
    TriMesh,
    box,
    builtin_mesh,
    icosphere,
    load_mesh,
    parse_mesh,
    sample_mesh_points,
    unit_cube,
)

FIX = Path(__file__).resolve().parent / "fixtures"


def test_load_cube_fixture():
    m = load_mesh(FIX / "cube.obj")
    assert m.vertices.shape == (8, 3)
    assert m.triangles.shape == (12, 3)
    assert m.face_areas().sum() == pytest.approx(6.0, rel=1e-15)


def test_quad_face_names_line():
    with pytest.raises(MeshError, match="line 6") as exc:
        load_mesh(FIX / "quad.obj")
    assert exc.value.line == 6


def test_empty_file_is_degenerate():
    with pytest.raises(MeshError):
        load_mesh(FIX / "empty.obj")


def test_missing_file():
    with pytest.raises(OSError):
        load_mesh(FIX / "no_such_mesh.obj")


@pytest.mark.parametrize(
    "text, line",
    [
        ("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n", 4),
        ("v 0 0\n", 1),
        ("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 a 3\n", 4),
        ("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n", 4),
    ],
)
def test_malformed_lines(text, line):
    with pytest.raises(MeshError) as exc:
        parse_mesh(text)
    assert exc.value.line == line


def test_slash_faces_and_ignored_lines():
    m = parse_mesh("o thing\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1/1 2/2/2 3//3\n")
    np.testing.assert_array_equal(m.triangles, [[0, 1, 2]])


def test_zero_area_rejected():
    with pytest.raises(MeshError):
        TriMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])


def test_builtins():
    assert set(BUILTIN_MESHES) >= {"cube", "box", "sphere", "unit_cube"}
    assert unit_cube().face_areas().sum() == pytest.approx(6.0)
    b = box((0.3, 0.2, 0.1))
    assert b.face_areas().sum() == pytest.approx(2 * (0.06 + 0.03 + 0.02))
    s = icosphere(0.5, 3)
    np.testing.assert_allclose(np.linalg.norm(s.vertices, axis=1), 0.5, rtol=1e-12)
    assert s.face_areas().sum() == pytest.approx(4 * np.pi * 0.25, rel=0.01)
    with pytest.raises(ValueError, match="teapot"):
        builtin_mesh("teapot")


def test_single_triangle_barycentric_validity():
    tri = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.5]])
    pts = sample_mesh_points(TriMesh(tri, [[0, 1, 2]]), 20_000, seed=1)
    A = np.column_stack([tri[1] - tri[0], tri[2] - tri[0]])
    uv, *_ = np.linalg.lstsq(A, (pts - tri[0]).T, rcond=None)
    assert np.all(uv >= -1e-12) and np.all(uv.sum(axis=0) <= 1 + 1e-12)
    np.testing.assert_allclose(A @ uv + tri[0][:, None], pts.T, atol=1e-12)
    # uniform density: the mean is the centroid
    np.testing.assert_allclose(pts.mean(axis=0), tri.mean(axis=0), atol=0.02)


def test_cube_face_counts_binomial():
    n = 100_000
    pts = sample_mesh_points(unit_cube(), n, seed=11)
    counts = []
    for axis in range(3):
        for sign in (-0.5, 0.5):
            counts.append(int(np.sum(np.abs(pts[:, axis] - sign) < 1e-12)))
    assert sum(counts) == n
    sigma = np.sqrt(n * (1 / 6) * (5 / 6))
    assert max(abs(c - n / 6) for c in counts) < 4 * sigma


def test_sampling_deterministic():
    m = builtin_mesh("sphere")
    np.testing.assert_array_equal(sample_mesh_points(m, 500, 4), sample_mesh_points(m, 500, 4))
    assert not np.array_equal(sample_mesh_points(m, 500, 4), sample_mesh_points(m, 500, 5))


def test_sampling_rejects_zero_count():
    with pytest.raises(ValueError):
        sample_mesh_points(unit_cube(), 0, 0)
