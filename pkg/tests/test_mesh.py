import numpy as np
import pytest

from macrolab.mesh import MeshError, gen_mesh, parse_shape, random_rotation, read_mesh, write_mesh

SHAPES = ["ball", ("spheroid", 1.0, 1.5), ("ellipsoid", 1.0, 1.3, 1.7)]


def test_ball_level0_area():
    m = gen_mesh("ball", 0)
    m.validate()
    assert abs(m.face_areas.sum() - 4 * np.pi) < 0.15 * 4 * np.pi


@pytest.mark.parametrize("shape", SHAPES)
def test_generated_meshes_are_valid(shape):
    m = gen_mesh(shape, 2)
    m.validate()
    assert np.all(m.tet_volumes > 0)
    assert np.max(np.abs(np.linalg.norm(m.boundary_normals, axis=1) - 1)) < 1e-12
    # boundary vertices on the exact surface
    x = m.vertices[m.boundary_vertices] / m.axes
    assert np.max(np.abs(np.sum(x * x, axis=1) - 1)) < 1e-12
    # normals point outward: face centroid . normal > 0 for these star-shaped domains
    c = m.vertices[m.boundary_faces].mean(axis=1)
    assert np.all(np.einsum("ij,ij->i", c, m.boundary_normals) > 0)
    # parents contain their faces
    for f, t in zip(m.boundary_faces[:20], m.boundary_parent[:20]):
        assert set(f) <= set(m.tets[t])


def test_volume_converges():
    vols = [gen_mesh("ball", lv).volume for lv in range(4)]
    errs = [abs(v - 4 / 3 * np.pi) for v in vols]
    assert errs == sorted(errs, reverse=True)
    assert errs[-1] < 0.01 * 4 / 3 * np.pi


def test_degenerate_axes_rejected():
    with pytest.raises(MeshError):
        gen_mesh(("spheroid", 1.0, 0.0), 0)
    with pytest.raises(MeshError):
        gen_mesh(("ellipsoid", 1.0, -1.0, 2.0), 0)
    with pytest.raises(MeshError):
        gen_mesh("torus", 0)
    with pytest.raises(MeshError):
        gen_mesh("ball", -1)


def test_parse_shape():
    assert parse_shape("spheroid(1, 1.5)") == ("spheroid", 1.0, 1.5)
    assert parse_shape("ball") == "ball"
    with pytest.raises(MeshError):
        parse_shape("ellipsoid(1,a,2)")


def test_interior_faces_consistent():
    m = gen_mesh("ball", 1)
    t0, t1, area, normal = m.interior_faces
    assert len(t0) * 2 + len(m.boundary_faces) == 4 * m.nt
    d = m.centroids[t1] - m.centroids[t0]
    assert np.all(np.einsum("ij,ij->i", d, normal) > 0)
    # closed cells: sum of outward area-weighted normals vanishes per tet
    acc = np.zeros((m.nt, 3))
    np.add.at(acc, t0, area[:, None] * normal)
    np.add.at(acc, t1, -area[:, None] * normal)
    np.add.at(acc, m.boundary_parent, m.face_areas[:, None]
              * np.cross(*(m.vertices[m.boundary_faces][:, k] - m.vertices[m.boundary_faces][:, 0]
                           for k in (1, 2))) / (2 * m.face_areas[:, None]))
    assert np.max(np.abs(acc)) < 1e-12


def test_roundtrip(tmp_path):
    m = gen_mesh(("spheroid", 1.0, 1.5), 1)
    p = tmp_path / "m.msh3"
    write_mesh(m, p)
    r = read_mesh(p)
    r.validate()
    assert np.array_equal(r.tets, m.tets)
    assert np.array_equal(r.vertices, m.vertices)
    assert np.array_equal(r.boundary_parent, m.boundary_parent)
    assert np.allclose(r.vertex_normals, m.vertex_normals, atol=1e-15)


def test_read_rejects_garbage(tmp_path):
    p = tmp_path / "bad.msh3"
    p.write_text("msh3 1 0 0\nv 0 0\n")
    with pytest.raises(MeshError):
        read_mesh(p)
    p.write_text("hello\n")
    with pytest.raises(MeshError):
        read_mesh(p)


def test_rotation_preserves_geometry():
    m = gen_mesh(("ellipsoid", 1.0, 1.3, 1.7), 1)
    q = random_rotation(3)
    r = m.rotated(q)
    r.validate()
    assert np.allclose(r.tet_volumes, m.tet_volumes, rtol=1e-12)
    assert np.allclose(r.vertex_normals, m.vertex_normals @ q.T, atol=1e-12)
