"""Tetrahedral meshes of balls, spheroids and triaxial ellipsoids.

The generator starts from a uniform cube grid on [-1, 1]^3, splits each cube
into six tetrahedra (Kuhn split, mirrored per octant so that every cube
diagonal points away from the origin) and maps the cube radially onto the
unit ball with ``p -> p * |p|_inf / |p|_2``.  Cube-surface vertices therefore
land exactly on the sphere; a final axis scaling gives ellipsoids.

Meshes can be written to and read from a small ASCII format::

    msh3 <nv> <nt> <nb>
    v x y z
    t i j k l
    b i j k nx ny nz

Optional ``n i nx ny nz`` lines carry exact vertex normals and ``axes a b c``
records the semi-axes of the generating ellipsoid.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np


class MeshError(ValueError):
    """Raised for degenerate shapes or malformed mesh files."""


def _shape_axes(shape) -> np.ndarray:
    if isinstance(shape, str):
        name, args = shape, ()
    else:
        name, args = shape[0], tuple(shape[1:])
    if name == "ball":
        axes = (1.0, 1.0, 1.0) if not args else (args[0],) * 3
    elif name == "spheroid":
        if len(args) != 2:
            raise MeshError("spheroid needs (a, c)")
        axes = (args[0], args[0], args[1])
    elif name == "ellipsoid":
        if len(args) != 3:
            raise MeshError("ellipsoid needs (a, b, c)")
        axes = args
    else:
        raise MeshError(f"unknown shape {name!r}")
    axes = np.asarray(axes, dtype=float)
    if not np.all(np.isfinite(axes)) or np.any(axes <= 0):
        raise MeshError(f"degenerate semi-axes {tuple(axes)}")
    return axes


def parse_shape(text: str):
    """Parse ``ball``, ``spheroid(1,1.5)`` or ``ellipsoid(1,1.3,1.7)``."""
    text = text.strip().replace(" ", "")
    if "(" not in text:
        return text
    name, rest = text.split("(", 1)
    if not rest.endswith(")"):
        raise MeshError(f"bad shape {text!r}")
    try:
        args = tuple(float(a) for a in rest[:-1].split(",") if a)
    except ValueError as exc:
        raise MeshError(f"bad shape {text!r}") from exc
    return (name, *args)


def default_shape_args(name: str):
    """Shape tuples used when only a name is given on the command line."""
    return {"ball": "ball", "spheroid": ("spheroid", 1.0, 1.5),
            "ellipsoid": ("ellipsoid", 1.0, 1.3, 1.7)}[name]


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable tetrahedral mesh.

    ``boundary_faces`` are oriented outward; ``boundary_normals`` are unit
    normals (the analytic surface normal at the face centroid for generated
    meshes).  ``vertex_normals`` holds exact normals at boundary vertices when
    they are known; otherwise area-weighted averages of face normals are used.
    """

    vertices: np.ndarray
    tets: np.ndarray
    boundary_faces: np.ndarray
    boundary_normals: np.ndarray
    boundary_parent: np.ndarray
    axes: Optional[np.ndarray] = None
    frame: np.ndarray = field(default_factory=lambda: np.eye(3))
    exact_vertex_normals: Optional[dict] = None

    # -------------------------------------------------------------- geometry
    @cached_property
    def nv(self) -> int:
        return len(self.vertices)

    @cached_property
    def nt(self) -> int:
        return len(self.tets)

    @cached_property
    def tet_volumes(self) -> np.ndarray:
        p = self.vertices[self.tets]
        d = p[:, 1:] - p[:, :1]
        return np.linalg.det(d) / 6.0

    @cached_property
    def barycentric_gradients(self) -> np.ndarray:
        """Gradients of the four barycentric coordinates, shape (nt, 4, 3)."""
        p = self.vertices[self.tets]
        d = p[:, 1:] - p[:, :1]
        inv = np.linalg.inv(d)  # rows of inv^T are gradients of lambda_1..3
        g = np.empty((self.nt, 4, 3))
        g[:, 1:] = np.transpose(inv, (0, 2, 1))
        g[:, 0] = -g[:, 1:].sum(axis=1)
        return g

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.tets].mean(axis=1)

    @cached_property
    def face_areas(self) -> np.ndarray:
        p = self.vertices[self.boundary_faces]
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.boundary_faces)

    @property
    def volume(self) -> float:
        return float(self.tet_volumes.sum())

    def surface_normal(self, x: np.ndarray) -> np.ndarray:
        """Analytic outward unit normal of the generating ellipsoid at points x.

        The formula grad(x^2/a^2 + y^2/b^2 + z^2/c^2) is evaluated as is, so
        points slightly inside the surface (on flat faces) are allowed.
        """
        if self.axes is None:
            raise MeshError("mesh has no analytic surface")
        y = np.asarray(x, dtype=float) @ self.frame
        g = y / self.axes ** 2
        g = g @ self.frame.T
        return g / np.linalg.norm(g, axis=-1, keepdims=True)

    @cached_property
    def vertex_normals(self) -> np.ndarray:
        """Unit normals at boundary vertices (rows follow ``boundary_vertices``)."""
        bv = self.boundary_vertices
        if self.exact_vertex_normals is not None:
            return np.array([self.exact_vertex_normals[int(i)] for i in bv], dtype=float)
        if self.axes is not None:
            return self.surface_normal(self.vertices[bv])
        acc = np.zeros((self.nv, 3))
        w = (self.face_areas[:, None] * self.boundary_normals)
        for k in range(3):
            np.add.at(acc, self.boundary_faces[:, k], w)
        n = acc[bv]
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    # ----------------------------------------------------------- connectivity
    @cached_property
    def _face_table(self):
        local = np.array([[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]])
        faces = self.tets[:, local].reshape(-1, 3)
        key = np.sort(faces, axis=1)
        _, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.ravel()
        owner = np.repeat(np.arange(self.nt), 4)
        return faces, inverse, counts, owner

    @cached_property
    def interior_faces(self):
        """(tet0, tet1, area, unit normal pointing from tet0 into tet1)."""
        faces, inverse, counts, owner = self._face_table
        order = np.argsort(inverse, kind="stable")
        inv_sorted = inverse[order]
        shared = counts[inv_sorted] == 2
        idx = order[shared].reshape(-1, 2)
        t0, t1 = owner[idx[:, 0]], owner[idx[:, 1]]
        p = self.vertices[faces[idx[:, 0]]]
        cr = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        area = 0.5 * np.linalg.norm(cr, axis=1)
        normal = cr / (2 * area[:, None])
        return t0, t1, area, normal

    # ------------------------------------------------------------- transforms
    def rotated(self, q: np.ndarray) -> "Mesh":
        """Return the mesh rotated by the orthogonal matrix q."""
        q = np.asarray(q, dtype=float)
        ev = None
        if self.exact_vertex_normals is not None:
            ev = {k: q @ np.asarray(v) for k, v in self.exact_vertex_normals.items()}
        return Mesh(self.vertices @ q.T, self.tets.copy(), self.boundary_faces.copy(),
                    self.boundary_normals @ q.T, self.boundary_parent.copy(),
                    None if self.axes is None else self.axes.copy(), q @ self.frame, ev)

    def validate(self, tol: float = 1e-12) -> None:
        """Check the structural invariants; raise MeshError on violation."""
        if np.any(self.tet_volumes <= 0):
            raise MeshError("non-positive tetrahedron volume")
        if np.any(np.abs(np.linalg.norm(self.boundary_normals, axis=1) - 1) > tol):
            raise MeshError("boundary normals are not unit length")
        faces, inverse, counts, owner = self._face_table
        if np.any(counts > 2):
            raise MeshError("face shared by more than two tetrahedra")
        if int(np.sum(counts == 1)) != len(self.boundary_faces):
            raise MeshError("boundary faces do not tile the surface")
        # closed surface: every boundary edge is shared by exactly two faces
        e = np.sort(self.boundary_faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        _, ec = np.unique(e, axis=0, return_counts=True)
        if np.any(ec != 2):
            raise MeshError("boundary surface is not watertight")


# ------------------------------------------------------------------ generation

def _kuhn_cube_grid(n: int):
    """Vertices and tetrahedra of the mirrored Kuhn split of [-1, 1]^3."""
    g = np.linspace(-1.0, 1.0, n + 1)
    X, Y, Z = np.meshgrid(g, g, g, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)

    def vid(i, j, k):
        return (i * (n + 1) + j) * (n + 1) + k

    ii, jj, kk = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    base = np.stack([ii.ravel(), jj.ravel(), kk.ravel()], axis=1)
    flip = (base + 0.5) < n / 2  # flip local bits in the negative half of each axis
    tets = []
    for perm in itertools.permutations(range(3)):
        path = [np.zeros(3, int)]
        for ax in perm:
            nxt = path[-1].copy()
            nxt[ax] = 1
            path.append(nxt)
        corners = []
        for bits in path:
            b = np.where(flip, 1 - bits, bits)
            c = base + b
            corners.append(vid(c[:, 0], c[:, 1], c[:, 2]))
        tets.append(np.stack(corners, axis=1))
    return pts, np.concatenate(tets, axis=0)


def _boundary_of(vertices: np.ndarray, tets: np.ndarray):
    local = np.array([[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]])
    faces = tets[:, local].reshape(-1, 3)
    key = np.sort(faces, axis=1)
    _, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    once = counts[inverse.ravel()] == 1
    parent = np.repeat(np.arange(len(tets)), 4)[once]
    return faces[once], parent


def _orient(vertices: np.ndarray, tets: np.ndarray) -> np.ndarray:
    p = vertices[tets]
    vol = np.linalg.det(p[:, 1:] - p[:, :1])
    tets = tets.copy()
    neg = vol < 0
    tets[neg, 2], tets[neg, 3] = tets[neg, 3].copy(), tets[neg, 2].copy()
    return tets


def gen_mesh(shape="ball", level: int = 0) -> Mesh:
    """Generate a tetrahedral mesh of a ball, spheroid or ellipsoid.

    ``shape`` is ``"ball"``, ``("spheroid", a, c)`` or ``("ellipsoid", a, b, c)``
    (a string such as ``"spheroid(1,1.5)"`` is accepted too).  The cube grid
    has ``2**(level + 1)`` cells per axis.
    """
    if isinstance(shape, str):
        shape = parse_shape(shape)
    axes = _shape_axes(shape)
    if int(level) != level or level < 0:
        raise MeshError("level must be a non-negative integer")
    n = 2 ** (int(level) + 1)
    pts, tets = _kuhn_cube_grid(n)
    inf = np.abs(pts).max(axis=1)
    two = np.linalg.norm(pts, axis=1)
    scale = np.divide(inf, two, out=np.zeros_like(inf), where=two > 0)
    ball = pts * scale[:, None]
    on_surface = np.isclose(inf, 1.0)
    ball[on_surface] /= np.linalg.norm(ball[on_surface], axis=1, keepdims=True)
    vertices = ball * axes
    tets = _orient(vertices, tets)
    faces, parent = _boundary_of(vertices, tets)
    p = vertices[faces]
    centroid = p.mean(axis=1)
    g = centroid / axes ** 2
    normals = g / np.linalg.norm(g, axis=1, keepdims=True)
    # orient each face so its geometric normal agrees with the analytic one
    geo = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    bad = np.einsum("ij,ij->i", geo, normals) < 0
    faces[bad, 1], faces[bad, 2] = faces[bad, 2].copy(), faces[bad, 1].copy()
    mesh = Mesh(vertices, tets, faces, normals, parent, axes)
    return mesh


# ------------------------------------------------------------------ file I/O

def write_mesh(mesh: Mesh, path) -> None:
    """Write the ASCII ``msh3`` format (with exact vertex normals if known)."""
    lines = [f"msh3 {mesh.nv} {mesh.nt} {len(mesh.boundary_faces)}"]
    lines += [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines += ["t {} {} {} {}".format(*t) for t in mesh.tets.tolist()]
    for f, n in zip(mesh.boundary_faces.tolist(), mesh.boundary_normals.tolist()):
        lines.append("b {} {} {} {!r} {!r} {!r}".format(*f, *n))
    if mesh.axes is not None and np.allclose(mesh.frame, np.eye(3)):
        lines.append("axes {!r} {!r} {!r}".format(*mesh.axes.tolist()))
    for i, n in zip(mesh.boundary_vertices.tolist(), mesh.vertex_normals.tolist()):
        lines.append("n {} {!r} {!r} {!r}".format(i, *n))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path) -> Mesh:
    """Read the ASCII ``msh3`` format; raises MeshError on malformed input."""
    with open(path) as fh:
        rows = [ln.split() for ln in fh if ln.strip()]
    if not rows or rows[0][0] != "msh3" or len(rows[0]) != 4:
        raise MeshError("missing msh3 header")
    nv, nt, nb = (int(x) for x in rows[0][1:])
    verts, tets, faces, normals, vnorm, axes = [], [], [], [], {}, None
    arity = {"v": 4, "t": 5, "b": 7, "n": 5, "axes": 4}
    try:
        for r in rows[1:]:
            tag = r[0]
            if len(r) != arity.get(tag, len(r)):
                raise MeshError(f"record {tag!r} has {len(r) - 1} fields")
            if tag == "v":
                verts.append([float(x) for x in r[1:4]])
            elif tag == "t":
                tets.append([int(x) for x in r[1:5]])
            elif tag == "b":
                faces.append([int(x) for x in r[1:4]])
                normals.append([float(x) for x in r[4:7]])
            elif tag == "n":
                vnorm[int(r[1])] = np.array([float(x) for x in r[2:5]])
            elif tag == "axes":
                axes = np.array([float(x) for x in r[1:4]])
            else:
                raise MeshError(f"unknown record {tag!r}")
    except (IndexError, ValueError) as exc:
        raise MeshError(f"malformed mesh file: {exc}") from exc
    if (len(verts), len(tets), len(faces)) != (nv, nt, nb):
        raise MeshError("record counts do not match header")
    vertices = np.array(verts, dtype=float).reshape(-1, 3)
    tets_a = np.array(tets, dtype=np.int64).reshape(-1, 4)
    faces_a = np.array(faces, dtype=np.int64).reshape(-1, 3)
    # recover parent tets by matching sorted vertex triples
    lookup = {}
    local = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]]
    for ti, t in enumerate(tets_a.tolist()):
        for loc in local:
            lookup[tuple(sorted(t[k] for k in loc))] = ti
    try:
        parent = np.array([lookup[tuple(sorted(f))] for f in faces_a.tolist()], dtype=np.int64)
    except KeyError as exc:
        raise MeshError("boundary face is not a tetrahedron face") from exc
    mesh = Mesh(vertices, tets_a, faces_a, np.array(normals, dtype=float).reshape(-1, 3),
                parent, axes, np.eye(3), vnorm or None)
    return mesh


def random_rotation(seed: int = 0) -> np.ndarray:
    """Deterministic random rotation matrix (det = +1)."""
    from scipy.spatial.transform import Rotation
    return Rotation.random(random_state=seed).as_matrix()


def shape_label(shape: Sequence | str) -> str:
    if isinstance(shape, str):
        return shape
    return f"{shape[0]}({','.join(repr(float(a)) for a in shape[1:])})"
