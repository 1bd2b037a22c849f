"""Triangle meshes: a strict text format, procedural builtins, surface sampling.

Text format: ``v x y z`` vertex lines and ``f i j k`` triangle lines with
1-based indices. Face tokens may carry ``/``-suffixes (``f 1/1 2/2 3/3``);
only the vertex index is used. Blank lines, comments (``#``) and any other
line type are ignored. Faces with more than three vertices are rejected.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True, eq=False)
class TriMesh:
    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        tri = np.array(self.triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError(f"vertices must be (V, 3), got {v.shape}")
        if tri.ndim != 2 or tri.shape[1] != 3 or tri.shape[0] == 0:
            raise MeshError("mesh needs at least one triangle")
        if tri.min() < 0 or tri.max() >= v.shape[0]:
            raise MeshError("triangle index out of range")
        if not np.all(np.isfinite(v)):
            raise MeshError("non-finite vertex coordinate")
        v.setflags(write=False)
        tri.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", tri)
        if not self.face_areas().sum() > 0:
            raise MeshError("mesh has zero surface area")

    def face_areas(self):
        a, b, c = (self.vertices[self.triangles[:, k]] for k in range(3))
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def scaled(self, s):
        return TriMesh(self.vertices * s, self.triangles)


def parse_mesh(text):
    vertices = []
    faces = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "v":
            if len(tok) < 4:
                raise MeshError("vertex needs three coordinates", lineno)
            try:
                vertices.append([float(x) for x in tok[1:4]])
            except ValueError:
                raise MeshError(f"bad vertex coordinate in {raw.strip()!r}", lineno) from None
        elif tok[0] == "f":
            idx = tok[1:]
            if len(idx) != 3:
                raise MeshError(f"only triangles are supported, got {len(idx)} vertices", lineno)
            try:
                ids = [int(s.split("/", 1)[0]) for s in idx]
            except ValueError:
                raise MeshError(f"bad face index in {raw.strip()!r}", lineno) from None
            for i in ids:
                if i < 1 or i > len(vertices):
                    raise MeshError(f"face index {i} out of range (1..{len(vertices)})", lineno)
            faces.append([i - 1 for i in ids])
    if not faces:
        raise MeshError("degenerate mesh: no triangles")
    return TriMesh(np.array(vertices), np.array(faces))


def load_mesh(path):
    return parse_mesh(Path(path).read_text())


def box(extents=(1.0, 1.0, 1.0)):
    """Axis-aligned box centred at the origin, 8 vertices and 12 triangles."""
    ex, ey, ez = (0.5 * float(e) for e in extents)
    v = np.array(
        [[sx * ex, sy * ey, sz * ez] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
    )
    # vertex index = 4*ix + 2*iy + iz
    tri = [
        [0, 1, 3], [0, 3, 2],  # -x
        [4, 6, 7], [4, 7, 5],  # +x
        [0, 4, 5], [0, 5, 1],  # -y
        [2, 3, 7], [2, 7, 6],  # +y
        [0, 2, 6], [0, 6, 4],  # -z
        [1, 5, 7], [1, 7, 3],  # +z
    ]
    return TriMesh(v, np.array(tri))


def unit_cube():
    return box((1.0, 1.0, 1.0))


def icosphere(radius=1.0, subdivisions=2):
    t = (1.0 + 5 ** 0.5) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [np.array(p, dtype=float) / np.linalg.norm(p) for p in verts]
    for _ in range(subdivisions):
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return TriMesh(np.array(verts) * radius, np.array(faces))


BUILTIN_MESHES = {
    "cube": lambda: box((0.2, 0.2, 0.2)),
    "box": lambda: box((0.3, 0.2, 0.12)),
    "sphere": lambda: icosphere(0.12, 2),
    "unit_cube": unit_cube,
}
"""Name -> factory. Sizes are meters; all but ``unit_cube`` are object-scale."""


def builtin_mesh(name):
    try:
        return BUILTIN_MESHES[name]()
    except KeyError:
        raise ValueError(
            f"unknown builtin mesh {name!r}; choose from {sorted(BUILTIN_MESHES)}"
        ) from None


def sample_mesh_points(mesh, n, seed):
    """``n`` points uniformly distributed over the mesh surface.

    Triangles are picked proportionally to area and points are placed with
    uniform barycentric coordinates (folded square method).
    """
    if n < 1:
        raise ValueError("need at least one sample point")
    rng = np.random.default_rng(seed)
    areas = mesh.face_areas()
    cum = np.cumsum(areas)
    pick = rng.random(n) * cum[-1]
    face = np.minimum(np.searchsorted(cum, pick, side="right"), len(areas) - 1)
    uv = rng.random((n, 2))
    fold = uv.sum(axis=1) > 1.0
    uv[fold] = 1.0 - uv[fold]
    tri = mesh.vertices[mesh.triangles[face]]
    origin = tri[:, 0]
    return origin + uv[:, :1] * (tri[:, 1] - origin) + uv[:, 1:] * (tri[:, 2] - origin)
