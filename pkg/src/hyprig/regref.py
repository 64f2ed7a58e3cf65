"""Regular ideal simplices and their face-reflection orbits.

The reference regular simplex has the vertices of a regular Euclidean
n-simplex inscribed in the boundary sphere, first vertex at e_1.  The
group generated by reflections in its faces tiles H^3 and is dense in the
isometry group for n >= 4; `orbit` enumerates reflection words breadth
first and `density_probe` measures how well they approximate a target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, DegenerateFace
from .hypcore import (
    IdealPoint,
    Isometry,
    act_ideal,
    hyperplane_through,
    identity_isometry,
    make_isometry,
    reflect_in,
)
from .volcocycle import IdealSimplex, is_regular, orientation_sign

DEDUP_GRID = 1e-7
DEDUP_RECHECK = 1e-9
REORTH_EVERY = 8


@dataclass(frozen=True)
class RegularSimplex:
    base: IdealSimplex
    orientation: int


@dataclass(frozen=True)
class ReflectionWord:
    letters: tuple
    resolved: Isometry


def reference_regular(n: int, orientation: int = 1) -> RegularSimplex:
    """The regular ideal n-simplex with first vertex e_1.

    Vertices are the regular Euclidean simplex inscribed in S^{n-1}
    (pairwise dot products -1/n), rotated deterministically so the first
    vertex is e_1; the requested orientation is arranged by swapping the
    last two vertices if needed.
    """
    # Project the n+1 standard basis vectors of R^{n+1} onto the
    # complement of (1, ..., 1) and normalize: a regular simplex.
    E = np.eye(n + 1) - np.full((n + 1, n + 1), 1.0 / (n + 1))
    # Deterministic orthonormal basis of the complement via QR of the
    # first n projected vectors.
    Q, _ = np.linalg.qr(E[:, :n])
    verts = (E.T @ Q)
    verts = verts / np.linalg.norm(verts, axis=1)[:, None]
    # Householder map sending the first vertex to e_1.
    e1 = np.eye(n)[0]
    v = verts[0] - e1
    if np.linalg.norm(v) > 1e-13:
        v = v / np.linalg.norm(v)
        verts = verts - 2.0 * np.outer(verts @ v, v)
    points = [IdealPoint(p / np.linalg.norm(p)) for p in verts]
    if orientation_sign(points) != orientation:
        points[-1], points[-2] = points[-2], points[-1]
    return RegularSimplex(IdealSimplex(tuple(points)), orientation)


def face_reflections(s: RegularSimplex):
    """Reflections in the n+1 face hyperplanes; entry i omits vertex i."""
    verts = list(s.base.vertices)
    out = []
    for i in range(len(verts)):
        face = [v for j, v in enumerate(verts) if j != i]
        try:
            h = hyperplane_through(face)
        except Exception as exc:
            raise DegenerateFace(f"face {i} does not span a hyperplane") from exc
        out.append(reflect_in(h))
    return out


def _reflect_simplex(s: RegularSimplex, i: int, r: Isometry) -> RegularSimplex:
    verts = list(s.base.vertices)
    verts[i] = act_ideal(r, verts[i])
    return RegularSimplex(IdealSimplex(tuple(verts)), -s.orientation)


def _grid_key(coords):
    return tuple(np.round(coords / DEDUP_GRID).astype(np.int64))


class _VertexSet:
    """Tolerance-grid deduplicated point set on the sphere."""

    def __init__(self):
        self._buckets: dict = {}
        self.points: list = []

    def add(self, coords) -> bool:
        key = _grid_key(coords)
        for nb in self._neighbors(key):
            for idx in self._buckets.get(nb, ()):
                if np.max(np.abs(self.points[idx] - coords)) < DEDUP_RECHECK:
                    return False
        self.points.append(np.asarray(coords, dtype=float))
        self._buckets.setdefault(key, []).append(len(self.points) - 1)
        return True

    @staticmethod
    def _neighbors(key):
        # The recheck radius is far below the grid pitch, so only the
        # cell and its face neighbors can collide.
        yield key
        for j in range(len(key)):
            for dlt in (-1, 1):
                yield key[:j] + (key[j] + dlt,) + key[j + 1:]


def orbit(s: RegularSimplex, depth: int, max_size: int = 200_000):
    """Breadth-first reflection orbit of a regular simplex.

    Returns (entries, vertex_points): entries are (ReflectionWord,
    RegularSimplex) pairs including the root with the empty word, and
    vertex_points is the deduplicated array of all orbit vertices.
    Children never immediately undo their parent's last reflection.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    n = s.base.n
    root = ReflectionWord((), identity_isometry(n))
    entries = [(root, s)]
    vertices = _VertexSet()
    for v in s.base.vertices:
        vertices.add(v.coords)

    frontier = [(root, s)]
    for _ in range(depth):
        if len(entries) + len(frontier) * n > max_size:
            raise BudgetExceeded(f"orbit would exceed {max_size} simplices")
        new_frontier = []
        for word, simplex in frontier:
            refs = face_reflections(simplex)
            last = word.letters[-1] if word.letters else None
            for i, r in enumerate(refs):
                if i == last:
                    continue
                g = r @ word.resolved
                letters = word.letters + (i,)
                if len(letters) % REORTH_EVERY == 0:
                    g = make_isometry(g.matrix)
                child = _reflect_simplex(simplex, i, r)
                vertices.add(child.base.vertices[i].coords)
                entry = (ReflectionWord(letters, g), child)
                entries.append(entry)
                new_frontier.append(entry)
        frontier = new_frontier
    return entries, np.array(vertices.points)


def density_probe(n: int, target: Isometry, depth: int,
                  max_size: int = 200_000):
    """Best approximation of a target isometry by reflection words.

    Enumerates words of length <= depth in the face reflections of the
    reference regular simplex and returns (letters, distance) minimizing
    the max-abs matrix distance.  The minimum is non-increasing in depth.
    """
    s = reference_regular(n, 1)
    entries, _ = orbit(s, depth, max_size=max_size)
    best = None
    best_d = np.inf
    for word, _ in entries:
        d = float(np.max(np.abs(word.resolved.matrix - target.matrix)))
        if d < best_d - 1e-15:
            best_d = d
            best = word.letters
    return best, best_d


def check_orbit_regularity(entries, tol: float = 1e-8) -> bool:
    """Every orbit simplex stays regular (isometries preserve shape)."""
    return all(is_regular(simplex.base.vertices, tol) for _, simplex in entries)
