"""The signed volume cocycle on tuples of ideal points.

Vol_n(xi_0, ..., xi_n) is the signed hyperbolic volume of the straightened
simplex spanned by n+1 boundary points: exact (up to Lobachevsky-series
truncation) for n = 2, 3 and adaptive quadrature for n = 4.  The sign is
the orientation of the vertex order, read off the determinant of the null
lifts, and the cocycle is normalized to be positive on the reference
regular simplex with positive orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import zeta

from .errors import DegenerateSimplex, UnsupportedDimension
from .hypcore import IdealPoint
from .quadrature import integrate_simplex

COINCIDENCE_TOL = 1e-12
DEGENERATE_DET_TOL = 1e-9


@dataclass(frozen=True)
class IdealSimplex:
    """An ordered tuple of n+1 boundary points of H^n."""

    vertices: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))

    @property
    def n(self) -> int:
        return len(self.vertices) - 1


@dataclass(frozen=True)
class VolumeResult:
    value: float
    abs_error: float
    method: str


def _vertex_list(simplex):
    if isinstance(simplex, IdealSimplex):
        return list(simplex.vertices)
    return list(simplex)


# -- Lobachevsky function ---------------------------------------------------

_ZETA_TERMS = 40
_ZETA = zeta(2 * np.arange(1, _ZETA_TERMS + 1))


def lobachevsky(theta):
    """The Lobachevsky function, odd and pi-periodic.

    Evaluated by the log-accelerated series
    L(t) = t - t log|2t| + sum_k zeta(2k)/(k(2k+1)) t^{2k+1}/pi^{2k},
    valid on |t| <= pi/2 where the reduction lands; truncation error is
    below 1e-15 there.
    """
    theta = np.asarray(theta, dtype=float)
    scalar = theta.ndim == 0
    t = np.mod(theta + 0.5 * np.pi, np.pi) - 0.5 * np.pi
    out = np.zeros_like(t, dtype=float)
    nz = np.abs(t) > 1e-300
    tn = t[nz]
    acc = tn - tn * np.log(np.abs(2.0 * tn))
    ratio = (tn / np.pi) ** 2
    power = tn.copy()
    for k in range(1, _ZETA_TERMS + 1):
        power = power * ratio
        acc = acc + (_ZETA[k - 1] / (k * (2 * k + 1))) * power
    out[nz] = acc
    return float(out) if scalar else out


V2 = math.pi
V3 = 3.0 * lobachevsky(math.pi / 3.0)

_VN_CACHE = {2: V2, 3: V3}


# -- orientation and degeneracy --------------------------------------------

def _null_lift_matrix(points):
    return np.array([np.append(p.coords, 1.0) for p in points])


def _coincident_pair(points, tol=COINCIDENCE_TOL):
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if np.linalg.norm(points[i].coords - points[j].coords) < tol:
                return True
    return False


def orientation_sign(simplex) -> int:
    """Orientation of the vertex order: sign of det of the null lifts.

    Zero when the points lie on the boundary sphere of a hyperplane (the
    straightened simplex is flat)."""
    points = _vertex_list(simplex)
    d = float(np.linalg.det(_null_lift_matrix(points)))
    if abs(d) < DEGENERATE_DET_TOL:
        return 0
    return 1 if d > 0 else -1


# -- exact low-dimensional evaluators ---------------------------------------

def vol2(simplex) -> VolumeResult:
    """Signed area of an ideal triangle: +/- pi by cyclic orientation."""
    points = _vertex_list(simplex)
    if _coincident_pair(points):
        return VolumeResult(0.0, 0.0, "exact2")
    s = orientation_sign(points)
    return VolumeResult(s * math.pi, 0.0, "exact2")


def _homogeneous_chart(xi: IdealPoint):
    """Boundary point of H^3 as a projective pair (a : b), w = a/b, in the
    half-space chart w = (xi_1 + i xi_2)/(1 - xi_3).  Both representatives
    agree where defined; the better conditioned one is returned."""
    x, y, z = xi.coords
    a1, b1 = complex(x, y), complex(1.0 - z)
    a2, b2 = complex(1.0 + z), complex(x, -y)
    # near the poles one of the representatives degenerates to (0, 0);
    # the other always has norm about 1
    if abs(a1) ** 2 + abs(b1) ** 2 >= abs(a2) ** 2 + abs(b2) ** 2:
        return a1, b1
    return a2, b2


def _bloch_wigner_sum(z: complex) -> float:
    """L(arg z) + L(arg 1/(1-z)) + L(arg (z-1)/z): the volume of the ideal
    tetrahedron with cross-ratio z, signed by the half-plane of z."""
    angles = np.array([np.angle(z), np.angle(1.0 / (1.0 - z)),
                       np.angle((z - 1.0) / z)])
    return float(np.sum(lobachevsky(angles)))


def vol3(simplex) -> VolumeResult:
    """Signed volume of an ideal tetrahedron via the cross-ratio of its
    vertices on the Riemann sphere."""
    points = _vertex_list(simplex)
    if _coincident_pair(points):
        return VolumeResult(0.0, 0.0, "lobachevsky3")
    pairs = [_homogeneous_chart(p) for p in points]

    def det(i, j):
        return pairs[i][0] * pairs[j][1] - pairs[j][0] * pairs[i][1]

    # Cross-ratio sending vertices 0, 1, 2 to 0, 1, infinity, evaluated at
    # vertex 3; projective determinants avoid the point at infinity.
    num = det(3, 0) * det(1, 2)
    den = det(3, 2) * det(1, 0)
    if den == 0:
        return VolumeResult(0.0, 0.0, "lobachevsky3")
    z = num / den
    if z.imag == 0 or z in (0.0, 1.0):
        return VolumeResult(0.0, 1e-12, "lobachevsky3")
    return VolumeResult(_bloch_wigner_sum(z), 1e-12, "lobachevsky3")


# -- general quadrature evaluator ------------------------------------------

def _chart_points(points, apex):
    """Stereographic chart sending the apex vertex to infinity.

    A Householder rotation of the sphere carries the apex to the pole
    e_{n-1}; projection from the pole maps the rest to R^{n-2} ... R^{n-1}
    (the boundary of upper half-space)."""
    n = points[0].n
    pole = np.zeros(n)
    pole[-1] = 1.0
    a = points[apex].coords
    v = a - pole
    nv = np.linalg.norm(v)
    if nv < 1e-13:
        R = np.eye(n)
    else:
        v = v / nv
        R = np.eye(n) - 2.0 * np.outer(v, v)  # swaps apex and pole
    out = []
    for i, p in enumerate(points):
        if i == apex:
            continue
        c = R @ p.coords
        out.append(c[:-1] / (1.0 - c[-1]))
    return np.array(out)


def _circumsphere(W):
    """Center and radius of the sphere through d+1 points of R^d."""
    A = 2.0 * (W[1:] - W[0])
    b = np.sum(W[1:] ** 2, axis=1) - np.sum(W[0] ** 2)
    c = np.linalg.solve(A, b)
    r = float(np.linalg.norm(W[0] - c))
    return c, r


def voln(simplex, tol: float = 1e-6, max_evals: int = 2_000_000,
         threads: int = 1) -> VolumeResult:
    """Signed volume of the straightened ideal simplex by quadrature.

    The vertex best separated from the others is rotated to the pole and
    sent to infinity in the upper half-space model, where the vertical
    integral of the volume form is analytic; what remains is the integral
    of (r^2 - |x - c|^2)^{-(n-1)/2} over the Euclidean base simplex, with
    (c, r) the circumsphere of the base vertices.
    """
    points = _vertex_list(simplex)
    n = len(points) - 1
    if _coincident_pair(points):
        return VolumeResult(0.0, 0.0, "quadrature")
    if n < 2 or n > 4:
        raise UnsupportedDimension(f"quadrature evaluator covers n = 2..4, got {n}")
    sign = orientation_sign(points)
    if sign == 0:
        return VolumeResult(0.0, 0.0, "quadrature")

    # Apex choice: maximize the minimal chordal gap to the others, keeping
    # the chart coordinates of the base bounded.
    gaps = []
    for i, p in enumerate(points):
        gaps.append(min(np.linalg.norm(p.coords - q.coords)
                        for j, q in enumerate(points) if j != i))
    apex = int(np.argmax(gaps))
    W = _chart_points(points, apex)
    c, r = _circumsphere(W)
    d = n - 1

    def integrand(X):
        diff = X - c
        h2 = r * r - np.einsum("ij,ij->i", diff, diff)
        return np.maximum(h2, 1e-300) ** (-0.5 * d)

    value, err, evals = integrate_simplex(
        integrand, W, [True] * (d + 1), tol=tol * (n - 1),
        max_evals=max_evals, threads=threads)
    return VolumeResult(sign * value / (n - 1), err / (n - 1), "quadrature")


def vol(simplex, tol: float = 1e-6, **kw) -> VolumeResult:
    """Dispatch to the best evaluator for the dimension."""
    points = _vertex_list(simplex)
    n = len(points) - 1
    if n == 2:
        return vol2(points)
    if n == 3:
        return vol3(points)
    return voln(points, tol=tol, **kw)


def vol_defect(points, tol: float = 1e-6) -> float:
    """Alternating sum of Vol_n over the faces of an (n+2)-tuple; the
    cocycle identity makes it vanish."""
    points = _vertex_list(points)
    total = 0.0
    for j in range(len(points)):
        face = points[:j] + points[j + 1:]
        total += (-1) ** j * vol(face, tol=tol).value
    return total


def v_n(n: int, tol: float = 1e-7) -> float:
    """Volume of the regular ideal n-simplex, the maximum of |Vol_n|."""
    if n < 2:
        raise UnsupportedDimension("hyperbolic volume needs n >= 2")
    if n not in _VN_CACHE:
        from .regref import reference_regular
        ref = reference_regular(n, 1)
        _VN_CACHE[n] = abs(vol(ref.base.vertices, tol=tol).value)
    return _VN_CACHE[n]


# -- regularity -------------------------------------------------------------

def is_regular(simplex, tol: float = 1e-9) -> bool:
    """Whether some isometry carries the simplex onto the reference
    regular one.

    Tested through the full set of absolute cross-ratios of chordal
    distances, (d_ij d_kl)/(d_ik d_jl) over vertex quadruples, which are
    a complete system of Moebius invariants; for the regular simplex all
    of them equal 1."""
    points = _vertex_list(simplex)
    m = len(points)
    D = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            D[i, j] = D[j, i] = np.linalg.norm(points[i].coords - points[j].coords)
    off = D[np.triu_indices(m, 1)]
    if np.min(off) < max(tol, COINCIDENCE_TOL):
        raise DegenerateSimplex(f"vertex gap {np.min(off):.3e} below tolerance")
    if m < 4:
        return True
    for quad in _quadruples(m):
        i, j, k, l = quad
        for (a, b), (c, e), (f, g), (h, p) in (((i, j), (k, l), (i, k), (j, l)),
                                               ((i, k), (j, l), (i, l), (j, k)),
                                               ((i, j), (k, l), (i, l), (j, k))):
            ratio = (D[a, b] * D[c, e]) / (D[f, g] * D[h, p])
            if abs(ratio - 1.0) > tol:
                return False
    return True


def _quadruples(m):
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                for l in range(k + 1, m):
                    yield i, j, k, l
