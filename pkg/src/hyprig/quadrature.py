"""Adaptive quadrature over simplices with vertex singularities.

Cells are affine simplices in R^d (d = 1, 2, 3).  Each cell carries the
indices of its vertices that sit on the singular locus of the integrand
(for the hyperbolic volume form: on the circumsphere of the base).  Cells
with one singular vertex are integrated in Duffy coordinates with a
square-root substitution on the radial variable, which turns a
dist^{-d/2} blow-up into a smooth integrand; regular cells use the plain
ordered Duffy map.  Refinement is midpoint (red) subdivision driven by a
max-heap on the two-rule error estimate.
"""

from __future__ import annotations

import heapq
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureBudgetExceeded

_LOW_ORDER = 5
_HIGH_ORDER = 9


def _gauss01(p):
    x, w = np.polynomial.legendre.leggauss(p)
    return 0.5 * (x + 1.0), 0.5 * w


def _cube_rule(d, p):
    """Tensor Gauss-Legendre nodes/weights on the open unit cube."""
    x1, w1 = _gauss01(p)
    xg = np.meshgrid(*([x1] * d), indexing="ij")
    wg = np.meshgrid(*([w1] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in xg], axis=1)
    wts = np.prod(np.stack([g.ravel() for g in wg], axis=1), axis=1)
    return pts, wts


_RULE_CACHE: dict = {}


def _rules(d):
    if d not in _RULE_CACHE:
        _RULE_CACHE[d] = (_cube_rule(d, _LOW_ORDER), _cube_rule(d, _HIGH_ORDER))
    return _RULE_CACHE[d]


def _duffy(U, sqrt_first):
    """Map cube points to barycentric coordinates (lambda_0 first).

    The first cube coordinate is the distance-like parameter t = 1 -
    lambda_0 measured from vertex 0; with ``sqrt_first`` it is squared so
    Gauss points resolve a t^{d/2 - 1} density.  Returns (lambda, weight)
    arrays of shapes (N, d+1) and (N,), the weight absorbing every
    Jacobian factor of the chain cube -> (t, stick-breaking) -> barycentric.
    """
    N, d = U.shape
    if sqrt_first:
        t = U[:, 0] * U[:, 0]
        w = 2.0 * U[:, 0]
    else:
        t = U[:, 0]
        w = np.ones(N)
    w = w * t ** (d - 1)
    lam = np.empty((N, d + 1))
    lam[:, 0] = 1.0 - t
    rest = np.ones(N)
    for j in range(1, d):
        lam[:, j] = t * U[:, j] * rest
        w *= rest
        rest = rest * (1.0 - U[:, j])
    lam[:, d] = t * rest
    return lam, w


_DUFFY_CACHE: dict = {}


def _duffy_rules(d, sqrt_first):
    """Both quadrature rules pushed through the Duffy map, cached:
    (lam_lo, w_lo, lam_hi, w_hi) with the Gauss weights folded in."""
    key = (d, sqrt_first)
    if key not in _DUFFY_CACHE:
        (plo, wlo), (phi, whi) = _rules(d)
        llo, dlo = _duffy(plo, sqrt_first)
        lhi, dhi = _duffy(phi, sqrt_first)
        _DUFFY_CACHE[key] = (llo, wlo * dlo, lhi, whi * dhi)
    return _DUFFY_CACHE[key]


@dataclass
class Cell:
    vertices: np.ndarray        # (d+1, d), singular vertex (if any) first
    singular: int               # count of singular vertices (0 or 1 here)
    value: float = 0.0
    error: float = 0.0

    def integrate(self, f):
        V = self.vertices
        d = V.shape[1]
        E = V[1:] - V[0]
        jac = abs(np.linalg.det(E))
        llo, wlo, lhi, whi = _duffy_rules(d, self.singular > 0)

        def run(lam, wts):
            X = V[0] + lam[:, 1:] @ E
            return jac * float(wts @ f(X))

        hi = run(lhi, whi)
        lo = run(llo, wlo)
        self.value = hi
        self.error = abs(hi - lo)
        return self


def _midpoint_children(V):
    """Red refinement of a simplex given by rows of V."""
    d = V.shape[1]
    if d == 1:
        m = 0.5 * (V[0] + V[1])
        return [np.array([V[0], m]), np.array([V[1], m])]
    if d == 2:
        m01 = 0.5 * (V[0] + V[1])
        m02 = 0.5 * (V[0] + V[2])
        m12 = 0.5 * (V[1] + V[2])
        return [np.array([V[0], m01, m02]),
                np.array([V[1], m01, m12]),
                np.array([V[2], m02, m12]),
                np.array([m01, m02, m12])]
    # d = 3: four corner tetrahedra plus the central octahedron cut along
    # the (m01, m23) diagonal.
    m = {(i, j): 0.5 * (V[i] + V[j]) for i in range(4) for j in range(i + 1, 4)}
    kids = [np.array([V[0], m[0, 1], m[0, 2], m[0, 3]]),
            np.array([V[1], m[0, 1], m[1, 2], m[1, 3]]),
            np.array([V[2], m[0, 2], m[1, 2], m[2, 3]]),
            np.array([V[3], m[0, 3], m[1, 3], m[2, 3]])]
    a, b = m[0, 1], m[2, 3]
    kids += [np.array([a, b, m[0, 2], m[0, 3]]),
             np.array([a, b, m[0, 3], m[1, 3]]),
             np.array([a, b, m[1, 3], m[1, 2]]),
             np.array([a, b, m[1, 2], m[0, 2]])]
    return kids


def _subdivide(cell: Cell):
    kids = _midpoint_children(cell.vertices)
    out = []
    for V in kids:
        # Only an original singular vertex keeps the flag; midpoints are
        # strictly inside the singular sphere.  Corner children inherit
        # their corner first by construction.
        sing = 1 if (cell.singular and np.allclose(V[0], cell.vertices[0])) else 0
        out.append(Cell(V, sing))
    return out


def integrate_simplex(f, vertices, singular_mask, tol, max_evals=2_000_000,
                      threads=1):
    """Integrate f over the simplex, adaptively, to absolute accuracy tol.

    ``f`` is evaluated in batches: it maps an (N, d) array of points to
    the (N,) array of values.  ``singular_mask[i]`` marks vertex i as
    lying on the singular locus.
    Returns (value, error_estimate, evals).  Raises
    :class:`QuadratureBudgetExceeded` when the budget runs out first.
    """
    V = np.asarray(vertices, dtype=float)
    d = V.shape[1]
    per_cell = _LOW_ORDER ** d + _HIGH_ORDER ** d

    # One forced red refinement separates the singular vertices, so every
    # live cell has at most one.
    cells = []
    for W in _midpoint_children(V):
        sing = 0
        order = list(range(d + 1))
        for k, row in enumerate(W):
            hits = [i for i in range(d + 1) if singular_mask[i]
                    and np.allclose(row, V[i])]
            if hits:
                sing = 1
                order = [k] + [j for j in range(d + 1) if j != k]
                break
        cells.append(Cell(W[order], sing))

    evals = 0

    def eval_cells(batch):
        nonlocal evals
        if threads > 1 and len(batch) > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                list(ex.map(lambda c: c.integrate(f), batch))
        else:
            for c in batch:
                c.integrate(f)
        evals += per_cell * len(batch)

    eval_cells(cells)
    heap = [(-c.error, i, c) for i, c in enumerate(cells)]
    heapq.heapify(heap)
    counter = len(cells)
    total_err = sum(c.error for c in cells)

    while total_err > tol:
        if evals + per_cell * 8 > max_evals:
            raise QuadratureBudgetExceeded(
                f"error {total_err:.3e} > tol {tol:.3e} at {evals} evals")
        _, _, worst = heapq.heappop(heap)
        total_err -= worst.error
        kids = _subdivide(worst)
        eval_cells(kids)
        for k in kids:
            counter += 1
            heapq.heappush(heap, (-k.error, counter, k))
            total_err += k.error

    value = float(sum(c.value for _, _, c in sorted(heap, key=lambda t: t[1])))
    return value, float(total_err), evals
