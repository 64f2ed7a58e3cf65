"""From boundary maps back to isometries.

A boundary map that sends regular ideal simplices to regular ideal
simplices is the boundary action of a single isometry; these routines
make that effective.  `isometry_from_simplex_pair` solves for the unique
isometry matching two regular simplices vertex by vertex,
`reconstruct_isometry` certifies the candidate along a reflection orbit
of the seed simplex, `consensus` cross-checks reconstructions from
independent seeds, and `verify_conjugacy` confirms the resulting
conjugation of lattice generators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSimplex,
    GeneratorCountMismatch,
    ImageNotRegular,
    NoConsensus,
    NoExactSolve,
    NotLorentz,
    NotRegular,
    OrbitMismatch,
    TimeReversing,
)
from .hypcore import Isometry, act_ideal, make_isometry, random_isometry
from .lattice import LatticePreset
from .regref import RegularSimplex, face_reflections, reference_regular
from .volcocycle import IdealSimplex, is_regular, orientation_sign

REGULARITY_TOL = 1e-9
IMAGE_TOL = 1e-6
ORBIT_TOL = 1e-8
SOLVE_RESIDUAL_TOL = 1e-7


@dataclass(frozen=True)
class PreservationReport:
    trials: int
    pass_fraction: float
    orientation_mode: str  # same / opposite / mixed
    tol: float


@dataclass(frozen=True)
class ReconstructionResult:
    h: Isometry
    max_orbit_mismatch: float
    depth: int


def preserves_regular(phi, n: int, trials: int, tol: float = IMAGE_TOL,
                      seed=0, window: float = 1.0) -> PreservationReport:
    """Sample random regular simplices and test their images.

    Each trial takes g random in a compact window, applies phi to the
    vertices of g times the reference simplex, and checks regularity of
    the image at tol; among passing trials the image orientation is
    compared with the source orientation.
    """
    rng = np.random.default_rng(seed)
    ref = reference_regular(n, 1)
    passes = 0
    modes = set()
    for _ in range(trials):
        g = random_isometry(rng, n, max_translation=window)
        src = [act_ideal(g, v) for v in ref.base.vertices]
        img = [phi(v) for v in src]
        try:
            ok = is_regular(img, tol)
        except DegenerateSimplex:
            ok = False
        if not ok:
            continue
        passes += 1
        modes.add("same" if orientation_sign(img) == orientation_sign(src)
                  else "opposite")
    if len(modes) == 1:
        mode = modes.pop()
    else:
        mode = "mixed" if modes else "same"
    return PreservationReport(trials=trials, pass_fraction=passes / trials,
                              orientation_mode=mode, tol=tol)


def isometry_from_simplex_pair(source: RegularSimplex,
                               target: RegularSimplex,
                               regularity_tol: float = REGULARITY_TOL) -> Isometry:
    """The unique isometry carrying source vertices to target vertices.

    Null lifts are determined only up to positive scale, so the scales
    are first normalized by a log-least-squares fit making the two Gram
    matrices equal; the linear solve then gives the matrix, which is
    re-orthogonalized against the form.
    """
    for s in (source, target):
        if not is_regular(list(s.base.vertices), regularity_tol):
            raise NotRegular("input simplex fails the regularity test")
    S = np.array([np.append(v.coords, 1.0) for v in source.base.vertices])
    T = np.array([np.append(v.coords, 1.0) for v in target.base.vertices])
    m = len(S)
    J = np.diag([1.0] * (m - 1) + [-1.0])
    GS = S @ J @ S.T
    GT = T @ J @ T.T

    # lam_i lam_j = GS_ij / GT_ij on off-diagonal entries (both Grams are
    # strictly negative there); solve for log lam in least squares
    rows, rhs = [], []
    for i in range(m):
        for j in range(i + 1, m):
            e = np.zeros(m)
            e[i] = e[j] = 1.0
            rows.append(e)
            rhs.append(np.log(GS[i, j] / GT[i, j]))
    lam = np.exp(np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)[0])
    Tn = lam[:, None] * T

    M = np.linalg.solve(S, Tn).T
    try:
        g = make_isometry(M)
    except (NotLorentz, TimeReversing) as exc:
        raise NoExactSolve(f"simplices are not congruent: {exc}") from exc
    worst = 0.0
    for sv, tv in zip(source.base.vertices, target.base.vertices):
        worst = max(worst, float(np.max(np.abs(act_ideal(g, sv).coords
                                               - tv.coords))))
    if worst > SOLVE_RESIDUAL_TOL:
        raise NoExactSolve(f"vertex residual {worst:.3e} after projection")
    return g


def reconstruct_isometry(phi, seed_simplex: RegularSimplex, depth: int,
                         tol: float = ORBIT_TOL,
                         image_tol: float = IMAGE_TOL) -> ReconstructionResult:
    """Candidate isometry from the seed simplex, certified on its
    reflection orbit.

    The candidate h solves phi on the seed vertices alone; it is then
    tested on every vertex produced by breadth-first face reflections to
    the given depth, with the image orientation required to alternate in
    step with the source orientation.
    """
    src_verts = list(seed_simplex.base.vertices)
    img_verts = [phi(v) for v in src_verts]
    try:
        if not is_regular(img_verts, image_tol):
            raise ImageNotRegular("image of the seed simplex is not regular")
    except DegenerateSimplex as exc:
        raise ImageNotRegular(str(exc)) from exc
    img_or = orientation_sign(img_verts)
    target = RegularSimplex(IdealSimplex(tuple(img_verts)), img_or)
    h = isometry_from_simplex_pair(seed_simplex, target,
                                   regularity_tol=max(REGULARITY_TOL, image_tol))

    worst = 0.0
    frontier = [((), seed_simplex)]
    for _ in range(depth):
        new_frontier = []
        for word, simplex in frontier:
            refs = face_reflections(simplex)
            last = word[-1] if word else None
            for i, r in enumerate(refs):
                if i == last:
                    continue
                verts = list(simplex.base.vertices)
                verts[i] = act_ideal(r, verts[i])
                child = RegularSimplex(IdealSimplex(tuple(verts)),
                                       -simplex.orientation)
                xi = verts[i]
                gap = float(np.max(np.abs(act_ideal(h, xi).coords
                                          - phi(xi).coords)))
                worst = max(worst, gap)
                if gap > tol:
                    raise OrbitMismatch(
                        f"orbit vertex deviates by {gap:.3e} > {tol:.3e}",
                        mismatch=gap)
                child_img = [phi(v) for v in verts]
                if orientation_sign(child_img) != child.orientation * img_or \
                        * seed_simplex.orientation:
                    raise OrbitMismatch("image orientation fails to alternate",
                                        mismatch=gap)
                new_frontier.append((word + (i,), child))
        frontier = new_frontier
    return ReconstructionResult(h=h, max_orbit_mismatch=worst, depth=depth)


def consensus(phi, n: int, m: int, depth: int, tol: float = 1e-7,
              seed=0, window: float = 1.0) -> Isometry:
    """Reconstruction from m independent seed simplices, required to
    agree within tol in max-abs matrix norm.  Errors from any single
    reconstruction propagate; nothing is skipped."""
    if m < 2:
        raise ValueError("consensus needs at least 2 seeds")
    rng = np.random.default_rng(seed)
    ref = reference_regular(n, 1)
    results = []
    for _ in range(m):
        g = random_isometry(rng, n, max_translation=window)
        verts = tuple(act_ideal(g, v) for v in ref.base.vertices)
        seed_s = RegularSimplex(IdealSimplex(verts), orientation_sign(verts))
        results.append(reconstruct_isometry(phi, seed_s, depth))
    mats = [r.h.matrix for r in results]
    for other in mats[1:]:
        if np.max(np.abs(other - mats[0])) > tol:
            raise NoConsensus("reconstructions disagree",
                              candidates=[r.h for r in results])
    return results[0].h


def verify_conjugacy(h: Isometry, preset: LatticePreset, rho_images) -> float:
    """Max over generators of the conjugation defect
    || h gamma h^{-1} - rho(gamma) || in the matrix sup norm."""
    rho_images = list(rho_images)
    if len(rho_images) != len(preset.generators):
        raise GeneratorCountMismatch(
            f"{len(rho_images)} images for {len(preset.generators)} generators")
    hinv = h.inverse()
    worst = 0.0
    for gen, img in zip(preset.generators, rho_images):
        conj = (h @ gen @ hinv).matrix
        worst = max(worst, float(np.max(np.abs(conj - img.matrix))))
    return worst
