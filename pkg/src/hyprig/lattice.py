"""Concrete finite-covolume lattices and Haar sampling on the quotient.

A preset ships a lattice as data: generator matrices, relator words, an
ideal triangulation of a fundamental domain (every cell with one vertex
at the cusp point at infinity, so the half-space picture has analytic
vertical integrals) and cusp floors.  Nothing in the file is trusted:
relators, face gluings and cell volumes are verified at load time.

Sampling of the invariant probability measure on the quotient uses the
decomposition of an isometry into (base point, frame): base points are
importance-sampled in the truncated fundamental domain against the
volume form, frames are Haar-uniform in O(n), and each sample carries a
density-ratio weight whose batch average is the truncated mass.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import BadTruncation, PresetCorrupt, UnknownPreset
from .hypcore import (
    IdealPoint,
    Isometry,
    SpacePoint,
    act_ideal,
    convert,
    identity_isometry,
    make_isometry,
    random_rotation,
    rotation_isometry,
    translation_to,
)
from .volcocycle import v_n, vol

RELATOR_TOL = 1e-8
GLUING_TOL = 1e-8
POLE_TOL = 1e-9
PRESET_DIR_ENV = "HYPRIG_PRESET_DIR"
DEFAULT_BIAS_TARGET = 1e-3


@dataclass(frozen=True)
class _CellChart:
    """Half-space geometry of one cell: base simplex, circumsphere, areas."""

    base: np.ndarray       # (n, n-1) chart coordinates of non-pole vertices
    center: np.ndarray
    radius: float
    area: float            # Euclidean volume of the base simplex
    volume: float          # hyperbolic volume of the full cell


@dataclass(frozen=True)
class LatticePreset:
    name: str
    n: int
    generators: tuple
    relators: tuple
    cells: tuple           # of tuples of IdealPoint
    face_pairings: tuple
    cusp_floor: float
    charts: tuple
    covolume: float


@dataclass(frozen=True)
class HaarSample:
    g: Isometry
    weight: float
    cell: int


def _resolve_word(generators, word) -> Isometry:
    n = generators[0].n
    g = identity_isometry(n)
    for letter in word:
        if letter == 0 or abs(letter) > len(generators):
            raise PresetCorrupt(f"bad generator index {letter}")
        gen = generators[abs(letter) - 1]
        g = g @ (gen if letter > 0 else gen.inverse())
    return g


def _chart_cell(points):
    """Project a cell with a vertex at the pole to its half-space base."""
    n = points[0].n
    pole = np.zeros(n)
    pole[-1] = 1.0
    apex = [i for i, p in enumerate(points)
            if np.linalg.norm(p.coords - pole) < POLE_TOL]
    if len(apex) != 1:
        raise PresetCorrupt("each cell needs exactly one vertex at the cusp "
                            "point at infinity")
    base = []
    for i, p in enumerate(points):
        if i != apex[0]:
            c = p.coords
            base.append(c[:-1] / (1.0 - c[-1]))
    W = np.array(base)
    A = 2.0 * (W[1:] - W[0])
    b = np.sum(W[1:] ** 2, axis=1) - np.sum(W[0] ** 2)
    center = np.linalg.solve(A, b)
    radius = float(np.linalg.norm(W[0] - center))
    d = n - 1
    area = abs(np.linalg.det((W[1:] - W[0]).T)) / math.factorial(d) \
        if d > 1 else abs(W[1, 0] - W[0, 0])
    volume = abs(vol(points, tol=1e-9).value)
    return _CellChart(W, center, radius, area, volume)


def _preset_path(name: str) -> str:
    override = os.environ.get(PRESET_DIR_ENV)
    if override:
        cand = os.path.join(override, f"{name}.json")
        if os.path.exists(cand):
            return cand
    ref = resources.files("hyprig") / "presets" / f"{name}.json"
    if not ref.is_file():
        raise UnknownPreset(f"no preset named {name!r}")
    return str(ref)


def load_preset(name: str) -> LatticePreset:
    """Load and verify a lattice preset.

    Verification is mandatory: relators must resolve to the identity at
    1e-8, each face pairing must carry its source face onto its target
    face at 1e-8, and the covolume must come out finite and positive.
    """
    path = _preset_path(name)
    try:
        with open(path) as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise PresetCorrupt(f"cannot read preset {name!r}: {exc}") from exc

    try:
        n = int(raw["n"])
        generators = tuple(make_isometry(np.asarray(m, dtype=float))
                           for m in raw["generators"])
        cells = tuple(tuple(IdealPoint(np.asarray(v, dtype=float)) for v in cell)
                      for cell in raw["cells"])
        relators = tuple(tuple(wd) for wd in raw.get("relators", ()))
        pairings = tuple(raw.get("face_pairings", ()))
        floor = max(float(c["floor_height"]) for c in raw["cusps"])
    except Exception as exc:
        raise PresetCorrupt(f"malformed preset {name!r}: {exc}") from exc

    for g in generators:
        if g.sign != 1:
            raise PresetCorrupt("generators must preserve orientation")
    for wd in relators:
        r = _resolve_word(generators, wd)
        if np.max(np.abs(r.matrix - np.eye(n + 1))) > RELATOR_TOL:
            raise PresetCorrupt(f"relator {wd} does not resolve to identity")

    for pr in pairings:
        src = cells[pr["cell"]]
        tgt = cells[pr["target_cell"]]
        sface = [v for i, v in enumerate(src) if i != pr["face"]]
        tface = [v for i, v in enumerate(tgt) if i != pr["target_face"]]
        g = _resolve_word(generators, pr["word"])
        for v in sface:
            img = act_ideal(g, v).coords
            if min(np.max(np.abs(img - u.coords)) for u in tface) > GLUING_TOL:
                raise PresetCorrupt(
                    f"face pairing {pr} does not glue (vertex mismatch)")

    charts = tuple(_chart_cell(list(cell)) for cell in cells)
    covol = float(sum(ch.volume for ch in charts))
    if not np.isfinite(covol) or covol <= 0:
        raise PresetCorrupt("covolume is not finite positive")
    for ch in charts:
        if ch.volume > v_n(n) + 1e-9:
            raise PresetCorrupt("cell volume exceeds the regular ideal bound")

    return LatticePreset(name=str(raw["name"]), n=n, generators=generators,
                         relators=relators, cells=cells, face_pairings=pairings,
                         cusp_floor=floor, charts=charts, covolume=covol)


def covolume(preset: LatticePreset) -> float:
    """Total volume of the fundamental domain: sum of |Vol_n| over cells."""
    return float(sum(abs(vol(list(cell), tol=1e-9).value)
                     for cell in preset.cells))


def truncation_error_bound(preset: LatticePreset, T: float) -> float:
    """Bias bound for estimates on the T-truncated domain.

    The cusp volume above height T is sum_cells area/((n-1) T^{n-1}),
    analytic in half-space; since every integrand of interest is bounded
    by v_n, the bias is at most v_n times the missing mass fraction.
    """
    n = preset.n
    removed = sum(ch.area for ch in preset.charts) / ((n - 1) * T ** (n - 1))
    return v_n(n) * removed / preset.covolume


def default_truncation(preset: LatticePreset,
                       bias: float = DEFAULT_BIAS_TARGET) -> float:
    """Smallest truncation height with truncation_error_bound <= bias."""
    n = preset.n
    total_area = sum(ch.area for ch in preset.charts)
    T = (v_n(n) * total_area / ((n - 1) * preset.covolume * bias)) ** (1.0 / (n - 1))
    return max(T, preset.cusp_floor * 1.01)


def _truncated_cell_volume(ch: _CellChart, n: int, T: float) -> float:
    return ch.volume - ch.area / ((n - 1) * T ** (n - 1))


def sample_haar(preset: LatticePreset, seed, N: int, T: float = None,
                stream: int = None):
    """Draw N weighted samples of the invariant measure on the quotient.

    Each sample is g = (transvection to a base point) o (frame rotation):
    the base point is drawn in the T-truncated fundamental domain by
    importance sampling (uniform over the cell base, analytic t^{-n}
    height marginal), the frame is Haar-uniform in O(n).  The weight is
    the density ratio, so weighted averages estimate integrals against
    the invariant probability measure up to the truncation bias.

    Identical (seed, stream) pairs give identical streams; distinct
    streams spawned from one seed are independent.
    """
    n = preset.n
    if T is None:
        T = default_truncation(preset)
    if T <= preset.cusp_floor:
        raise BadTruncation(
            f"T = {T} is not above the cusp floor {preset.cusp_floor}")

    ss = np.random.SeedSequence(seed)
    if stream is not None:
        ss = ss.spawn(stream + 1)[stream]
    rng = np.random.default_rng(ss)

    d = n - 1
    trunc_vols = np.array([_truncated_cell_volume(ch, n, T)
                           for ch in preset.charts])
    if np.any(trunc_vols <= 0):
        raise BadTruncation("truncation leaves an empty cell")
    p_cell = trunc_vols / trunc_vols.sum()

    out = []
    for _ in range(N):
        ci = int(rng.choice(len(p_cell), p=p_cell))
        ch = preset.charts[ci]
        lam = rng.dirichlet(np.ones(d + 1))
        x = lam @ ch.base
        h2 = max(ch.radius ** 2 - float(np.dot(x - ch.center, x - ch.center)),
                 1e-300)
        h = min(np.sqrt(h2), T)
        u = rng.uniform()
        t = (h ** (-d) - u * (h ** (-d) - T ** (-d))) ** (-1.0 / d)
        intensity = (h ** (-d) - T ** (-d)) / d
        weight = ch.area * intensity / (preset.covolume * p_cell[ci])

        hyp = convert(np.append(x, t), "halfspace", "hyperboloid")
        # far up the cusp the chart costs a couple of digits; renormalize
        hyp = hyp / np.sqrt(hyp[-1] ** 2 - float(hyp[:-1] @ hyp[:-1]))
        point = SpacePoint(hyp)
        frame = random_rotation(rng, n)
        g = translation_to(point) @ rotation_isometry(frame)
        out.append(HaarSample(g=g, weight=float(weight), cell=ci))
    return out
