"""Monte-Carlo smearing of the volume cocycle over a lattice quotient.

For a boundary map phi and an ideal simplex xi, the smearing integral

    integral over the quotient of  eps(g) Vol_n(phi(g xi_0), ..., phi(g xi_n))

equals lambda times Vol_n(xi), where lambda = Vol(rho)/Vol(M) for the
representation behind phi.  The estimator reports the stochastic error of
the weighted sample mean and the deterministic cusp-truncation bias
separately, because the rigidity threshold |lambda| = 1 sits exactly on
the Milnor-Wood bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned
from .hypcore import IdealPoint, act_ideal
from .lattice import (
    LatticePreset,
    default_truncation,
    sample_haar,
    truncation_error_bound,
)
from .volcocycle import v_n, vol

VOLUME_FLOOR_FRACTION = 0.1
SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    bias_bound: float
    n_samples: int
    seed: object


@dataclass(frozen=True)
class RatioEstimate(McEstimate):
    """Inverse-variance combination of per-simplex ratios, with the
    proportionality consistency flag."""

    consistent: bool = True
    per_simplex: tuple = ()


def smear_integral(preset: LatticePreset, phi, xi, n_samples: int, seed,
                   T: float = None, stream: int = None) -> McEstimate:
    """Weighted Monte-Carlo estimate of the smearing integral at xi."""
    verts = list(xi.vertices) if hasattr(xi, "vertices") else list(xi)
    if T is None:
        T = default_truncation(preset)
    samples = sample_haar(preset, seed, n_samples, T=T, stream=stream)
    vals = np.empty(n_samples)
    for i, s in enumerate(samples):
        moved = [phi(act_ideal(s.g, v)) for v in verts]
        # eps(g^{-1}) = eps(g)
        vals[i] = s.weight * s.g.sign * vol(moved).value
    value = float(vals.mean())
    std_error = float(vals.std(ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return McEstimate(value=value, std_error=std_error,
                      bias_bound=truncation_error_bound(preset, T),
                      n_samples=n_samples, seed=seed)


def _random_test_simplices(rng, n: int, m: int, max_tries: int = 2000):
    """Well-separated ideal simplices with |Vol_n| above the floor."""
    floor = VOLUME_FLOOR_FRACTION * v_n(n)
    out = []
    for _ in range(max_tries):
        pts = []
        for _ in range(n + 1):
            v = rng.standard_normal(n)
            pts.append(IdealPoint(v / np.linalg.norm(v)))
        if abs(vol(pts).value) >= floor:
            out.append(pts)
            if len(out) == m:
                return out
    raise IllConditioned(
        f"found {len(out)}/{m} test simplices above the volume floor")


def volume_ratio(preset: LatticePreset, phi, n_samples: int, seed,
                 m: int = 8, T: float = None) -> RatioEstimate:
    """Estimate lambda = Vol(rho)/Vol(M) by ratio-averaging.

    Each of m test simplices gives an independent estimate
    smear_integral(xi)/Vol_n(xi); these are combined inverse-variance
    weighted, and the consistency flag records whether they pairwise
    agree within 3 sigma (the proportionality of the smeared cochain to
    the volume cocycle).
    """
    n = preset.n
    if T is None:
        T = default_truncation(preset)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    simplices = _random_test_simplices(rng, n, m)
    per = []
    for i, pts in enumerate(simplices):
        est = smear_integral(preset, phi, pts, n_samples, seed, T=T, stream=i)
        denom = vol(pts).value
        lam = est.value / denom
        sig = max(est.std_error / abs(denom), SIGMA_FLOOR)
        bias = est.bias_bound / abs(denom)
        per.append((lam, sig, bias))

    lams = np.array([p[0] for p in per])
    sigs = np.array([p[1] for p in per])
    wts = 1.0 / sigs**2
    value = float(np.sum(wts * lams) / np.sum(wts))
    std_error = float(np.sum(wts) ** -0.5)
    bias = float(max(p[2] for p in per))
    consistent = True
    for i in range(m):
        for j in range(i + 1, m):
            gap = 3.0 * np.hypot(sigs[i], sigs[j]) + per[i][2] + per[j][2]
            if abs(lams[i] - lams[j]) > gap + 1e-12:
                consistent = False
    return RatioEstimate(value=value, std_error=std_error, bias_bound=bias,
                         n_samples=n_samples * m, seed=seed,
                         consistent=consistent, per_simplex=tuple(per))


def milnor_wood_check(est: McEstimate) -> dict:
    """Classify an estimate of lambda against the Milnor-Wood bound."""
    slack = 3.0 * est.std_error + est.bias_bound
    return {
        "passes": abs(est.value) <= 1.0 + slack,
        "maximal": abs(est.value) >= 1.0 - slack,
        "value": est.value,
        "slack": slack,
    }


def vol_of_rep(preset: LatticePreset, phi, n_samples: int, seed,
               m: int = 8, T: float = None) -> McEstimate:
    """Vol(rho) as lambda times the covolume, uncertainty propagated."""
    lam = volume_ratio(preset, phi, n_samples, seed, m=m, T=T)
    c = preset.covolume
    return McEstimate(value=lam.value * c, std_error=lam.std_error * c,
                      bias_bound=lam.bias_bound * c,
                      n_samples=lam.n_samples, seed=seed)
