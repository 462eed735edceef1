"""Secondary real branch W_{-1} of the Lambert W function.

W_{-1} inverts r -> r*exp(r) on r <= -1, mapping [-1/e, 0) onto (-inf, -1].
Only this branch is provided; the wave-profile formulas never need the
principal branch.  The algorithm uses the asymptotic guess
log(-y) - log(-log(-y)) away from the branch point, the branch-point series
near -1/e, and Halley iteration in between, with a bisection fallback.
"""

from __future__ import annotations

import math

import numpy as np

_INV_E = math.exp(-1.0)
# Within this distance of -1/e the iteration loses an order of accuracy,
# so the branch-point series value is returned directly.
_BRANCH_PAD = 1e-12


def _series(p2: float) -> float:
    # Expansion about the branch point, p = sqrt(2*(1 + e*y)).
    p = math.sqrt(p2)
    return -1.0 - p - p2 / 3.0 - 11.0 * p * p2 / 72.0


def _bisect(y: float) -> float:
    # g(r) = r*exp(r) decreases from 0^- to -1/e as r goes from -inf to -1.
    lo = -2.0
    while lo * math.exp(lo) < y:
        lo *= 2.0
        if lo < -1500.0:
            break
    hi = -1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * math.exp(mid) > y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lambert_w_minus1(y: float) -> float:
    """Solve r * exp(r) = y on the branch r <= -1.

    Accepts y in [-1/e, 0); relative residual |r e^r - y| <= 1e-13 |y|,
    and exactly -1 at the branch point.  Raises ValueError off the domain.
    """
    y = float(y)
    if not (-_INV_E <= y < 0.0):  # also rejects NaN
        raise ValueError(f"lambert_w_minus1 needs -1/e <= y < 0, got {y!r}")

    p2 = 2.0 * (1.0 + math.e * y)
    if p2 <= 0.0:
        return -1.0
    if p2 < 2.0 * math.e * _BRANCH_PAD:
        return _series(p2)

    if y > -0.25:
        ly = math.log(-y)
        r = ly - math.log(-ly)
    else:
        r = _series(p2)

    converged = False
    for _ in range(60):
        er = math.exp(r)
        f = r * er - y
        if f == 0.0:
            converged = True
            break
        fp = er * (r + 1.0)
        if fp == 0.0:
            break
        denom = fp - 0.5 * f * er * (r + 2.0) / fp
        if denom == 0.0:
            break
        step = f / denom
        r -= step
        if abs(step) <= 1e-16 * abs(r):
            converged = True
            break

    if r > -1.0:
        r = -1.0
    if not converged or abs(r * math.exp(r) - y) > 1e-13 * abs(y):
        r = _bisect(y)
    return r


def lambert_w_minus1_array(y: np.ndarray) -> np.ndarray:
    """Vectorized W_{-1} for dense grids (profile evaluation on fields).

    Same domain and accuracy contract as the scalar version.
    """
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        return y.copy()
    if np.any(np.isnan(y)) or np.any(y < -_INV_E) or np.any(y >= 0.0):
        raise ValueError("lambert_w_minus1 needs -1/e <= y < 0 elementwise")

    p2 = 2.0 * (1.0 + math.e * y)
    np.maximum(p2, 0.0, out=p2)
    p = np.sqrt(p2)
    series = -1.0 - p - p2 / 3.0 - 11.0 * p * p2 / 72.0
    near = p2 < 2.0 * math.e * _BRANCH_PAD

    with np.errstate(divide="ignore", invalid="ignore"):
        ly = np.log(-y)
        asym = ly - np.log(-ly)
    r = np.where(y > -0.25, asym, series)
    r[near] = series[near]

    active = ~near
    for _ in range(60):
        if not active.any():
            break
        er = np.exp(r)
        f = r * er - y
        fp = er * (r + 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            denom = fp - 0.5 * f * er * (r + 2.0) / fp
            step = np.where(active & (denom != 0.0), f / denom, 0.0)
        r -= step
        active = active & (np.abs(step) > 1e-16 * np.abs(r))

    np.minimum(r, -1.0, out=r)
    r[near] = series[near]

    # Stragglers (stalled Halley) get the scalar fallback.
    resid = np.abs(r * np.exp(r) - y)
    bad = resid > 1e-13 * np.abs(y)
    if bad.any():
        flat = y[bad].ravel()
        r[bad] = np.array([lambert_w_minus1(v) for v in flat])
    return r
