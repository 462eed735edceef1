"""Closed-form layer of the go-or-grow front models.

Minimal wave speed c*(chi), the three advection fluxes A, the wave-profile
functions eta (slope of the minimal traveling wave as a function of its
value), their Lipschitz-regularized family, the companion quantities
Q = eta + chi*A and R with eta*R = s - A, and the explicit minimal-speed
traveling waves for the local density u, the nonlocal density rho, and the
cumulative mass P.

Everything here is a pure function of its arguments; array inputs are
broadcast elementwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lambertw import lambert_w_minus1, lambert_w_minus1_array


class Regime(enum.Enum):
    PULLED = "pulled"
    PUSHMI_PULLYU = "pushmi-pullyu"
    PUSHED = "pushed"


@dataclass(frozen=True)
class ChiParams:
    """Drift strength chi and the quantities derived from it."""

    chi: float
    chi_vee: float  # max(1, chi)
    c_star: float
    regime: Regime


def minimal_speed(chi: float) -> ChiParams:
    """Minimal front speed c*(chi) and regime classification.

    c* = chi + 1/chi for chi >= 1 and 2 otherwise, so c* >= 2 with equality
    exactly for chi <= 1.  The front is pushed for chi > 1, pulled for
    chi < 1, pushmi-pullyu at chi = 1.
    """
    chi = float(chi)
    if not math.isfinite(chi) or chi < 0.0:
        raise ValueError(f"chi must be finite and >= 0, got {chi!r}")
    if chi > 1.0:
        regime = Regime.PUSHED
    elif chi == 1.0:
        regime = Regime.PUSHMI_PULLYU
    else:
        regime = Regime.PULLED
    c_star = chi + 1.0 / chi if chi >= 1.0 else 2.0
    return ChiParams(chi=chi, chi_vee=max(1.0, chi), c_star=c_star, regime=regime)


class FluxKind(enum.Enum):
    LOCAL_HEAVISIDE = "local_heaviside"
    NONLOCAL_RAMP = "nonlocal_ramp"
    REGULARIZED_LOCAL = "regularized_local"


@dataclass(frozen=True)
class FluxSpec:
    """Which advection flux A governs a run.

    local_heaviside: A(s) = s for s >= 1, else 0 (domain [0, 1])
    nonlocal_ramp:   A(s) = (s - 1)_+ (domain s >= 0)
    regularized:     piecewise linear, 0 on [0, 1-eps], slope 1/eps above
    """

    kind: FluxKind
    epsilon: float | None = None

    def __post_init__(self):
        if self.kind is FluxKind.REGULARIZED_LOCAL:
            if self.epsilon is None or not (0.0 < self.epsilon < 0.5):
                raise ValueError(
                    f"regularized flux needs epsilon in (0, 1/2), got {self.epsilon!r}"
                )
        elif self.epsilon is not None:
            raise ValueError("epsilon is only meaningful for the regularized flux")

    @staticmethod
    def local_heaviside() -> "FluxSpec":
        return FluxSpec(FluxKind.LOCAL_HEAVISIDE)

    @staticmethod
    def nonlocal_ramp() -> "FluxSpec":
        return FluxSpec(FluxKind.NONLOCAL_RAMP)

    @staticmethod
    def regularized(epsilon: float) -> "FluxSpec":
        return FluxSpec(FluxKind.REGULARIZED_LOCAL, float(epsilon))

    def lipschitz(self) -> float:
        """Lipschitz constant of A (the sharp local flux reports its
        regularized stand-in's 1/eps via the solver, never directly)."""
        if self.kind is FluxKind.NONLOCAL_RAMP:
            return 1.0
        if self.kind is FluxKind.REGULARIZED_LOCAL:
            return 1.0 / self.epsilon
        return math.inf


def _return_like(s, out):
    return float(out[0]) if np.ndim(s) == 0 else out


def flux(spec: FluxSpec, s):
    """Advection flux A(s); nondecreasing with A(0) = 0.

    Raises ValueError for s < 0, and for s > 1 with the local kinds.
    """
    arr = np.atleast_1d(np.asarray(s, dtype=float))
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ValueError("flux argument must be finite and >= 0")
    if spec.kind is FluxKind.NONLOCAL_RAMP:
        out = np.maximum(arr - 1.0, 0.0)
    else:
        if np.any(arr > 1.0):
            raise ValueError("local flux argument must lie in [0, 1]")
        if spec.kind is FluxKind.LOCAL_HEAVISIDE:
            out = np.where(arr >= 1.0, arr, 0.0)
        else:
            out = np.clip(arr - (1.0 - spec.epsilon), 0.0, None) / spec.epsilon
    return _return_like(s, out)


def _kappa(chi: float) -> float:
    # Lambert prefactor of the local profile, chi < 1 only.
    q = 1.0 / (1.0 - chi)
    return q * math.exp(-q)


def _lam(chi: float) -> float:
    # Lambert prefactor of the nonlocal profile, chi < 1 only.
    p = (2.0 - chi) / (1.0 - chi)
    return p * math.exp(-p)


def eta_local(chi: float, s):
    """Wave-profile function of the local model on [0, 1].

    chi >= 1 gives the linear profile chi*s below 1; below chi = 1 the
    profile is (1 + 1/W_{-1}(-kappa*s)) * s with kappa = q*exp(-q),
    q = 1/(1-chi).  eta(1) = 0 by the endpoint convention (the wave sits at
    its plateau there).
    """
    cp = minimal_speed(chi)
    arr = np.atleast_1d(np.asarray(s, dtype=float))
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("eta_local argument must lie in [0, 1]")
    if cp.chi >= 1.0:
        out = np.where(arr < 1.0, cp.chi * arr, 0.0)
    else:
        out = np.zeros_like(arr)
        y = _kappa(cp.chi) * arr
        # kappa*s can underflow to 0 for subnormal s; there eta(s) -> s
        tiny = (arr > 0.0) & (y <= 0.0) & (arr < 1.0)
        out[tiny] = arr[tiny]
        inner = (y > 0.0) & (arr < 1.0)
        if inner.any():
            w = lambert_w_minus1_array(-y[inner])
            out[inner] = (1.0 + 1.0 / w) * arr[inner]
        np.maximum(out, 0.0, out=out)  # roundoff guard at the endpoints
    return _return_like(s, out)


def eta_nonlocal(chi: float, s):
    """Wave-profile function of the cumulative-mass model on s >= 0.

    Linear chi*s below 1 for chi >= 1; Lambert form with prefactor
    lambda = p*exp(-p), p = (2-chi)/(1-chi), below chi = 1.  For s >= 1 the
    profile is the constant 1/(c - chi).
    """
    cp = minimal_speed(chi)
    arr = np.atleast_1d(np.asarray(s, dtype=float))
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ValueError("eta_nonlocal argument must be finite and >= 0")
    go_value = 1.0 / (cp.c_star - cp.chi)
    if cp.chi >= 1.0:
        out = np.where(arr < 1.0, cp.chi * arr, go_value)
    else:
        out = np.full_like(arr, go_value)
        out[arr < 1.0] = 0.0
        y = _lam(cp.chi) * arr
        tiny = (arr > 0.0) & (y <= 0.0) & (arr < 1.0)
        out[tiny] = arr[tiny]
        inner = (y > 0.0) & (arr < 1.0)
        if inner.any():
            w = lambert_w_minus1_array(-y[inner])
            out[inner] = (1.0 + 1.0 / w) * arr[inner]
        np.maximum(out, 0.0, out=out)
    return _return_like(s, out)


@dataclass(frozen=True)
class RegularizationConstants:
    """Constants of the chi < 1 regularized profile.

    psi_star is the profile value at the matching point 1 - eps, m_eps the
    slope of its linear cap, k_eps the log-shift matching the scaled sharp
    profile to the cap; kappa and lam are the Lambert prefactors of the
    sharp local and nonlocal profiles.
    """

    chi: float
    epsilon: float
    psi_star: float
    m_eps: float
    k_eps: float
    kappa: float
    lam: float


@lru_cache(maxsize=256)
def regularization_constants(chi: float, epsilon: float) -> RegularizationConstants:
    """Solve for the matching constants of the regularized local profile.

    Defined for chi in [0, 1).  k_eps solves
    exp(-k) * eta_local(exp(k) * (1 - eps)) = psi_star to 1e-12, with
    psi_star the positive root of mu^2 - (chi - 2 eps) mu - eps (1 - eps).
    """
    chi = float(chi)
    epsilon = float(epsilon)
    if not (0.0 <= chi < 1.0):
        raise ValueError("regularization constants exist for chi in [0, 1) only")
    if not (0.0 < epsilon < 0.5):
        raise ValueError("epsilon must lie in (0, 1/2)")
    d = chi - 2.0 * epsilon
    psi = 0.5 * (d + math.sqrt(d * d + 4.0 * epsilon * (1.0 - epsilon)))
    kap = _kappa(chi)

    # Bisect on p = exp(k) * (1 - eps) in (0, 1): g decreases from
    # (1 - eps) - psi > 0 to (1 - eps) chi - psi < 0.
    def g(p: float) -> float:
        return (1.0 - epsilon) * (1.0 + 1.0 / lambert_w_minus1(-kap * p)) - psi

    lo, hi = 1e-12, 1.0 - 1e-15
    if g(lo) <= 0.0 or g(hi) >= 0.0:
        raise RuntimeError("k_eps bracket failed; regularization constants bug")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    p_star = 0.5 * (lo + hi)
    if abs(g(p_star)) > 1e-12:
        raise RuntimeError("k_eps bisection did not converge")
    k_eps = math.log(p_star / (1.0 - epsilon))
    return RegularizationConstants(
        chi=chi,
        epsilon=epsilon,
        psi_star=psi,
        m_eps=psi / epsilon,
        k_eps=k_eps,
        kappa=kap,
        lam=_lam(chi),
    )


def eta_regularized(chi: float, epsilon: float, s):
    """Wave-profile function of the regularized local flux on [0, 1].

    chi >= 1: chi * (s - A_eps(s)).  chi < 1: the log-shifted sharp profile
    exp(-k) eta_local(exp(k) s) on [0, 1-eps] matched continuously to the
    linear cap m_eps (1 - s) above.
    """
    cp = minimal_speed(chi)
    if not (0.0 < epsilon < 0.5):
        raise ValueError("epsilon must lie in (0, 1/2)")
    arr = np.atleast_1d(np.asarray(s, dtype=float))
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("eta_regularized argument must lie in [0, 1]")
    if cp.chi >= 1.0:
        a = np.clip(arr - (1.0 - epsilon), 0.0, None) / epsilon
        out = cp.chi * (arr - a)
        out[arr >= 1.0] = 0.0  # exact zero, avoids 1 - (1-eps)/eps roundoff
        np.maximum(out, 0.0, out=out)
    else:
        rc = regularization_constants(chi, epsilon)
        scale = math.exp(rc.k_eps)
        out = np.empty_like(arr)
        low = arr <= 1.0 - epsilon
        if low.any():
            out[low] = eta_local(chi, scale * arr[low]) / scale
        high = ~low
        out[high] = rc.m_eps * (1.0 - arr[high])
    return _return_like(s, out)


def _eta_for(spec: FluxSpec, chi: float, s: float) -> float:
    if spec.kind is FluxKind.LOCAL_HEAVISIDE:
        return float(eta_local(chi, s))
    if spec.kind is FluxKind.NONLOCAL_RAMP:
        return float(eta_nonlocal(chi, s))
    return float(eta_regularized(chi, spec.epsilon, s))


def q_and_r(spec: FluxSpec, chi: float, s: float) -> tuple[float, float]:
    """Companion quantities Q = eta + chi*A and R with eta(s) R(s) = s - A(s).

    R equals c - Q' and is evaluated from the profile identity where
    eta > 0.  At the endpoint zeros of eta it takes its one-sided limit:
    R(0) = c - max(1, chi), and at s = 1 (local kinds) the limit from below,
    1/chi for the sharp flux (infinite at chi = 0) and (1-eps)/psi_star for
    the regularized one below chi = 1.
    """
    cp = minimal_speed(chi)
    sf = float(s)
    a = float(flux(spec, sf))
    eta = _eta_for(spec, chi, sf)
    q = eta + cp.chi * a
    if eta > 0.0:
        r = (sf - a) / eta
    elif sf == 0.0:
        r = cp.c_star - max(1.0, cp.chi)
    else:
        # s = 1 with a local kind (the nonlocal profile never vanishes there)
        if cp.chi >= 1.0:
            r = 1.0 / cp.chi
        elif spec.kind is FluxKind.LOCAL_HEAVISIDE:
            r = 1.0 / cp.chi if cp.chi > 0.0 else math.inf
        else:
            rc = regularization_constants(chi, spec.epsilon)
            r = (1.0 - spec.epsilon) / rc.psi_star
    return q, r


def traveling_wave(model: str, chi: float, x):
    """Minimal-speed traveling wave sampled at x.

    model is one of "u" (local density), "rho" (nonlocal density), or "p"
    (cumulative mass).  rho is the regime multiple of u: 1/(2-chi) below
    chi = 1, chi at and above (the chi = 1 forms agree).  At the kink x = 0
    the left value is returned.
    """
    cp = minimal_speed(chi)
    key = str(model).lower()
    if key not in ("u", "rho", "p"):
        raise ValueError(f"model must be 'u', 'rho' or 'p', got {model!r}")
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(arr)):
        raise ValueError("x must be finite")
    chi_ = cp.chi
    left = arr <= 0.0
    if chi_ >= 1.0:
        u = np.where(left, 1.0, np.exp(-chi_ * arr))
        if key == "u":
            out = u
        elif key == "rho":
            out = chi_ * u
        else:
            out = np.where(left, 1.0 - chi_ * arr, np.exp(-chi_ * arr))
    else:
        c2 = 2.0 - chi_
        tail = ((1.0 - chi_) * arr + 1.0) * np.exp(-arr)
        u = np.where(left, 1.0, tail)
        if key == "u":
            out = u
        elif key == "rho":
            out = u / c2
        else:
            out = np.where(
                left,
                1.0 - arr / c2,
                ((1.0 - chi_) * arr + c2) * np.exp(-arr) / c2,
            )
    return _return_like(x, out)
