"""Observables of a run: front location, shape defect, exponential moments,
free-boundary (Rankine-Hugoniot) residuals, and weighted-defect norms.

All functions are pure in the state and cheap relative to time stepping;
they are meant to be sampled along a run through TraceRecorder.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import solver
from .profiles import eta_nonlocal, eta_regularized
from .solver import Model, SimConfig, SimState


_trapezoid = getattr(np, "trapezoid", None) or np.trapz


class TailNotResolvedWarning(UserWarning):
    """The moment integrand has not decayed below 1e-10 at the right edge."""


class MomentKind(enum.Enum):
    IU = "iu"
    IRHO = "irho"
    IP = "ip"
    IM = "im"


@dataclass(frozen=True)
class FrontTrace:
    """Lab-frame front positions sampled along a run (nan = no front)."""

    t: np.ndarray
    x_front: np.ndarray

    def __post_init__(self):
        if self.t.shape != self.x_front.shape or self.t.ndim != 1:
            raise ValueError("front trace needs matching 1-d arrays")
        if np.any(np.diff(self.t) <= 0.0):
            raise ValueError("front trace times must be strictly increasing")


@dataclass(frozen=True)
class MomentTrace:
    t: np.ndarray
    value: np.ndarray
    kind: MomentKind


@dataclass(frozen=True)
class ShapeDefectField:
    """Node-wise defect omega = -v_x - eta(v), optionally weighted."""

    x: np.ndarray
    values: np.ndarray
    weighted: bool = False
    gamma: float | None = None


def front_location(state: SimState, cfg: SimConfig) -> float | None:
    """Front position in window coordinates, or None when absent.

    Local model: rightmost crossing of the level 1 - theta (the discrete
    solution approaches 1 from below, so an equality test would never
    fire).  Nonlocal models: the crossing of P = 1.  FKPP reference: the
    half level.
    """
    probe = solver.front_field(state, cfg)
    return solver.level_crossing(probe, state.x_left, cfg.grid.dx, solver.front_level(cfg))


def moving_frame_z(state: SimState, cfg: SimConfig) -> np.ndarray:
    """Node coordinates in the speed-c moving frame, z = x_lab - c t."""
    x = cfg.grid.nodes(state.x_left)
    return x + cfg.frame.shift(state.t) - cfg.chi_params.c_star * state.t


def _defect_source(state: SimState, cfg: SimConfig):
    """Field and profile function the defect compares against."""
    if cfg.model is Model.LOCAL_U:
        eps = cfg.scheme_epsilon()
        # The scheme evolves the regularized flux, so its preserved-sign
        # defect is measured against the matching regularized profile.
        return state.field, lambda v: eta_regularized(cfg.chi_params.chi, eps, np.clip(v, 0.0, 1.0))
    if cfg.model in (Model.NONLOCAL_P, Model.NONLOCAL_RHO):
        p = solver.derived_P(state, cfg)
        return p, lambda v: eta_nonlocal(cfg.chi_params.chi, np.clip(v, 0.0, None))
    raise ValueError("shape defect is defined for the go-or-grow models only")


def _centered_slope(v: np.ndarray, dx: float) -> np.ndarray:
    s = np.empty_like(v)
    s[1:-1] = (v[2:] - v[:-2]) * (0.5 / dx)
    s[0] = (v[1] - v[0]) / dx
    s[-1] = (v[-1] - v[-2]) / dx
    return s


def shape_defect(
    state: SimState,
    cfg: SimConfig,
    weighted: bool = False,
    gamma: float | None = None,
) -> ShapeDefectField:
    """omega_i = -v_x(x_i) - eta(v_i), centered differences inside.

    weighted multiplies by exp(z / chi_vee) in the moving frame; gamma adds
    the localization weight exp(-gamma sqrt(1 + z^2)).
    """
    v, eta = _defect_source(state, cfg)
    omega = -_centered_slope(v, cfg.grid.dx) - eta(v)
    x = cfg.grid.nodes(state.x_left)
    if weighted or gamma is not None:
        z = moving_frame_z(state, cfg)
        if weighted:
            omega = omega * np.exp(z / cfg.chi_params.chi_vee)
        if gamma is not None:
            omega = omega * np.exp(-gamma * np.sqrt(1.0 + z * z))
    return ShapeDefectField(x=x, values=omega, weighted=weighted, gamma=gamma)


def _switch_exclusion(state: SimState, cfg: SimConfig, pad: int = 3) -> np.ndarray:
    """Mask of nodes kept for defect statistics.

    Drops pad cells around the flux-switch kink (a genuine distributional
    object) and the one-sided edge stencils.  For the regularized local
    model the switch is not a point: the interface occupies the level band
    u in (1 - eps, 1) and its discrete corner layer radiates about two
    more eps-widths of wake, so the whole band from the front level down
    to 1 - 4 eps is interface machinery and is excluded.
    """
    n = cfg.grid.n
    keep = np.ones(n, dtype=bool)
    keep[:2] = False
    keep[-2:] = False
    dx = cfg.grid.dx
    probe = solver.front_field(state, cfg)
    front = solver.level_crossing(probe, state.x_left, dx, solver.front_level(cfg))
    if front is None:
        return keep
    if cfg.model is Model.LOCAL_U:
        eps = cfg.scheme_epsilon()
        deep = solver.level_crossing(probe, state.x_left, dx, 1.0 - 4.0 * eps)
        hi_x = deep if deep is not None else front
    else:
        hi_x = front
    i0 = int(round((front - state.x_left) / dx)) - pad
    i1 = int(round((hi_x - state.x_left) / dx)) + pad + 1
    keep[max(0, i0) : min(n, i1)] = False
    return keep


def min_shape_defect(state: SimState, cfg: SimConfig) -> float:
    """Minimum node-wise defect away from the switch kinks and edges."""
    omega = shape_defect(state, cfg).values
    keep = _switch_exclusion(state, cfg)
    if not keep.any():
        return math.nan
    return float(omega[keep].min())


def weighted_defect_sup(state: SimState, cfg: SimConfig) -> float:
    """Sup of the weighted defect away from the switch kinks and edges."""
    omega = shape_defect(state, cfg, weighted=True).values
    keep = _switch_exclusion(state, cfg)
    if not keep.any():
        return math.nan
    return float(omega[keep].max())


def exponential_moment(
    state: SimState,
    cfg: SimConfig,
    kind: MomentKind,
    m: float = 0.2,
) -> float:
    """Trapezoid moment of the field against exp(z / chi_vee) in the
    moving frame (kinds iu / irho / ip), or of
    (exp(mz) + exp(-mz)) exp(z) rho for kind im.

    Warns TailNotResolvedWarning when the integrand at the right window
    edge is above 1e-10: the window is then too narrow for the moment.
    """
    z = moving_frame_z(state, cfg)
    if kind is MomentKind.IU:
        if cfg.model not in (Model.LOCAL_U, Model.FKPP):
            raise ValueError("iu moment needs a local density field")
        f = state.field
        weight = np.exp(z / cfg.chi_params.chi_vee)
    elif kind is MomentKind.IP:
        f = solver.derived_P(state, cfg)
        weight = np.exp(z / cfg.chi_params.chi_vee)
    elif kind is MomentKind.IRHO:
        f = solver.derived_rho(state, cfg)
        weight = np.exp(z / cfg.chi_params.chi_vee)
    else:
        if not (0.0 < m < 1.0):
            raise ValueError("im moment needs m in (0, 1)")
        f = solver.derived_rho(state, cfg)
        weight = (np.exp(m * z) + np.exp(-m * z)) * np.exp(z)
    integrand = f * weight
    if abs(float(integrand[-1])) > 1e-10:
        warnings.warn(
            f"moment integrand {integrand[-1]:.3e} at the right edge; widen the window",
            TailNotResolvedWarning,
            stacklevel=2,
        )
    return float(_trapezoid(integrand, dx=cfg.grid.dx))


def default_moment_kind(cfg: SimConfig) -> MomentKind | None:
    if cfg.model is Model.LOCAL_U:
        return MomentKind.IU
    if cfg.model is Model.NONLOCAL_RHO:
        return MomentKind.IRHO
    if cfg.model is Model.NONLOCAL_P:
        return MomentKind.IP
    return None


def _interp(field: np.ndarray, x_left: float, dx: float, xq: float) -> float:
    pos = (xq - x_left) / dx
    i = int(math.floor(pos))
    i = min(max(i, 0), field.size - 2)
    w = pos - i
    return float(field[i] * (1.0 - w) + field[i + 1] * w)


def rankine_hugoniot_residual(state: SimState, cfg: SimConfig) -> float | None:
    """Residual of the free-boundary slope/jump relation at the front.

    Local model: |slope+ + chi| with the slope measured just below the
    interface, at the level u = 1 - 2 eps: the regularized layer between
    1 - theta and 1 - eps carries no slope information, and the corner
    cell at 1 - eps carries an O(chi^2 dx / eps) difference artifact.
    Nonlocal models: |(rho_x+ - rho_x-) + chi rho|, with the one-sided
    differences starting one node clear of the kink cell and rho sampled
    at the midpoint of the right stencil so the exponential tail cancels
    the sampling offset.

    Returns None when no front is present.
    """
    dx = cfg.grid.dx
    chi = cfg.chi_params.chi
    if cfg.model is Model.LOCAL_U:
        eps = cfg.scheme_epsilon()
        x_if = solver.level_crossing(state.field, state.x_left, dx, 1.0 - 2.0 * eps)
        if x_if is None:
            return None
        if x_if - dx < state.x_left or x_if + dx > state.x_left + (cfg.grid.n - 1) * dx:
            return None
        up = _interp(state.field, state.x_left, dx, x_if + dx)
        dn = _interp(state.field, state.x_left, dx, x_if - dx)
        slope = (up - dn) / (2.0 * dx)
        return abs(slope + chi)
    if cfg.model in (Model.NONLOCAL_P, Model.NONLOCAL_RHO):
        probe = solver.front_field(state, cfg)
        x_f = solver.level_crossing(probe, state.x_left, dx, 1.0)
        if x_f is None:
            return None
        rho = solver.derived_rho(state, cfg)
        j = int(math.floor((x_f - state.x_left) / dx)) + 1  # first node right of front
        if j - 4 < 0 or j + 3 >= cfg.grid.n:
            return None
        slope_right = (rho[j + 3] - rho[j + 1]) / (2.0 * dx)
        slope_left = (rho[j - 2] - rho[j - 4]) / (2.0 * dx)
        return abs(slope_right - slope_left + chi * rho[j + 2])
    raise ValueError("Rankine-Hugoniot residual is a go-or-grow quantity")


@dataclass
class TraceRecorder:
    """Observer collecting the standard per-sample diagnostics.

    Rows: t, lab-frame front, moment (model default kind), min shape
    defect, weighted defect sup, Rankine-Hugoniot residual.
    """

    collect_defect: bool = True
    collect_rh: bool = True
    t: list = dc_field(default_factory=list)
    x_front: list = dc_field(default_factory=list)
    moment: list = dc_field(default_factory=list)
    min_defect: list = dc_field(default_factory=list)
    weighted_sup: list = dc_field(default_factory=list)
    rh_residual: list = dc_field(default_factory=list)

    def __call__(self, state: SimState, cfg: SimConfig) -> None:
        self.t.append(state.t)
        f = front_location(state, cfg)
        self.x_front.append(math.nan if f is None else f + cfg.frame.shift(state.t))
        kind = default_moment_kind(cfg)
        if kind is None:
            self.moment.append(math.nan)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TailNotResolvedWarning)
                self.moment.append(exponential_moment(state, cfg, kind))
        if self.collect_defect and cfg.model is not Model.FKPP:
            self.min_defect.append(min_shape_defect(state, cfg))
            self.weighted_sup.append(weighted_defect_sup(state, cfg))
        else:
            self.min_defect.append(math.nan)
            self.weighted_sup.append(math.nan)
        if self.collect_rh and cfg.model is not Model.FKPP:
            r = rankine_hugoniot_residual(state, cfg)
            self.rh_residual.append(math.nan if r is None else r)
        else:
            self.rh_residual.append(math.nan)

    def front_trace(self) -> FrontTrace:
        return FrontTrace(t=np.asarray(self.t), x_front=np.asarray(self.x_front))

    def moment_trace(self, cfg: SimConfig) -> MomentTrace:
        kind = default_moment_kind(cfg) or MomentKind.IU
        return MomentTrace(t=np.asarray(self.t), value=np.asarray(self.moment), kind=kind)

    @property
    def moment_initial(self) -> float:
        vals = [v for v in self.moment if not math.isnan(v)]
        return vals[0] if vals else math.nan
