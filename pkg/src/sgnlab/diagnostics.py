"""Pass/fail reports for every checkable identity and bound of the model.

Covered:

* mass/energy series and the energy budget, including the signed dissipation
  integral of the regularized system and its closure against E(T) - E(0);
* the a-priori depth/velocity bounds implied by the initial energy;
* the one-sided Oleinik inequality on the gradient invariants, monitored as
  ``sup_x P`` and ``sup_x Q`` normalized by the lower depth bound (the raw
  inequality bounds P/h and Q/h; the two differ by a factor in
  ``[h_min, h_max]``, and P, Q are already recorded every step);
* the paired blow-up criterion (a lone steep velocity gradient never counts);
* local space-time L^(2+alpha) norms of the field gradients on a box;
* the linear dispersion relation
  ``omega^2 = g hbar k^2 (1 + gamma k^2/g) / (1 + hbar^2 k^2 / 3)``
  and its dispersionless collapse at Bond number ``g hbar^2/gamma = 3``.

All reports are read-only over a stored history and serialize to flat dicts
with stable key names.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .dynamics import BlowupThresholds, SimHistory, check_blowup
from .errors import ContractViolationError, ModeError, ThresholdExceededError
from .grid import Grid, derivative
from .kinematics import FlowState, Params, a_priori_bounds

__all__ = [
    "Box",
    "EnergyReport",
    "BoundsReport",
    "OleinikReport",
    "BlowupReport",
    "PhaseSpeed",
    "energy_budget",
    "bounds_check",
    "oleinik_report",
    "blowup_report",
    "blowup_monitor",
    "lp_box_norm",
    "dispersion_omega",
    "measure_phase_speed",
    "bond_number",
]


class Box(NamedTuple):
    """Space-time box [t1, t2] x [a, b]."""

    t1: float
    t2: float
    a: float
    b: float


class Check(NamedTuple):
    passed: bool
    value: float
    tol: float

    def to_dict(self) -> dict:
        return {"pass": bool(self.passed), "value": float(self.value), "tol": float(self.tol)}


@dataclass
class EnergyReport:
    t: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    dissipation_integral: float
    budget_residual: float
    verdicts: dict[str, Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "e_initial": float(self.energy[0]),
            "e_final": float(self.energy[-1]),
            "mass_initial": float(self.mass[0]),
            "mass_final": float(self.mass[-1]),
            "dissipation_integral": float(self.dissipation_integral),
            "budget_residual": float(self.budget_residual),
            "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
        }


@dataclass
class BoundsReport:
    status: str  # "checked" or "skipped" (initial energy at or above the threshold)
    e0: float
    e_max: float
    h_min: float | None = None
    h_max: float | None = None
    u_max: float | None = None
    margins: dict[str, float] = field(default_factory=dict)
    verdicts: dict[str, Check] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.status == "skipped":
            return False
        return all(c.passed for c in self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "e0": float(self.e0),
            "e_max": float(self.e_max),
            "h_min": self.h_min,
            "h_max": self.h_max,
            "u_max": self.u_max,
            "margins": {k: float(v) for k, v in self.margins.items()},
            "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
        }


@dataclass
class OleinikReport:
    t: np.ndarray
    sup_P: np.ndarray
    sup_Q: np.ndarray
    fitted_C: float
    normalization: float
    violations: int
    user_C: float | None = None

    def to_dict(self) -> dict:
        return {
            "fitted_C": float(self.fitted_C),
            "normalization_h": float(self.normalization),
            "bound_form": "sup(P,Q)/h_min <= C (1 + 1/t)",
            "violations": int(self.violations),
            "user_C": self.user_C,
        }


@dataclass
class BlowupReport:
    t: np.ndarray
    min_ux: np.ndarray
    max_abs_hx: np.ndarray
    min_h: np.ndarray
    triggered: tuple[float, str] | None

    def to_dict(self) -> dict:
        return {
            "triggered": bool(self.triggered),
            "trigger_time": None if self.triggered is None else float(self.triggered[0]),
            "trigger_code": None if self.triggered is None else self.triggered[1],
            "final_min_ux": float(self.min_ux[-1]),
            "final_max_abs_hx": float(self.max_abs_hx[-1]),
            "final_min_h": float(self.min_h[-1]),
        }


@dataclass
class PhaseSpeed:
    speed: float | None
    status: str  # "ok", "undefined", "nonlinear-warning"
    amplitude_ratio: float


@dataclass
class DispersionReport:
    lines: list
    rtol: float

    @property
    def passed(self) -> bool:
        return bool(self.lines) and all(row["pass"] for row in self.lines)

    def to_dict(self) -> dict:
        return {"rtol": float(self.rtol), "modes": self.lines}


def energy_budget(history: SimHistory, p: Params,
                  conserve_rtol: float = 1e-6,
                  monotone_slack: float = 1e-8,
                  budget_rel: float = 1e-2,
                  budget_floor: float = 1e-8) -> EnergyReport:
    """Energy conservation (eps = 0) or dissipation and budget closure (eps > 0).

    The budget residual is ``E(T) - E(0) - integral of the production term``;
    the production term is nonpositive by construction, so the dissipation
    integral always is too.
    """
    t = history.series["t"]
    e = history.series["energy"]
    rate = history.series["diss_rate"]
    diss = float(np.trapezoid(rate, t)) if t.shape[0] > 1 else 0.0
    delta = float(e[-1] - e[0])
    residual = delta - diss
    e0 = float(e[0])
    scale = max(abs(e0), 1e-300)
    verdicts: dict[str, Check] = {}
    if p.epsilon == 0.0:
        verdicts["energy_conservation"] = Check(abs(delta) / scale <= conserve_rtol, abs(delta) / scale, conserve_rtol)
    else:
        max_rise = float(np.max(np.diff(e))) if e.shape[0] > 1 else 0.0
        tol_rise = monotone_slack * scale
        verdicts["energy_monotonic"] = Check(max_rise <= tol_rise, max_rise, tol_rise)
        tol_budget = max(budget_rel * abs(delta), budget_floor * scale)
        verdicts["budget_closure"] = Check(abs(residual) <= tol_budget, abs(residual), tol_budget)
    return EnergyReport(
        t=t, mass=history.series["mass"], energy=e,
        dissipation_integral=diss, budget_residual=residual, verdicts=verdicts,
    )


def bounds_check(history: SimHistory, p: Params,
                 tol_h_factor: float = 1e-4) -> BoundsReport:
    """A-priori depth and velocity bounds over the whole recorded run.

    Skipped (explicitly, not passed) when the measured initial energy reaches
    the threshold: the bounds are vacuous there and silence would mislead.
    """
    e0 = history.e0
    try:
        bounds = a_priori_bounds(e0, p)
    except ThresholdExceededError:
        return BoundsReport(status="skipped", e0=e0, e_max=p.e_max)
    tol_h = tol_h_factor * p.hbar
    tol_u = tol_h_factor * bounds.u_max + 1e-8
    min_h = float(np.min(history.series["min_h"]))
    max_h = float(np.max(history.series["max_h"]))
    max_u = float(np.max(history.series["max_abs_u"]))
    verdicts = {
        "h_lower": Check(min_h >= bounds.h_min - tol_h, min_h, bounds.h_min - tol_h),
        "h_upper": Check(max_h <= bounds.h_max + tol_h, max_h, bounds.h_max + tol_h),
        "u_bound": Check(max_u <= bounds.u_max + tol_u, max_u, bounds.u_max + tol_u),
    }
    margins = {
        "h_lower": min_h - bounds.h_min,
        "h_upper": bounds.h_max - max_h,
        "u_bound": bounds.u_max - max_u,
    }
    return BoundsReport(status="checked", e0=e0, e_max=p.e_max,
                        h_min=bounds.h_min, h_max=bounds.h_max, u_max=bounds.u_max,
                        margins=margins, verdicts=verdicts)


def oleinik_report(history: SimHistory, p: Params, user_c: float | None = None) -> OleinikReport:
    """One-sided bound ``sup(P, Q)/h_min <= C (1 + 1/t)`` fitted over the run.

    ``fitted_C`` is the smallest constant covering every recorded step with
    t > 0.  When ``user_c`` is given, samples exceeding it are counted as
    violations.
    """
    t = history.series["t"]
    sup_p = history.series["sup_P"]
    sup_q = history.series["sup_Q"]
    mask = t > 0.0
    try:
        h_norm = a_priori_bounds(history.e0, p).h_min
    except ThresholdExceededError:
        h_norm = float(np.min(history.series["min_h"]))
    sup = np.maximum(np.maximum(sup_p, sup_q), 0.0)
    fitted = 0.0
    violations = 0
    if np.any(mask):
        ratio = (sup[mask] / h_norm) / (1.0 + 1.0 / t[mask])
        fitted = float(np.max(ratio))
        if user_c is not None:
            violations = int(np.sum(ratio > user_c))
    return OleinikReport(t=t[mask], sup_P=sup_p[mask], sup_Q=sup_q[mask],
                         fitted_C=fitted, normalization=h_norm,
                         violations=violations, user_C=user_c)


def blowup_report(history: SimHistory) -> BlowupReport:
    return BlowupReport(
        t=history.series["t"],
        min_ux=history.series["min_ux"],
        max_abs_hx=history.series["max_abs_hx"],
        min_h=history.series["min_h"],
        triggered=history.trigger,
    )


def blowup_monitor(s: FlowState, p: Params, g: Grid,
                   thresholds: BlowupThresholds | None = None) -> str | None:
    """Evaluate the paired blow-up criterion on a single state."""
    thr = thresholds if thresholds is not None else BlowupThresholds()
    u_x = derivative(s.u, g)
    h_x = derivative(s.h, g)
    if thr.depth is not None:
        floor = thr.depth
    else:
        floor = 0.05 * p.hbar
    return check_blowup(float(np.max(np.abs(u_x))), float(np.max(np.abs(h_x))),
                        float(s.h.min()), thr, floor)


def lp_box_norm(history: SimHistory, alpha: float, box: Box) -> float:
    """Space-time integral of ``|h_t|^q + |h_x|^q + |u_t|^q + |u_x|^q`` with
    ``q = 2 + alpha`` over the box.

    Time derivatives come from second-order differences of the snapshots, so
    the snapshot cadence should give at least 16 time samples inside the box
    (the op warns otherwise).
    """
    if not (0.0 <= alpha < 1.0):
        raise ContractViolationError(f"alpha must lie in [0, 1), got {alpha}")
    g = history.grid
    snaps = history.snapshots
    times = np.array([s.t for s in snaps])
    eps_t = 1e-9 * max(1.0, abs(box.t2))
    if box.t1 < times[0] - eps_t or box.t2 > times[-1] + eps_t or box.t1 >= box.t2:
        raise ContractViolationError("box time range outside the recorded history")
    if box.a < g.x_left or box.b > g.x_right or box.a >= box.b:
        raise ContractViolationError("box spatial range outside the domain")
    sel = np.nonzero((times >= box.t1 - eps_t) & (times <= box.t2 + eps_t))[0]
    if sel.shape[0] < 3:
        raise ContractViolationError("box needs at least 3 snapshots for time differences")
    if sel.shape[0] < 16:
        warnings.warn(f"lp_box_norm: only {sel.shape[0]} time samples in the box; "
                      "time derivatives are coarsely resolved")
    # central time differences need one neighbor on each side when available
    lo = max(sel[0] - 1, 0)
    hi = min(sel[-1] + 2, len(snaps))
    hs = np.stack([snaps[i].h for i in range(lo, hi)])
    us = np.stack([snaps[i].u for i in range(lo, hi)])
    tt = times[lo:hi]
    h_t = np.gradient(hs, tt, axis=0)
    u_t = np.gradient(us, tt, axis=0)
    inner = sel - lo
    q = 2.0 + alpha
    x = g.cells()
    cols = (x >= box.a) & (x <= box.b)
    per_snap = np.empty(inner.shape[0])
    for j, i in enumerate(inner):
        h_x = derivative(hs[i], g)
        u_x = derivative(us[i], g)
        integrand = (np.abs(h_t[i]) ** q + np.abs(h_x) ** q
                     + np.abs(u_t[i]) ** q + np.abs(u_x) ** q)
        per_snap[j] = np.sum(integrand[cols]) * g.dx
    return float(np.trapezoid(per_snap, tt[inner]))


def dispersion_omega(k: float, p: Params) -> float:
    """Positive root of the linear dispersion relation."""
    if not k > 0:
        raise ContractViolationError("wavenumber must be positive")
    k2 = k * k
    return math.sqrt(p.g * p.hbar * k2 * (1.0 + p.gamma * k2 / p.g) / (1.0 + p.hbar**2 * k2 / 3.0))


def bond_number(p: Params) -> float:
    """``g hbar^2 / gamma``; the value 3 makes the linearized system dispersionless."""
    return p.g * p.hbar**2 / p.gamma


def dispersion_report(history: SimHistory, wavenumbers, rtol: float = 1e-2) -> DispersionReport:
    """Measured vs predicted phase speed for each seeded mode."""
    p = history.params
    lines = []
    for k in wavenumbers:
        meas = measure_phase_speed(history, k)
        predicted = dispersion_omega(k, p) / k
        rel = abs(meas.speed - predicted) / predicted if meas.speed is not None else math.inf
        lines.append({
            "k": float(k),
            "measured": meas.speed,
            "predicted": float(predicted),
            "rel_err": float(rel),
            "status": meas.status,
            "pass": bool(meas.status == "ok" and rel <= rtol),
        })
    return DispersionReport(lines=lines, rtol=rtol)


def measure_phase_speed(history: SimHistory, k: float) -> PhaseSpeed:
    """Phase speed of the k-mode from the drift of its Fourier phase.

    The run must be periodic and seeded with (mostly) a single resonant mode;
    the phase of the k-th discrete Fourier coefficient of ``h - hbar`` is
    unwrapped across snapshots and fitted linearly in time.
    """
    g = history.grid
    p = history.params
    if not g.periodic:
        raise ModeError("phase-speed measurement needs a periodic run")
    m_float = k * g.length / (2.0 * math.pi)
    m = int(round(m_float))
    if abs(m_float - m) > 1e-8 or m < 1 or m > g.n // 2 - 1:
        raise ContractViolationError(f"wavenumber {k} does not fit the periodic domain")
    coeffs = np.array([np.fft.rfft(s.h - p.hbar)[m] for s in history.snapshots])
    amps = np.abs(coeffs)
    if np.max(amps) < 1e-12 * g.n * p.hbar:
        return PhaseSpeed(speed=None, status="undefined", amplitude_ratio=1.0)
    t = np.array([s.t for s in history.snapshots])
    phase = np.unwrap(np.angle(coeffs))
    slope = np.polyfit(t, phase, 1)[0]
    speed = -slope / k
    ratio = float(amps[-1] / amps[0]) if amps[0] > 0 else math.inf
    status = "ok" if 0.1 < ratio < 10.0 else "nonlinear-warning"
    return PhaseSpeed(speed=float(speed), status=status, amplitude_ratio=ratio)
