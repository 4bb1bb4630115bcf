"""Cut-off machinery of the regularized system.

The cut-off ``chi_eps(z) = (z + 1/eps)^2`` for ``z <= -1/eps`` (zero above)
linearizes the quadratic self-interaction of the gradient invariants near
minus infinity.  It satisfies ``0 <= chi_eps(z) <= z^2`` and
``z chi_eps(z) <= 0``: only steep negative gradients feel it, and the energy
production term ``(P chi(P) + Q chi(Q))/48`` it induces is never positive.

From the cut-off, the source fields of the regularized system::

    A  = (g - gamma d_xx)^{-1} { sqrt(3 gamma)/(48 h^{1/2}) (chi(P) - chi(Q)) }
    B  = L_h^{-1} { -u A_x / 2 + d_x { h^2 u_x A_x / 2 - h (chi(P) + chi(Q))/48 } }
    V1 = (h/2) d_x L_h^{-1} { -u A_x + h int_{-inf}^x [ 3 u_x A_x / h
                               - (chi(P) + chi(Q))/(8 h^2) ] dy }
    V2 = (3 g / sqrt(3 gamma)) h^{-1/2} A
    M  = -3 h^{-2} R_script + V1 - V2        N = -3 h^{-2} R_script + V1 + V2

``V1`` needs the primitive from minus infinity, so runs with ``eps > 0``
require a line-mode grid.  When neither P nor Q dips below ``-1/eps`` every
field is identically zero and the regularized right-hand side coincides with
the unregularized one bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elliptic import TridiagonalSystem, assemble_L, solve_helmholtz, solve_L
from .errors import ContractViolationError, ModeError
from .grid import Grid, cumulative_integral, derivative
from .kinematics import FlowState, Params

__all__ = [
    "chi",
    "RegFields",
    "cutoff_active",
    "compute_A",
    "compute_V2",
    "compute_V1",
    "compute_B",
    "compute_MN",
    "compute_reg_fields",
]


def chi(zeta, epsilon: float):
    """Cut-off ``(zeta + 1/eps)^2 1_{zeta <= -1/eps}``; scalar or array.

    C^1 across the activation point.  Requires ``epsilon > 0`` (callers bypass
    with zero when the regularization is off).
    """
    if not epsilon > 0.0:
        raise ContractViolationError("chi needs epsilon > 0; the eps = 0 system has no cut-off")
    z = np.asarray(zeta, dtype=np.float64)
    shifted = z + 1.0 / epsilon
    out = np.where(z <= -1.0 / epsilon, shifted * shifted, 0.0)
    if np.isscalar(zeta) or out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class RegFields:
    """Source fields of the regularized system at one state."""

    A: np.ndarray
    A_x: np.ndarray
    B: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    chiP: np.ndarray
    chiQ: np.ndarray


def cutoff_active(P: np.ndarray, Q: np.ndarray, epsilon: float) -> bool:
    """True when some gradient invariant reaches the cut-off threshold ``-1/eps``."""
    if epsilon <= 0.0:
        return False
    thr = -1.0 / epsilon
    return bool(P.min() <= thr or Q.min() <= thr)


def compute_A(s: FlowState, P: np.ndarray, Q: np.ndarray, p: Params, g: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Helmholtz solve for the mass-equation source and its derivative."""
    rhs = (p.sqrt_3gamma / 48.0) * (chi(P, p.epsilon) - chi(Q, p.epsilon)) / np.sqrt(s.h)
    a = solve_helmholtz(rhs, p, g)
    return a, derivative(a, g)


def compute_V2(s: FlowState, A: np.ndarray, p: Params) -> np.ndarray:
    """Pointwise scaling ``(3 g / sqrt(3 gamma)) h^{-1/2} A``.

    Equal to ``(g/16) h^{-1/2} (g - gamma d_xx)^{-1} { h^{-1/2}(chi(P)-chi(Q)) }``
    since the two constant prefactors agree exactly: 3/48 = 1/16.
    """
    return (3.0 * p.g / p.sqrt_3gamma) * A / np.sqrt(s.h)


def compute_V1(s: FlowState, A: np.ndarray, A_x: np.ndarray,
               chiP: np.ndarray, chiQ: np.ndarray, p: Params, g: Grid,
               sys: TridiagonalSystem | None = None) -> np.ndarray:
    """Transport-correction field; needs the primitive from -infinity (line mode)."""
    if g.periodic:
        raise ModeError("V1 needs the primitive from -infinity; eps > 0 runs require line mode")
    if sys is None:
        sys = assemble_L(s.h, g, p.hbar)
    ux = derivative(s.u, g)
    integrand = 3.0 * ux * A_x / s.h - (chiP + chiQ) / (8.0 * s.h**2)
    arg = -s.u * A_x + s.h * cumulative_integral(integrand, g)
    w = solve_L(sys, arg, far_field=(arg[0] / s.h[0], arg[-1] / s.h[-1]))
    return 0.5 * s.h * derivative(w, g)


def compute_B(s: FlowState, A_x: np.ndarray, chiP: np.ndarray, chiQ: np.ndarray,
              p: Params, g: Grid, sys: TridiagonalSystem | None = None) -> np.ndarray:
    """Momentum-equation source ``L_h^{-1}{ -u A_x/2 + d_x{ h^2 u_x A_x/2 - h(chiP+chiQ)/48 } }``."""
    if sys is None:
        sys = assemble_L(s.h, g, p.hbar if not g.periodic else None)
    ux = derivative(s.u, g)
    inner = 0.5 * s.h**2 * ux * A_x - (1.0 / 48.0) * s.h * (chiP + chiQ)
    rhs = -0.5 * s.u * A_x + derivative(inner, g)
    return solve_L(sys, rhs)


def compute_MN(s: FlowState, reg: RegFields, scriptR: np.ndarray, p: Params) -> tuple[np.ndarray, np.ndarray]:
    """Riccati source terms ``M = -3 h^{-2} R + V1 - V2`` and ``N = M + 2 V2``."""
    base = -3.0 * scriptR / s.h**2 + reg.V1
    return base - reg.V2, base + reg.V2


def compute_reg_fields(s: FlowState, P: np.ndarray, Q: np.ndarray, p: Params, g: Grid,
                       sys: TridiagonalSystem | None = None) -> RegFields | None:
    """All source fields at once, or ``None`` when the cut-off is inactive.

    Returning ``None`` (rather than zero fields) lets the stepper skip the
    three extra elliptic solves and reproduce the unregularized right-hand
    side bitwise.
    """
    if not cutoff_active(P, Q, p.epsilon):
        return None
    if g.periodic:
        raise ModeError("the cut-off activated on a periodic grid; eps > 0 runs require line mode")
    chiP = chi(P, p.epsilon)
    chiQ = chi(Q, p.epsilon)
    a, a_x = compute_A(s, P, Q, p, g)
    if sys is None:
        sys = assemble_L(s.h, g, p.hbar)
    v1 = compute_V1(s, a, a_x, chiP, chiQ, p, g, sys)
    v2 = compute_V2(s, a, p)
    b = compute_B(s, a_x, chiP, chiQ, p, g, sys)
    return RegFields(A=a, A_x=a_x, B=b, V1=v1, V2=v2, chiP=chiP, chiQ=chiQ)
