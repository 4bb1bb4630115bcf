"""Uniform 1D cell-centered mesh and the finite-difference calculus on it.

Fields are plain ``float64`` arrays sampled at cell centers
``x_i = x_left + (i + 1/2) dx``.  Two domain modes exist:

* ``periodic``: a torus of circumference ``n*dx``; stencils wrap around.
* ``line``: a truncation of the real line.  All far-field assumptions of the
  continuous problem (constant reference state at infinity) translate into the
  requirement that waves never reach the boundary; callers enforce it with
  :func:`check_far_field`.

Derivatives are 4th-order central in the interior with one-sided 4th-order
closures at the two outermost cells on each side of a line-mode grid, so both
modes share one code path.  Integration is the midpoint rule (spectrally
accurate for smooth periodic fields).  The running primitive
``x -> int_{x_left}^{x} f`` is a trapezoid cumulative sum and exists only in
line mode: on a circle the primitive of a field with nonzero mean is not
single-valued, and we refuse rather than guess.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryContaminationError, ContractViolationError, ModeError

__all__ = [
    "Grid",
    "as_field",
    "derivative",
    "integrate",
    "cumulative_integral",
    "check_far_field",
]

PERIODIC = "periodic"
LINE = "line"


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered 1D mesh.

    Immutable after construction; safe to share across threads.
    """

    n: int
    dx: float
    x_left: float = 0.0
    mode: str = PERIODIC

    def __post_init__(self):
        if self.n < 8:
            raise ContractViolationError(f"grid needs n >= 8 cells, got {self.n}")
        if not self.dx > 0:
            raise ContractViolationError(f"grid spacing must be positive, got {self.dx}")
        if self.mode not in (PERIODIC, LINE):
            raise ContractViolationError(f"unknown grid mode {self.mode!r}")

    @classmethod
    def from_length(cls, n: int, length: float, x_left: float = 0.0, mode: str = PERIODIC) -> "Grid":
        return cls(n=n, dx=length / n, x_left=x_left, mode=mode)

    @property
    def length(self) -> float:
        return self.n * self.dx

    @property
    def x_right(self) -> float:
        return self.x_left + self.length

    def cells(self) -> np.ndarray:
        """Coordinates of the cell centers."""
        return self.x_left + (np.arange(self.n) + 0.5) * self.dx

    @property
    def periodic(self) -> bool:
        return self.mode == PERIODIC


def as_field(values, g: Grid) -> np.ndarray:
    """Validate and return ``values`` as a float64 field on ``g``."""
    f = np.asarray(values, dtype=np.float64)
    if f.shape != (g.n,):
        raise ContractViolationError(f"field has shape {f.shape}, expected ({g.n},)")
    if not np.all(np.isfinite(f)):
        raise ContractViolationError("field contains non-finite entries")
    return f


def derivative(f: np.ndarray, g: Grid) -> np.ndarray:
    """4th-order first derivative of ``f`` on ``g``.

    Periodic mode wraps; line mode uses one-sided 4th-order stencils at the
    two boundary cells on each side.  Exact for polynomials up to degree 4.
    """
    f = as_field(f, g)
    inv12dx = 1.0 / (12.0 * g.dx)
    # stencils written as combinations of differences so constants are
    # annihilated exactly (flat states must be exact fixed points downstream)
    if g.periodic:
        return (
            8.0 * (np.roll(f, -1) - np.roll(f, 1)) - (np.roll(f, -2) - np.roll(f, 2))
        ) * inv12dx
    out = np.empty_like(f)
    out[2:-2] = (8.0 * (f[3:-1] - f[1:-3]) - (f[4:] - f[:-4])) * inv12dx
    out[0] = (48.0 * (f[1] - f[0]) - 36.0 * (f[2] - f[0])
              + 16.0 * (f[3] - f[0]) - 3.0 * (f[4] - f[0])) * inv12dx
    out[1] = (-3.0 * (f[0] - f[1]) + 18.0 * (f[2] - f[1])
              - 6.0 * (f[3] - f[1]) + (f[4] - f[1])) * inv12dx
    out[-2] = (3.0 * (f[-1] - f[-2]) - 18.0 * (f[-3] - f[-2])
               + 6.0 * (f[-4] - f[-2]) - (f[-5] - f[-2])) * inv12dx
    out[-1] = (-48.0 * (f[-2] - f[-1]) + 36.0 * (f[-3] - f[-1])
               - 16.0 * (f[-4] - f[-1]) + 3.0 * (f[-5] - f[-1])) * inv12dx
    return out


def integrate(f: np.ndarray, g: Grid) -> float:
    """Midpoint-rule integral ``sum_i f_i dx``."""
    f = as_field(f, g)
    return float(np.sum(f) * g.dx)


def cumulative_integral(f: np.ndarray, g: Grid) -> np.ndarray:
    """Running trapezoid primitive ``F_i ~ int_{x_left}^{x_i} f``.

    Line mode only; ``F_0 = f_0 dx / 2`` (the half cell between the boundary
    and the first center).  Exact for constants: ``f = 1`` gives
    ``F_i = x_i - x_left``.
    """
    f = as_field(f, g)
    if g.periodic:
        raise ModeError("cumulative integral is not single-valued on a periodic domain")
    out = np.empty_like(f)
    out[0] = 0.5 * f[0] * g.dx
    np.cumsum(0.5 * (f[:-1] + f[1:]) * g.dx, out=out[1:])
    out[1:] += out[0]
    return out


def check_far_field(h: np.ndarray, u: np.ndarray, g: Grid, hbar: float,
                    rtol: float = 1e-6, ncells: int = 4) -> None:
    """Abort if waves contaminate the boundary of a line-mode grid.

    ``|h - hbar|`` and ``|u|`` at the ``ncells`` outermost cells on each side
    must stay below ``rtol * hbar``; a violation means the truncation of the
    real line is no longer a faithful model and the run must stop.
    No-op on periodic grids.
    """
    if g.periodic:
        return
    tol = rtol * hbar
    edges = np.r_[0:ncells, g.n - ncells : g.n]
    dh = np.max(np.abs(h[edges] - hbar))
    du = np.max(np.abs(u[edges]))
    if dh > tol or du > tol:
        raise BoundaryContaminationError(
            f"far field contaminated: max|h-hbar|={dh:.3e}, max|u|={du:.3e} "
            f"at the {ncells} outermost cells (tolerance {tol:.3e})"
        )
