"""Frequency-domain design and verification toolkit.

Numerical strict-positive-realness tests, the zero-average log-gain check,
the closed-form SPR region for the second-order-numerator / first-order-
denominator gain filter, construction of the integrator-cascaded filter and
its positive-realness test with the unit-circle pole factored out, plus
region grids for contour plotting. All operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dsp_core import Polynomial, TransferOperator, poly_mul, roots_inside_unit_circle

DEFAULT_SPR_GRID = 8192
DEFAULT_QUAD_POINTS = 4096
PR_TOL = 1e-9


def d_from_dprime(d_prime) -> tuple[float, ...]:
    """Recursion weights obtained by absorbing a discrete integrator.

    Returns ``d`` of length ``len(d_prime) + 1`` such that
    ``1 - d1 q^-1 - ... - dn q^-n`` equals ``(1 - q^-1)(1 - d'1 q^-1 - ...)``.
    The empty list maps to ``(1.0,)``, the plain integrator.
    """
    padded = (-1.0, *(float(v) for v in d_prime), 0.0)
    return tuple(padded[i] - padded[i - 1] for i in range(1, len(padded)))


@dataclass(frozen=True)
class DagConfig:
    """Coefficients of the dynamic adaptation gain filter.

    ``c`` holds the moving-average weights applied to past correction
    terms, ``d_prime`` the autoregressive weights; both empty denotes the
    plain integral/gradient algorithm. The derived recursion weights
    :attr:`d` always stay consistent with ``d_prime``.
    """

    c: tuple[float, ...] = ()
    d_prime: tuple[float, ...] = ()

    def __post_init__(self):
        c = tuple(float(v) for v in self.c)
        dp = tuple(float(v) for v in self.d_prime)
        if not all(math.isfinite(v) for v in c + dp):
            raise ValueError("gain filter coefficients must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d_prime", dp)

    @property
    def d(self) -> tuple[float, ...]:
        return d_from_dprime(self.d_prime)

    @property
    def numerator(self) -> Polynomial:
        return Polynomial((1.0, *self.c))


@dataclass(frozen=True)
class SprVerdict:
    """Outcome of a numerical strict-positive-realness sweep."""

    is_stable: bool
    is_spr: bool
    min_real_part: float
    argmin_omega: float


@dataclass(frozen=True)
class PrVerdict:
    """Outcome of the positive-realness test with a unit-circle pole."""

    is_pr: bool
    min_real_part_excluding_pole: float
    unit_pole_residue_positive: bool


def dag_transfer(cfg: DagConfig) -> TransferOperator:
    """The adaptation-gain filter itself (numerator over AR part)."""
    den = Polynomial((1.0, *(-v for v in cfg.d_prime)))
    return TransferOperator(cfg.numerator, den)


def integrated_dag(cfg: DagConfig) -> TransferOperator:
    """Gain filter cascaded with a discrete integrator.

    The denominator is built from :func:`d_from_dprime`, so it carries a
    root at z = 1 exactly (the weights telescope to sum 1).
    """
    den = Polynomial((1.0, *(-v for v in d_from_dprime(cfg.d_prime))))
    return TransferOperator(cfg.numerator, den)


@lru_cache(maxsize=8)
def _unit_circle_grid(grid_size: int):
    omega = np.linspace(0.0, np.pi, grid_size)
    return omega, np.exp(-1j * omega)


def is_spr_numeric(h: TransferOperator, grid_size: int = DEFAULT_SPR_GRID) -> SprVerdict:
    """Numerical SPR test on a uniform frequency grid over [0, pi].

    Strict positive realness requires zeros and poles strictly inside the
    unit circle and a strictly positive real part on the whole grid. The
    default grid resolves real-part minima down to roughly 1e-7.
    """
    if grid_size < 256:
        raise ValueError("grid_size must be at least 256")
    stable = roots_inside_unit_circle(h.numerator) and roots_inside_unit_circle(h.denominator)
    omega, z_inv = _unit_circle_grid(int(grid_size))
    re = np.real(h.response_at(z_inv))
    idx = int(np.argmin(re))
    min_re = float(re[idx])
    return SprVerdict(stable, bool(stable and min_re > 0.0), min_re, float(omega[idx]))


def log_gain_integral(
    h: TransferOperator,
    quad_points: int = DEFAULT_QUAD_POINTS,
    check_stability: bool = True,
) -> float:
    """Integral of log-magnitude over (0, pi) by midpoint quadrature.

    When numerator and denominator both have all zeros strictly inside the
    unit circle this vanishes (Jensen's formula): the filter's average gain
    over the half band is 0 dB. With the default 4096 points the result is
    below 1e-3 in magnitude for such inputs. ``check_stability=False``
    skips the precondition and integrates whatever was passed in.
    """
    if quad_points < 1:
        raise ValueError("quad_points must be positive")
    if check_stability:
        if not roots_inside_unit_circle(h.numerator):
            raise ValueError("numerator has zeros on or outside the unit circle")
        if not roots_inside_unit_circle(h.denominator):
            raise ValueError("denominator has zeros on or outside the unit circle")
    step = math.pi / quad_points
    omega = (np.arange(quad_points) + 0.5) * step
    mag = np.abs(h.response_at(np.exp(-1j * omega)))
    return float(np.sum(np.log(mag)) * step)


def arima2_spr_closed_form(c1: float, c2: float, d1p: float) -> bool:
    """Closed-form SPR verdict for ``(1 + c1 q^-1 + c2 q^-2)/(1 - d1p q^-1)``.

    On the unit circle the real part is the quadratic
    ``2 c2 x^2 + (c1 - d1p (1 + c2)) x + (1 - c1 d1p - c2)`` in
    ``x = cos(omega)``. For ``c2 <= 0`` its minimum over [-1, 1] sits at an
    endpoint, giving the band ``-1 - c2 < c1 < 1 + c2``; for ``c2 > 0`` the
    interior vertex adds a bound of ``d1p - 3 d1p c2 +/- 2 s`` with
    ``s = sqrt(2 (c2 - c2^2)(1 - d1p^2))``, active exactly when the vertex
    lies inside the circle arc (the guard below). Region boundaries count
    as not SPR (the condition is open), and the verdict is False outright
    when the pole or the numerator zeros are not strictly inside the unit
    circle.
    """
    if not abs(d1p) < 1.0:
        return False
    if not roots_inside_unit_circle(Polynomial((1.0, c1, c2))):
        return False
    if c2 <= 0.0:
        return -1.0 - c2 < c1 < 1.0 + c2
    s = math.sqrt(2.0 * (c2 - c2 * c2) * (1.0 - d1p * d1p))
    if 2.0 * c2 * (d1p - 1.0) < s < 2.0 * c2 * (d1p + 1.0):
        upper = d1p - 3.0 * d1p * c2 + 2.0 * s
    else:
        upper = 1.0 + c2
    if 2.0 * c2 * (d1p - 1.0) < -s < 2.0 * c2 * (d1p + 1.0):
        lower = d1p - 3.0 * d1p * c2 - 2.0 * s
    else:
        lower = -1.0 - c2
    return lower < c1 < upper


def grid_axis(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive uniform axis for region grids."""
    if step <= 0:
        raise ValueError("step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def spr_region_grid(d1p: float, c1_range, c2_range):
    """Closed-form SPR verdict per cell of a (c1, c2) grid.

    ``c1_range`` and ``c2_range`` are ``(start, stop, step)`` triples.
    Returns ``(c1_values, c2_values, flags)`` with ``flags[i, j]`` the
    verdict at ``(c1_values[i], c2_values[j])``.
    """
    c1_values = grid_axis(*c1_range)
    c2_values = grid_axis(*c2_range)
    flags = np.empty((c1_values.size, c2_values.size), dtype=bool)
    for i, c1 in enumerate(c1_values):
        for j, c2 in enumerate(c2_values):
            flags[i, j] = arima2_spr_closed_form(float(c1), float(c2), d1p)
    return c1_values, c2_values, flags


def is_pr_unit_pole(
    h: TransferOperator,
    grid_size: int = DEFAULT_SPR_GRID,
    tol: float = PR_TOL,
) -> PrVerdict:
    """Positive-realness test for an operator with a simple pole at z = 1.

    The unit-circle factor is deflated from the denominator symbolically;
    the remaining denominator must be strictly stable. The operator is PR
    iff the real part stays above ``-tol`` on the punctured grid
    ``omega in (pi/grid_size, pi]`` and the residue of the pole at z = 1
    is positive.
    """
    a = np.asarray(h.denominator.coeffs, dtype=float)
    if abs(a.sum()) > 1e-9 * np.abs(a).sum():
        raise ValueError("denominator has no root at z = 1")
    # synthetic division by (1 - q^-1): quotient coefficients are prefix sums
    quotient = Polynomial(tuple(np.cumsum(a[:-1]))) if a.size > 1 else Polynomial((1.0,))
    if not roots_inside_unit_circle(quotient):
        raise ValueError("unit pole is not simple or remaining denominator is unstable")
    residue = float(h.numerator(1.0)) / float(quotient(1.0))
    omega = np.linspace(np.pi / grid_size, np.pi, int(grid_size))
    re = np.real(h.response_at(np.exp(-1j * omega)))
    min_re = float(re.min())
    residue_positive = residue > 0.0
    return PrVerdict(bool(min_re >= -tol and residue_positive), min_re, residue_positive)


def bode_points(h: TransferOperator, grid_size: int, sample_rate_hz: float):
    """Gain (dB) and phase (deg) versus frequency for CSV export.

    Returns ``(freq_hz, omega_rad, gain_db, phase_deg)`` on a uniform grid
    over [0, pi] (0 to half the sample rate).
    """
    omega = np.linspace(0.0, np.pi, int(grid_size))
    resp = h.response_at(np.exp(-1j * omega))
    freq = omega * (sample_rate_hz / (2.0 * np.pi))
    gain_db = 20.0 * np.log10(np.abs(resp))
    phase_deg = np.degrees(np.angle(resp))
    return freq, omega, gain_db, phase_deg


def ratio_transfer(g: TransferOperator, g_model: TransferOperator) -> TransferOperator:
    """The operator ``g / g_model`` with a monic denominator."""
    num = poly_mul(g.numerator, g_model.denominator)
    den = poly_mul(g.denominator, g_model.numerator)
    return TransferOperator.normalized(num, den)
