"""Spin-dependent transverse shifts of the reflected Gaussian probe beam.

The closed form is evaluated multiplied through by |r_p|^2 so it stays finite
at the Brewster angle:

    delta_pm = -/+ k1 w0^2 Re[conj(rp)(rp + rs)] cot(theta)
               / (k1^2 w0^2 |rp|^2 + |drp|^2 + |(rp + rs) cot(theta)|^2)

``centroid_oracle`` recomputes the same quantity from the reflected field
profile by 2-D quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tmm
from .errors import DegenerateInput, QuadratureNonConvergence, StepCollision
from .params import SystemParams

DEFAULT_STEP = 1e-6


@dataclass(frozen=True)
class BeamSpec:
    waist: float  # m
    k1: float  # 1/m
    wavelength: float  # m, unit for reported shifts
    # angle unit of the d r_p / d theta term in the shift denominator
    angle_unit: str = "deg"
    plane: str = "waist"

    def __post_init__(self):
        if not self.waist > 0:
            raise ValueError("beam waist must be positive")
        if self.angle_unit not in ("deg", "rad"):
            raise ValueError(f"angle_unit must be 'deg' or 'rad', got {self.angle_unit!r}")
        if self.plane != "waist":
            raise ValueError("only the waist plane is supported")

    @property
    def derivative_scale(self) -> float:
        return math.pi / 180.0 if self.angle_unit == "deg" else 1.0


@dataclass(frozen=True)
class ShiftResult:
    delta_plus: float  # units of wavelength
    delta_minus: float
    theta: float  # rad
    ratio_sp: float
    dlnrp_dtheta: complex  # per angle_unit of the beam


def beam_from_params(p: SystemParams) -> BeamSpec:
    k = 2.0 * math.pi / p.wavelength
    k1 = math.sqrt(p.eps_wall1) * k if p.k1_mode == "wall" else k
    return BeamSpec(p.waist, k1, p.wavelength, p.derivative_angle_unit)


def _stable_quotient(rs, rp, drp, theta, beam: BeamSpec):
    kw = beam.k1 * beam.waist
    s = rp + rs
    cot = 1.0 / np.tan(theta)
    d = drp * beam.derivative_scale
    num = beam.k1 * beam.waist**2 * np.real(np.conj(rp) * s) * cot
    den = kw**2 * np.abs(rp) ** 2 + np.abs(d) ** 2 + np.abs(s * cot) ** 2
    return num, den


def delta_plus(rs, rp, drp, theta, beam: BeamSpec):
    """Array form of the spin-+ shift in units of wavelength.

    Points where the denominator vanishes (r_p = dr_p = r_s + r_p = 0) give nan.
    """
    num, den = _stable_quotient(rs, rp, drp, theta, beam)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, -num / np.where(den > 0, den, 1.0), np.nan)
    return out / beam.wavelength


def shift_closed_form(rs: complex, rp: complex, drp: complex, theta: float, beam: BeamSpec) -> ShiftResult:
    if rp == 0 and drp == 0:
        raise DegenerateInput("r_p and its angular derivative both vanish")
    if not 0 < theta < math.pi / 2:
        raise ValueError("theta must lie in (0, pi/2)")
    num, den = _stable_quotient(rs, rp, drp, theta, beam)
    if den == 0:
        raise DegenerateInput("shift denominator vanishes")
    dp_ = float(-num / den) / beam.wavelength
    ratio = abs(rs) / abs(rp) if rp != 0 else math.inf
    dln = complex(drp * beam.derivative_scale / rp) if rp != 0 else complex("nan+nanj")
    # 0.0 - x keeps delta_minus == -delta_plus bit for bit while avoiding -0.0
    return ShiftResult(dp_, 0.0 - dp_, theta, ratio, dln)


def literal_shift(rs, rp, drp, theta, beam: BeamSpec):
    """Unrearranged quotient in terms of r_s/r_p and d ln r_p; blows up at r_p = 0."""
    ratio = 1 + rs / rp
    cot = 1.0 / np.tan(theta)
    dln = drp * beam.derivative_scale / rp
    kw = beam.k1 * beam.waist
    num = beam.k1 * beam.waist**2 * np.real(ratio) * cot
    den = kw**2 + np.abs(dln) ** 2 + np.abs(ratio * cot) ** 2
    return -num / den / beam.wavelength


# -- angular derivative -----------------------------------------------------


def richardson_derivative(f, theta, h: float = DEFAULT_STEP, lo: float = 0.0, hi: float = math.pi / 2):
    """Central difference with one Richardson level.

    Returns ``(value, error_estimate)``; the estimate is the difference between
    the extrapolated and the finer central difference.
    """
    th = np.asarray(theta, dtype=float)
    if np.any(th - 2 * h <= lo) or np.any(th + 2 * h >= hi):
        raise StepCollision(f"theta within 2h={2 * h:g} rad of the domain edge")
    d_h = (f(th + h) - f(th - h)) / (2 * h)
    d_h2 = (f(th + h / 2) - f(th - h / 2)) / h
    value = (4 * d_h2 - d_h) / 3
    err = np.abs(value - d_h2)
    if np.ndim(value) == 0:
        return complex(value), float(err)
    return value, err


def drp_dtheta(stack: tmm.LayerStack, theta, k: float, pol: str = tmm.TM, h: float = DEFAULT_STEP):
    """d r / d theta (per radian) of the stack reflection coefficient."""
    return richardson_derivative(lambda t: tmm.reflection(stack, t, k, pol), theta, h)


def shift_at(p: SystemParams, eps2: complex, theta: float, beam: BeamSpec | None = None) -> ShiftResult:
    """Full pipeline at one angle for a given intracavity permittivity."""
    beam = beam or beam_from_params(p)
    stack = tmm.cavity_stack(p, eps2)
    k = tmm.vacuum_wavenumber(p)
    rs = tmm.reflection(stack, theta, k, tmm.TE)
    rp = tmm.reflection(stack, theta, k, tmm.TM)
    drp, _ = drp_dtheta(stack, theta, k)
    return shift_closed_form(rs, rp, drp, theta, beam)


# -- centroid oracle --------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    delta_plus: float
    delta_minus: float
    coarse_plus: float
    grid_n: int
    converged: bool


def _trapezoid_weights(n: int, step: float) -> np.ndarray:
    w = np.full(n, step)
    w[0] = w[-1] = step / 2
    return w


def _centroids(rs, rp, drp, theta, beam: BeamSpec, n: int, half_width: float, flip_y: bool):
    w0, k1 = beam.waist, beam.k1
    axis = np.linspace(-half_width * w0, half_width * w0, n)
    wts = _trapezoid_weights(n, axis[1] - axis[0])
    x = axis[:, None]
    y = axis[None, :]
    orient = -1.0 if flip_y else 1.0
    d = drp * beam.derivative_scale
    env = np.exp(-(x**2 + y**2) / w0**2)
    base = rp - 2j * x / (k1 * w0**2) * d
    spin = 2 * (orient * y) / math.tan(theta) / (k1 * w0**2) * (rs + rp)
    out = []
    for sign in (-1.0, 1.0):  # E+ carries -spin, E- carries +spin
        inten = np.abs(env * (base + sign * spin)) ** 2
        wrow = inten @ wts  # integrate over y with weights, per x row
        norm = float(wts @ wrow)
        first = float(wts @ (inten @ (wts * axis)))
        out.append(first / norm / beam.wavelength)
    return out[0], out[1]


def centroid_oracle(
    rs: complex,
    rp: complex,
    drp: complex,
    theta: float,
    beam: BeamSpec,
    n: int = 512,
    half_width: float = 3.0,
    flip_y: bool = False,
    rtol: float = 0.01,
) -> OracleResult:
    """Intensity-weighted y-centroid of both circular components.

    The reflected field on the waist plane is
    exp(-(x^2+y^2)/w0^2) [rp - 2ix/(k1 w0^2) drp -/+ 2y cot/(k1 w0^2) (rs+rp)],
    integrated by the trapezoid rule on an n x n grid spanning +-half_width*w0.
    The grid is then doubled; a relative change above ``rtol`` raises
    QuadratureNonConvergence.
    """
    if n < 512:
        raise ValueError("oracle grid must be at least 512 x 512")
    if half_width < 3.0:
        raise ValueError("quadrature window must cover at least 6 waists")
    coarse, _ = _centroids(rs, rp, drp, theta, beam, n, half_width, flip_y)
    fine_p, fine_m = _centroids(rs, rp, drp, theta, beam, 2 * n, half_width, flip_y)
    scale = beam.waist / beam.wavelength
    change = abs(fine_p - coarse)
    if change > rtol * abs(fine_p) and change > 1e-12 * scale:
        raise QuadratureNonConvergence(
            f"centroid changed by {change:.3e} on grid doubling ({n} -> {2 * n})", coarse, fine_p
        )
    return OracleResult(fine_p, fine_m, coarse, n, True)


def oracle_at(p: SystemParams, eps2: complex, theta: float, n: int = 512) -> tuple[OracleResult, ShiftResult]:
    beam = beam_from_params(p)
    stack = tmm.cavity_stack(p, eps2)
    k = tmm.vacuum_wavenumber(p)
    rs = tmm.reflection(stack, theta, k, tmm.TE)
    rp = tmm.reflection(stack, theta, k, tmm.TM)
    drp, _ = drp_dtheta(stack, theta, k)
    return centroid_oracle(rs, rp, drp, theta, beam, n), shift_closed_form(rs, rp, drp, theta, beam)
