"""Angle/detuning sweeps and the landmark finders used on their output."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import optomech, spinhall, tmm
from .errors import ConfigError, DegenerateDenominator, FlatCurve, NoUnimodalMinimum, SweepFailure
from .params import SystemParams

MAX_FAIL_FRACTION = 1e-3
BREWSTER_XTOL_DEG = 1e-4
# columns whose lobes both exceed this fraction of w0/(2 lambda) count as sign flips
FLIP_FRACTION = 1.0 / 3.0
WINDOW_THRESHOLD = 0.1
WINDOW_MERGE = 1e-3


@dataclass(frozen=True)
class SweepSpec:
    theta_grid: tuple[float, float, int] = (50.0, 65.0, 601)  # deg
    dp_grid: tuple[float, float, int] = (-0.1, 0.1, 401)  # units of omega_b
    # in units of g_mc; None keeps the value from the params
    gcp: float | None = None
    lk: float | None = None

    def __post_init__(self):
        for name in ("theta_grid", "dp_grid"):
            lo, hi, n = getattr(self, name)
            if int(n) != n or n < 1:
                raise ConfigError(name, f"{name}: count must be a positive integer")
            if n == 1 and lo != hi:
                raise ConfigError(name, f"{name}: a single point needs min == max")
            if n >= 2 and not lo < hi:
                raise ConfigError(name, f"{name}: need min < max")
            object.__setattr__(self, name, (float(lo), float(hi), int(n)))
        lo, hi, _ = self.theta_grid
        if not (0.0 < lo and hi < 90.0):
            raise ConfigError("theta_grid", "theta range must lie inside (0, 90) degrees")
        for name in ("gcp", "lk"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(name, f"{name} must be non-negative")

    @property
    def thetas_deg(self) -> np.ndarray:
        return np.linspace(*self.theta_grid)

    @property
    def dps(self) -> np.ndarray:
        return np.linspace(*self.dp_grid)

    def apply(self, p: SystemParams) -> SystemParams:
        return p.with_couplings(self.gcp, self.lk)

    def to_dict(self) -> dict:
        return {"theta_grid": list(self.theta_grid), "dp_grid": list(self.dp_grid), "gcp": self.gcp, "lk": self.lk}


@dataclass
class SweepResult:
    thetas_deg: np.ndarray
    dps: np.ndarray
    values: np.ndarray  # delta_plus / lambda, shape (n_theta, n_dp)
    eps2: np.ndarray
    absorption: np.ndarray  # Re E_out per column
    abs_rp: np.ndarray
    brewster_deg: list  # per column, None where |r_p| has no interior minimum
    extrema: list  # per column {"max": (theta, value), "min": (theta, value)} or None
    asymmetry: list
    failures: list = field(default_factory=list)

    @property
    def shape(self):
        return self.values.shape


# -- vectorized core --------------------------------------------------------


def shift_grid(p: SystemParams, eps2, thetas_rad, beam: spinhall.BeamSpec | None = None):
    """delta_plus/lambda, r_s, r_p on the broadcast grid thetas_rad x eps2."""
    beam = beam or spinhall.beam_from_params(p)
    k = tmm.vacuum_wavenumber(p)
    stack = tmm.cavity_stack(p, np.asarray(eps2, dtype=complex))
    with np.errstate(invalid="ignore", divide="ignore"):
        rs = tmm.reflection(stack, thetas_rad, k, tmm.TE, strict=False)
        rp = tmm.reflection(stack, thetas_rad, k, tmm.TM, strict=False)
        drp, _ = spinhall.richardson_derivative(
            lambda t: tmm.reflection(stack, t, k, tmm.TM, strict=False), thetas_rad
        )
        delta = spinhall.delta_plus(rs, rp, drp, thetas_rad, beam)
    return delta, rs, rp


def shift_curve(p: SystemParams, dp: float, thetas_deg, eps2: complex | None = None):
    """One detuning column: (delta_plus/lambda, r_s, r_p) over ``thetas_deg``."""
    if eps2 is None:
        eps2 = optomech.probe_response(p, dp).eps2
    th = np.radians(np.asarray(thetas_deg, dtype=float))
    return shift_grid(p, eps2, th)


def _column_block(p, thetas_rad, eps2_block, beam):
    delta, _, rp = shift_grid(p, eps2_block[None, :], thetas_rad[:, None], beam)
    return delta, np.abs(rp)


def run_map(
    p: SystemParams, spec: SweepSpec, workers: int | None = None, block: int | None = None, refine: str = "exact"
) -> SweepResult:
    """delta_plus over the (theta, dp) grid of ``spec``.

    The optomechanical response is evaluated once per detuning column; the
    reflection/shift work is split into column blocks that may run on a
    thread pool. Elementwise evaluation makes the result independent of the
    partitioning. ``refine`` selects how per-column extrema are polished:
    "exact" re-evaluates the shift, "parabolic" interpolates the grid.
    """
    if refine not in ("exact", "parabolic"):
        raise ValueError(f"unknown refine mode {refine!r}")
    p = spec.apply(p)
    thetas_deg, dps = spec.thetas_deg, spec.dps
    thetas = np.radians(thetas_deg)
    steady = optomech.solve_steady_state(p)
    n_th, n_dp = thetas.size, dps.size

    eps2 = np.full(n_dp, np.nan + 0j)
    absorption = np.full(n_dp, np.nan)
    failures: list = []
    for j, dp in enumerate(dps):
        try:
            resp = optomech.probe_response(p, float(dp), steady)
        except DegenerateDenominator as exc:
            failures.extend((i, j, str(exc)) for i in range(n_th))
            continue
        eps2[j] = resp.eps2
        absorption[j] = resp.e_out.real

    beam = spinhall.beam_from_params(p)
    block = block or max(1, math.ceil(n_dp / (workers or 1)))
    slices = [slice(s, min(s + block, n_dp)) for s in range(0, n_dp, block)]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda sl: _column_block(p, thetas, eps2[sl], beam), slices))
    else:
        parts = [_column_block(p, thetas, eps2[sl], beam) for sl in slices]
    values = np.concatenate([d for d, _ in parts], axis=1)
    abs_rp = np.concatenate([a for _, a in parts], axis=1)

    failed_cols = {j for _, j, _ in failures}
    for i, j in zip(*np.nonzero(~np.isfinite(values))):
        if j not in failed_cols:
            failures.append((int(i), int(j), "non-finite shift"))
    if len(failures) > MAX_FAIL_FRACTION * values.size:
        raise SweepFailure(f"{len(failures)} of {values.size} grid points failed", failures)

    brewster, extrema, asym = [], [], []
    for j in range(n_dp):
        brewster.append(_column_brewster(p, eps2[j], thetas_deg, abs_rp[:, j]))
        col = values[:, j]
        try:
            f = curve_function(p, eps2[j]) if refine == "exact" else None
            extrema.append(find_shift_extrema(thetas_deg, col, f))
        except (FlatCurve, ValueError):
            extrema.append(None)
        asym.append(asymmetry(col))
    return SweepResult(thetas_deg, dps, values, eps2, absorption, abs_rp, brewster, extrema, asym, failures)


# -- Brewster angle ---------------------------------------------------------


def _golden_min(f, lo: float, mid: float, hi: float) -> float:
    res = minimize_scalar(f, bracket=(lo, mid, hi), method="golden", options={"xtol": BREWSTER_XTOL_DEG / 180.0})
    return float(res.x)


def brewster_angle(stack: tmm.LayerStack, k: float, bracket=(50.0, 65.0), scan: int = 301) -> float:
    """Angle (deg) of the |r_p| minimum inside ``bracket``.

    A coarse scan must show exactly one interior local minimum; the minimum is
    then polished by golden-section search.
    """
    lo, hi = bracket
    grid = np.linspace(lo, hi, scan)
    vals = np.abs(tmm.reflection(stack, np.radians(grid), k, tmm.TM))
    if np.ptp(vals) <= 1e-12 * max(np.max(vals), 1e-300):
        raise NoUnimodalMinimum("|r_p| is flat over the bracket")
    interior = np.nonzero((vals[1:-1] < vals[:-2]) & (vals[1:-1] <= vals[2:]))[0] + 1
    if len(interior) != 1:
        raise NoUnimodalMinimum(f"coarse scan found {len(interior)} interior minima of |r_p| in {bracket}")
    i = int(interior[0])

    def f(t):
        return abs(tmm.reflection(stack, math.radians(t), k, tmm.TM))

    return _golden_min(f, grid[i - 1], grid[i], grid[i + 1])


def find_brewster(p: SystemParams, dp: float, bracket=(50.0, 65.0)) -> float:
    eps2 = optomech.probe_response(p, dp).eps2
    return brewster_angle(tmm.cavity_stack(p, eps2), tmm.vacuum_wavenumber(p), bracket)


def _column_brewster(p, eps2, thetas_deg, abs_rp):
    if not np.all(np.isfinite(abs_rp)) or thetas_deg.size < 3:
        return None
    i = int(np.argmin(abs_rp))
    if i == 0 or i == thetas_deg.size - 1:
        return None
    stack = tmm.cavity_stack(p, eps2)
    k = tmm.vacuum_wavenumber(p)
    return _golden_min(
        lambda t: abs(tmm.reflection(stack, math.radians(t), k, tmm.TM)),
        thetas_deg[i - 1],
        thetas_deg[i],
        thetas_deg[i + 1],
    )


# -- curve landmarks --------------------------------------------------------


def _parabolic(x, y, i):
    """Vertex of the parabola through points i-1, i, i+1 (uniform or not)."""
    if i <= 0 or i >= len(x) - 1:
        return float(x[i]), float(y[i])
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den
    b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / den
    if a == 0:
        return float(x1), float(y1)
    xv = -b / (2 * a)
    if not x0 <= xv <= x2:
        return float(x1), float(y1)
    c = y1 - a * x1**2 - b * x1
    return float(xv), float(a * xv**2 + b * xv + c)


def _bounded(f, x, y, i, sign):
    if i <= 0 or i >= len(x) - 1:
        return float(x[i]), float(y[i])
    res = minimize_scalar(lambda t: -sign * f(t), bounds=(x[i - 1], x[i + 1]), method="bounded", options={"xatol": 1e-6})
    val = sign * -res.fun
    if sign * val < sign * y[i]:
        return float(x[i]), float(y[i])
    return float(res.x), float(val)


def find_shift_extrema(thetas_deg, values, f=None) -> dict:
    """Grid max/min of a shift curve.

    Each grid extremum is refined by a 3-point parabolic fit, or, when the
    curve itself ``f(theta_deg)`` is supplied, by a bounded scalar search
    between its grid neighbours. The parabola overshoots on lobes only a few
    grid steps wide, which is the situation next to the Brewster angle.
    """
    x = np.asarray(thetas_deg, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.size != y.size or x.size == 0:
        raise ValueError("curve and grid sizes differ")
    if not np.all(np.isfinite(y)):
        raise ValueError("curve contains non-finite values")
    if np.sum(np.abs(np.diff(y))) < 1e-9:
        raise FlatCurve("total variation below 1e-9")
    imax, imin = int(np.argmax(y)), int(np.argmin(y))
    if f is None:
        return {"max": _parabolic(x, y, imax), "min": _parabolic(x, y, imin)}
    return {"max": _bounded(f, x, y, imax, 1.0), "min": _bounded(f, x, y, imin, -1.0)}


def curve_function(p: SystemParams, eps2: complex):
    """Scalar delta_plus/lambda as a function of angle in degrees."""
    beam = spinhall.beam_from_params(p)

    def f(theta_deg):
        d, _, _ = shift_grid(p, eps2, math.radians(theta_deg), beam)
        return float(d)

    return f


def dominant_extremum(ext: dict) -> tuple[float, float]:
    """The larger-magnitude of the two extrema."""
    mx, mn = ext["max"], ext["min"]
    return mx if abs(mx[1]) >= abs(mn[1]) else mn


def asymmetry(values) -> float:
    """Peak negative over peak positive delta_plus; > 1 when the negative lobe dominates."""
    v = np.asarray(values, dtype=float)
    if not np.any(np.isfinite(v)):
        return math.nan
    pos = float(np.nanmax(v))
    neg = float(-np.nanmin(v))
    if pos <= 0:
        return math.inf if neg > 0 else math.nan
    return max(neg, 0.0) / pos


def find_transparency_windows(dps, absorption, threshold: float = WINDOW_THRESHOLD, merge: float = WINDOW_MERGE) -> list[float]:
    """Centers of local absorption minima that fall below ``threshold`` x max.

    Minima closer than ``merge`` (units of omega_b) are merged, keeping the deeper one.
    """
    x = np.asarray(dps, dtype=float)
    y = np.asarray(absorption, dtype=float)
    if x.size < 3:
        return []
    limit = threshold * np.nanmax(y)
    idx = [i for i in range(1, x.size - 1) if y[i] < y[i - 1] and y[i] <= y[i + 1] and y[i] < limit]
    found: list[tuple[float, float]] = []
    for i in idx:
        xc, yc = _parabolic(x, y, i)
        if found and xc - found[-1][0] < merge:
            if yc < found[-1][1]:
                found[-1] = (xc, yc)
            continue
        found.append((xc, yc))
    return [c for c, _ in found]


def window_width(p: SystemParams, center: float = 0.0, span: float = 0.1, points: int = 2001, max_span: float = 10.0) -> float:
    """Full width at half depth of the absorption window at ``center``.

    The depth is measured from the window bottom to the lower of the two
    flanking absorption maxima. The detuning span is doubled until both
    maxima fall strictly inside the evaluated range.
    """
    steady = optomech.solve_steady_state(p)
    while span <= max_span:
        x = np.linspace(center - span, center + span, points)
        y = optomech.chi_array(p, x, steady).real
        i0 = int(np.argmin(np.abs(x - center)))
        left = i0
        while left > 0 and y[left - 1] >= y[left]:
            left -= 1
        right = i0
        while right < points - 1 and y[right + 1] >= y[right]:
            right += 1
        if left > 0 and right < points - 1:
            # walk the bottom down to the true local minimum
            i = i0
            while i > left and y[i - 1] < y[i]:
                i -= 1
            while i < right and y[i + 1] < y[i]:
                i += 1
            half = y[i] + 0.5 * (min(y[left], y[right]) - y[i])
            a = i
            while y[a - 1] < half:
                a -= 1
            b = i
            while y[b + 1] < half:
                b += 1
            xl = x[a] + (half - y[a]) * (x[a - 1] - x[a]) / (y[a - 1] - y[a])
            xr = x[b] + (half - y[b]) * (x[b + 1] - x[b]) / (y[b + 1] - y[b])
            return float(xr - xl)
        span *= 2
    raise ValueError(f"no bounded absorption window around {center} within span {max_span}")


def sign_flip_bands(dps, values, absorption, waist_over_lambda: float, fraction: float = FLIP_FRACTION, threshold: float = WINDOW_THRESHOLD) -> list[dict]:
    """Detuning bands where delta_plus flips between strong lobes of both signs.

    A column qualifies when its positive and negative peaks both exceed
    ``fraction * w0 / (2 lambda)`` and its absorption is below ``threshold``
    times the largest absorption on the grid (a transparency column).
    """
    v = np.asarray(values, dtype=float)
    a = np.asarray(absorption, dtype=float)
    x = np.asarray(dps, dtype=float)
    level = fraction * waist_over_lambda / 2.0
    with np.errstate(invalid="ignore"):
        strong = (np.nanmax(v, axis=0) >= level) & (-np.nanmin(v, axis=0) >= level)
        flip = strong & (a < threshold * np.nanmax(a))
    bands = []
    j = 0
    while j < x.size:
        if flip[j]:
            k = j
            while k + 1 < x.size and flip[k + 1]:
                k += 1
            bands.append({"start": float(x[j]), "end": float(x[k]), "center": float(0.5 * (x[j] + x[k]))})
            j = k + 1
        else:
            j += 1
    return bands
