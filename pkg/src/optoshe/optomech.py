"""Linearized pump-probe response of the graphene optomechanical cavity.

The steady state is solved in SI units. The probe response is evaluated with
every rate divided by the mechanical frequency, so detunings are in units of
omega_b and the output field is an order-unity number.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateDenominator, NonConvergence
from .params import SystemParams, drive_amplitudes

STEADY_RTOL = 1e-12
MAX_ITER = 10_000
RELAXATION = 0.5
DENOM_FLOOR = 1e-30


@dataclass(frozen=True)
class SteadyState:
    photon_number: float
    effective_detuning: float  # rad/s
    iterations: int
    residual: float


@dataclass(frozen=True)
class ProbeResponse:
    detuning: float  # units of omega_b
    c_minus_over_ep: complex  # units of 1/omega_b
    e_out: complex
    chi: complex
    eps2: complex

    @property
    def absorption(self) -> float:
        return self.e_out.real

    @property
    def dispersion(self) -> float:
        return self.e_out.imag


def phonon_exciton_shift(p: SystemParams) -> complex:
    """The g_cp^2 correction subtracted from kappa + i*Delta_2 in c_s (rad/s)."""
    if p.g_cp == 0.0:
        return 0j
    ex = 1j * p.delta_ex + p.gamma_2
    den = -(2j * p.delta_n + p.gamma_1) * ex + p.lambda_k**2
    return p.g_cp**2 * ex / den


def effective_detuning(p: SystemParams, photon_number: float) -> float:
    if p.delta2_correction == "off":
        return p.delta_c
    return p.delta_c - 2.0 * p.g_mc**2 * photon_number / p.omega_b


def _photon_map(p: SystemParams, e_l: float, shift: complex, n: float) -> float:
    den = p.kappa + 1j * effective_detuning(p, n) - shift
    return e_l**2 / abs(den) ** 2


def solve_steady_state(p: SystemParams, *, rtol: float = STEADY_RTOL, max_iter: int = MAX_ITER) -> SteadyState:
    """Self-consistent intracavity photon number |c_s|^2.

    Damped fixed-point iteration on n = E_l^2 / |kappa + i Delta_2(n) - Lambda|^2
    started from the bare-cavity value. Raises NonConvergence if the relative
    residual has not dropped below ``rtol`` after ``max_iter`` steps.
    """
    e_l, _ = drive_amplitudes(p)
    if e_l == 0.0:
        return SteadyState(0.0, effective_detuning(p, 0.0), 0, 0.0)
    shift = phonon_exciton_shift(p)
    n = e_l**2 / (p.kappa**2 + p.delta_c**2)
    residual = np.inf
    for it in range(1, max_iter + 1):
        target = _photon_map(p, e_l, shift, n)
        residual = abs(target - n) / target
        if residual <= rtol:
            return SteadyState(n, effective_detuning(p, n), it, residual)
        n = (1.0 - RELAXATION) * n + RELAXATION * target
    raise NonConvergence(
        f"steady state did not converge after {max_iter} iterations (residual {residual:.3e})",
        last=n,
        residual=residual,
        iterations=max_iter,
    )


def output_prefactor(p: SystemParams) -> float:
    k = p.kappa / p.omega_b
    conv = p.output_field_convention
    if conv == "kappa":
        return k
    if conv == "sqrt2kappa":
        return float(np.sqrt(2.0 * k))
    if conv == "2kappa":
        return 2.0 * k
    raise ValueError(f"unknown output field convention {conv!r}")


def c_minus_ratio(p: SystemParams, dp, photon_number: float):
    """c_-/E_p at probe detuning ``dp`` (units of omega_b); array-friendly."""
    wb = p.omega_b
    kappa, gm, g1, g2 = p.kappa / wb, p.gamma_m / wb, p.gamma_1 / wb, p.gamma_2 / wb
    gmc, gcp, lk = p.g_mc / wb, p.g_cp / wb, p.lambda_k / wb
    dp = np.asarray(dp, dtype=float)
    a1 = kappa - 1j * dp
    a2 = gm - 1j * dp
    a3 = g1 - 1j * dp
    a4 = g2 - 1j * dp
    phonon = a3 * a4 + lk**2
    den = a2 * a4 * (a1 * a3 + gcp**2) + a1 * a2 * lk**2 + photon_number * gmc**2 * phonon
    if np.any(np.abs(den) < DENOM_FLOOR):
        raise DegenerateDenominator(f"probe response denominator below {DENOM_FLOOR:g} at dp={dp}")
    return phonon * a2 / den


def probe_response(p: SystemParams, dp: float, steady: SteadyState | None = None) -> ProbeResponse:
    if steady is None:
        steady = solve_steady_state(p)
    ratio = complex(c_minus_ratio(p, dp, steady.photon_number))
    e_out = output_prefactor(p) * ratio
    return ProbeResponse(float(dp), ratio, e_out, e_out, 1.0 + e_out)


def response_spectrum(p: SystemParams, dp_grid: Sequence[float], steady: SteadyState | None = None) -> list[ProbeResponse]:
    """Pointwise probe_response over a detuning grid.

    Failures are re-raised with the grid index prepended to the message.
    """
    if steady is None:
        steady = solve_steady_state(p)
    out = []
    for i, dp in enumerate(dp_grid):
        try:
            out.append(probe_response(p, dp, steady))
        except DegenerateDenominator as exc:
            raise DegenerateDenominator(f"grid index {i}: {exc}") from exc
    return out


def chi_array(p: SystemParams, dp_grid, steady: SteadyState | None = None) -> np.ndarray:
    """Vectorized susceptibility over a detuning array."""
    if steady is None:
        steady = solve_steady_state(p)
    return output_prefactor(p) * c_minus_ratio(p, dp_grid, steady.photon_number)
