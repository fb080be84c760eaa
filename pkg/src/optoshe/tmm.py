"""2x2 transfer matrices for a layered stack between two vacuum half-spaces.

Every function broadcasts over numpy arrays of angle and permittivity, so a
full (theta, detuning) grid can be evaluated in one call. Matrices are
returned as a tuple ``(m11, m12, m21, m22)`` of arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import numpy as np

from .errors import DegenerateDenominator, DegenerateLayer
from .params import SystemParams

TE, TM = "TE", "TM"
FLOOR = 1e-30


@dataclass(frozen=True)
class Layer:
    eps: complex
    d: float

    def __post_init__(self):
        if self.d < 0:
            raise ValueError(f"layer thickness must be >= 0, got {self.d}")


@dataclass(frozen=True)
class LayerStack:
    ambient_eps: float
    layers: tuple[Layer, ...]

    def __post_init__(self):
        if self.ambient_eps < 1:
            raise ValueError("ambient permittivity must be >= 1")
        object.__setattr__(self, "layers", tuple(self.layers))

    def reversed(self) -> "LayerStack":
        return replace(self, layers=self.layers[::-1])


@dataclass(frozen=True)
class ReflectionPair:
    r_s: complex
    r_p: complex
    theta: float
    k: float


def cavity_stack(p: SystemParams, eps2) -> LayerStack:
    """Front wall, intracavity medium (permittivity ``eps2``), back wall."""
    return LayerStack(
        p.eps_ambient,
        (Layer(p.eps_wall1, p.d1), Layer(eps2, p.d2), Layer(p.eps_wall3, p.d3)),
    )


def vacuum_wavenumber(p: SystemParams) -> float:
    return 2.0 * np.pi / p.wavelength


def kz(eps, theta, k):
    """z wavevector component on the branch with Im(kz) >= 0."""
    eps = np.asarray(eps, dtype=complex)
    s = np.sin(theta)
    out = np.sqrt(eps * k**2 - k**2 * s**2)
    # numpy's principal sqrt has Re >= 0; flip where that left Im < 0
    out = np.where(out.imag < 0, -out, out)
    return out if out.ndim else complex(out)


def _admittance(eps, kz_, pol):
    if pol == TE:
        return kz_
    if pol == TM:
        return kz_ / eps
    raise ValueError(f"polarization must be TE or TM, got {pol!r}")


def layer_matrix(layer: Layer, theta, k, pol, strict: bool = True):
    """[[cos, i sin/q], [i q sin, cos]] of one layer.

    With ``strict=False`` degenerate points come back as nan instead of raising.
    """
    kzi = kz(layer.eps, theta, k)
    q = _admittance(np.asarray(layer.eps, dtype=complex), kzi, pol)
    bad = np.abs(q) < FLOOR
    if np.any(bad):
        if strict:
            raise DegenerateLayer(f"layer admittance vanishes (eps={layer.eps}, pol={pol})")
        q = np.where(bad, np.nan, q)
    phase = kzi * layer.d
    c, s = np.cos(phase), np.sin(phase)
    with np.errstate(invalid="ignore", divide="ignore"):
        return c, 1j * s / q, 1j * q * s, c


def matmul(a, b):
    a11, a12, a21, a22 = a
    b11, b12, b21, b22 = b
    return (
        a11 * b11 + a12 * b21,
        a11 * b12 + a12 * b22,
        a21 * b11 + a22 * b21,
        a21 * b12 + a22 * b22,
    )


def det(m):
    return m[0] * m[3] - m[1] * m[2]


def stack_matrix(stack: LayerStack, theta, k, pol, strict: bool = True):
    """Ordered product M_1 M_2 ... with the first-hit layer leftmost."""
    total = None
    for layer in stack.layers:
        m = layer_matrix(layer, theta, k, pol, strict)
        total = m if total is None else matmul(total, m)
    if total is None:
        one = np.ones_like(np.asarray(theta, dtype=complex))
        return one, 0 * one, 0 * one, one
    return total


def reflection(stack: LayerStack, theta, k, pol, strict: bool = True):
    """Reflection coefficient with vacuum-like ambient on both sides.

    TE uses the admittance q = kz, TM uses p = kz / eps for every layer and
    for the ambient. With the +i sign of ``layer_matrix`` this quotient treats
    the rightmost factor as the entry side, so the product is taken over the
    reversed stack to keep layer 1 the first layer hit by the beam.
    """
    m11, m12, m21, m22 = stack_matrix(stack.reversed(), theta, k, pol, strict)
    eps0 = stack.ambient_eps
    q0 = _admittance(eps0, kz(eps0, theta, k), pol)
    num = q0 * (m22 - m11) - (q0**2 * m12 - m21)
    den = q0 * (m22 + m11) - (q0**2 * m12 + m21)
    bad = np.abs(den) < FLOOR
    if np.any(bad):
        if strict:
            raise DegenerateDenominator("reflection denominator vanishes")
        den = np.where(bad, np.nan, den)
    r = num / den
    return r if np.ndim(r) else complex(r)


def reflection_pair(stack: LayerStack, theta: float, k: float) -> ReflectionPair:
    return ReflectionPair(reflection(stack, theta, k, TE), reflection(stack, theta, k, TM), theta, k)
