import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from oracles import gaussian_centroid_brute
from optoshe import BeamSpec, DegenerateInput, QuadratureNonConvergence, StepCollision, centroid_oracle, shift_closed_form
from optoshe.spinhall import beam_from_params, delta_plus, literal_shift, oracle_at, richardson_derivative, shift_at

LAM = 1064e-9
BEAM = BeamSpec(60 * LAM, 2 * math.pi / LAM * math.sqrt(2.22), LAM)

cplx = st.builds(complex, st.floats(-1, 1), st.floats(-1, 1))
big = st.builds(complex, st.floats(-50, 50), st.floats(-50, 50))
theta = st.floats(0.01, math.pi / 2 - 0.01)


def test_beam_defaults(defaults):
    b = beam_from_params(defaults)
    assert b.waist == pytest.approx(60 * defaults.wavelength)
    assert b.k1 == pytest.approx(2 * math.pi / defaults.wavelength * math.sqrt(2.22))
    assert b.derivative_scale == pytest.approx(math.pi / 180)


def test_vacuum_k1_mode(defaults):
    from dataclasses import replace

    b = beam_from_params(replace(defaults, k1_mode="vacuum"))
    assert b.k1 == pytest.approx(2 * math.pi / defaults.wavelength)


@settings(max_examples=300, deadline=None)
@given(cplx, cplx, big, theta)
def test_antisymmetry_exact(rs, rp, drp, th):
    try:
        r = shift_closed_form(rs, rp, drp, th, BEAM)
    except DegenerateInput:
        assume(False)
    assert r.delta_minus == -r.delta_plus


def test_universal_bound_random():
    rng = np.random.default_rng(7)
    n = 10_000
    rs = rng.normal(size=n) + 1j * rng.normal(size=n)
    rp = (rng.normal(size=n) + 1j * rng.normal(size=n)) * 10.0 ** rng.uniform(-8, 0, n)
    drp = (rng.normal(size=n) + 1j * rng.normal(size=n)) * 10.0 ** rng.uniform(-3, 3, n)
    th = rng.uniform(0.01, math.pi / 2 - 0.01, n)
    d = delta_plus(rs, rp, drp, th, BEAM)
    assert np.all(np.isfinite(d))
    assert np.max(np.abs(d)) <= 30.0 * (1 + 1e-12)


def test_bound_is_attained():
    # |rp| tuned so that k1 w0 |rp| = |(rp+rs) cot| with drp = 0 gives exactly w0/2
    th = math.radians(56)
    cot = 1 / math.tan(th)
    kw = BEAM.k1 * BEAM.waist
    rp = 1e-4
    rs = kw * rp / cot - rp
    assert abs(delta_plus(rs, rp, 0.0, th, BEAM)) == pytest.approx(30.0, rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(cplx, cplx, big, theta)
def test_stable_equals_literal(rs, rp, drp, th):
    assume(abs(rp) > 1e-6)
    stable = shift_closed_form(rs, rp, drp, th, BEAM).delta_plus
    lit = literal_shift(rs, rp, drp, th, BEAM)
    assert abs(stable - lit) <= 1e-10 * max(1.0, abs(lit))


def test_finite_at_zero_rp():
    r = shift_closed_form(-0.3, 0.0, 0.5 + 0.2j, 0.98, BEAM)
    assert r.delta_plus == 0.0
    assert r.ratio_sp == math.inf


def test_degenerate_input():
    with pytest.raises(DegenerateInput):
        shift_closed_form(0.5, 0.0, 0.0, 0.9, BEAM)


def test_rp_equals_minus_rs_gives_zero():
    r = shift_closed_form(0.4 - 0.1j, -0.4 + 0.1j, 0.3, 0.9, BEAM)
    assert r.delta_plus == 0.0


def test_radian_unit_shrinks_derivative_weight():
    rad = BeamSpec(BEAM.waist, BEAM.k1, LAM, angle_unit="rad")
    args = (-0.3, 2e-5, 1.0, math.radians(56))
    assert abs(shift_closed_form(*args, rad).delta_plus) < abs(shift_closed_form(*args, BEAM).delta_plus)


def test_richardson_polynomial_exact():
    v, err = richardson_derivative(lambda t: t**3 - 2 * t, 0.7)
    assert v == pytest.approx(3 * 0.49 - 2, rel=1e-9)
    assert err < 1e-6


def test_richardson_complex():
    v, _ = richardson_derivative(lambda t: np.exp(1j * 5 * t), 1.0)
    assert v == pytest.approx(5j * cmath.exp(5j), rel=1e-8)


def test_step_collision():
    with pytest.raises(StepCollision):
        richardson_derivative(np.sin, 1e-6)
    with pytest.raises(StepCollision):
        richardson_derivative(np.sin, math.pi / 2 - 1.5e-6)


def test_vectorized_delta_matches_scalar():
    rng = np.random.default_rng(3)
    rs = rng.normal(size=20) + 1j * rng.normal(size=20)
    rp = rng.normal(size=20) * 1e-3 + 1j * rng.normal(size=20) * 1e-3
    drp = rng.normal(size=20) + 1j * rng.normal(size=20)
    th = rng.uniform(0.2, 1.3, 20)
    arr = delta_plus(rs, rp, drp, th, BEAM)
    for i in range(20):
        # array tan may differ from the scalar one in the last ulp
        assert arr[i] == pytest.approx(shift_closed_form(rs[i], rp[i], drp[i], th[i], BEAM).delta_plus, rel=1e-14)


def test_delta_plus_nan_on_zero_denominator():
    assert math.isnan(delta_plus(0.0, 0.0, 0.0, 0.9, BEAM))


# -- centroid oracle --------------------------------------------------------


@pytest.mark.parametrize(
    "rs, rp, drp, th",
    [(-0.4, 0.02 + 0.01j, 0.3j, 0.9), (-0.35 + 0.05j, 3e-4, 2.0 - 1j, 0.98), (0.2, -0.1, 0.0, 0.6)],
)
def test_oracle_matches_closed_form(rs, rp, drp, th):
    closed = shift_closed_form(rs, rp, drp, th, BEAM).delta_plus
    orc = centroid_oracle(rs, rp, drp, th, BEAM)
    assert orc.converged
    assert orc.delta_plus == pytest.approx(closed, rel=1e-6, abs=1e-9)
    assert orc.delta_minus == pytest.approx(-closed, rel=1e-6, abs=1e-9)


def test_oracle_matches_brute_force():
    rs, rp, drp, th = -0.35 + 0.05j, 3e-4, 2.0 - 1j, 0.98
    orc = centroid_oracle(rs, rp, drp, th, BEAM)
    brute = gaussian_centroid_brute(rs, rp, drp * math.pi / 180, th, BEAM.k1, BEAM.waist) / LAM
    assert orc.delta_plus == pytest.approx(brute, rel=1e-4)


def test_oracle_orientation_flip():
    a = centroid_oracle(-0.4, 0.02, 0.3j, 0.9, BEAM)
    b = centroid_oracle(-0.4, 0.02, 0.3j, 0.9, BEAM, flip_y=True)
    assert b.delta_plus == pytest.approx(-a.delta_plus, rel=1e-12)


def test_oracle_grid_guards():
    with pytest.raises(ValueError):
        centroid_oracle(-0.4, 0.02, 0.3j, 0.9, BEAM, n=256)
    with pytest.raises(ValueError):
        centroid_oracle(-0.4, 0.02, 0.3j, 0.9, BEAM, half_width=2.0)


def test_oracle_nonconvergence_reported():
    # a beam sampled far too coarsely (waist much smaller than the grid step) cannot converge
    tiny = BeamSpec(LAM, 2 * math.pi / LAM, LAM)
    with pytest.raises(QuadratureNonConvergence) as exc:
        centroid_oracle(-0.4, 0.02, 0.3j, 0.9, tiny, n=512, half_width=400.0)
    assert exc.value.coarse != exc.value.fine


def test_oracle_on_cavity(defaults):
    from optoshe import probe_response

    eps2 = probe_response(defaults, 0.0).eps2
    orc, closed = oracle_at(defaults, eps2, math.radians(52))
    assert orc.delta_plus == pytest.approx(closed.delta_plus, rel=1e-4)


def test_shift_at_bounded(defaults):
    r = shift_at(defaults, 1.0 + 0.0j, math.radians(56.132))
    assert abs(r.delta_plus) <= 30.0
