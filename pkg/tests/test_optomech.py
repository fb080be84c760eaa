import math
from dataclasses import replace

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from oracles import bisect_photon_number
from optoshe import NonConvergence, SystemParams, drive_amplitudes, probe_response, response_spectrum, solve_steady_state
from optoshe.optomech import c_minus_ratio, chi_array, phonon_exciton_shift
from optoshe.sweep import find_transparency_windows, window_width


def test_undriven_cavity(defaults):
    ss = solve_steady_state(replace(defaults, power_pump=0.0))
    assert ss.photon_number == 0.0


def test_bare_photon_number(defaults):
    p = replace(defaults, g_mc=0.0)
    e_l, _ = drive_amplitudes(p)
    expected = e_l**2 / (p.kappa**2 + p.delta_c**2)
    ss = solve_steady_state(p)
    assert ss.photon_number == pytest.approx(expected, rel=1e-12)
    assert ss.photon_number == pytest.approx(1.1e3, rel=0.05)


def test_self_consistent_against_bisection(defaults):
    e_l, _ = drive_amplitudes(defaults)
    ref = bisect_photon_number(e_l, defaults.kappa, defaults.delta_c, 0j, defaults.g_mc, defaults.omega_b)
    ss = solve_steady_state(defaults)
    assert ss.photon_number == pytest.approx(ref, rel=1e-10)
    assert ss.residual <= 1e-12
    bare = solve_steady_state(replace(defaults, g_mc=0.0)).photon_number
    assert abs(ss.photon_number / bare - 1) < 0.05


def test_bisection_with_phonon_shift(defaults):
    p = defaults.with_couplings(20, 25)
    e_l, _ = drive_amplitudes(p)
    ref = bisect_photon_number(e_l, p.kappa, p.delta_c, phonon_exciton_shift(p), p.g_mc, p.omega_b)
    assert solve_steady_state(p).photon_number == pytest.approx(ref, rel=1e-10)


def test_correction_off_is_bare(defaults):
    p = replace(defaults, delta2_correction="off")
    assert solve_steady_state(p).photon_number == pytest.approx(
        solve_steady_state(replace(defaults, g_mc=0.0)).photon_number, rel=1e-12
    )


def test_iteration_cap_reports_nonconvergence(defaults):
    with pytest.raises(NonConvergence) as exc:
        solve_steady_state(defaults, max_iter=3)
    assert exc.value.iterations == 3
    assert exc.value.last > 0
    assert exc.value.residual > 1e-12


def test_omit_dip_at_zero_detuning(defaults):
    ss = solve_steady_state(defaults)
    r = probe_response(defaults, 0.0, ss)
    wb = defaults.omega_b
    gm, k, g = defaults.gamma_m / wb, defaults.kappa / wb, defaults.g_mc / wb
    assert r.c_minus_over_ep == pytest.approx(gm / (k * gm + ss.photon_number * g**2), rel=1e-12)
    assert abs(r.c_minus_over_ep) < 1e-3 / k


def test_bare_cavity_lorentzian(defaults):
    p = replace(defaults, g_mc=0.0)
    k = p.kappa / p.omega_b
    for dp in (-0.05, 0.0, 0.02):
        assert probe_response(p, dp).c_minus_over_ep == pytest.approx(1 / (k - 1j * dp), rel=1e-12)


def test_lambda_cancellation_symbolic():
    a1, a2, a3, a4, lk, n, g = sp.symbols("a1 a2 a3 a4 lk n g")
    gcp = 0
    expr = (a3 * a4 + lk**2) * a2 / (a2 * a4 * (a1 * a3 + gcp**2) + a1 * a2 * lk**2 + n * g**2 * (a3 * a4 + lk**2))
    assert sp.simplify(expr - a2 / (a1 * a2 + n * g**2)) == 0


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.3, 0.3), st.floats(0.0, 60.0))
def test_lambda_irrelevant_without_gcp(dp, lk):
    p = SystemParams()
    a = probe_response(p, dp)
    b = probe_response(p.with_couplings(0, lk), dp)
    assert abs(a.chi - b.chi) <= 1e-13 * abs(a.chi)


def test_omit_reduction_matches_closed_form(defaults):
    dps = np.linspace(-0.1, 0.1, 401)
    ss = solve_steady_state(defaults)
    wb = defaults.omega_b
    k, gm, g = defaults.kappa / wb, defaults.gamma_m / wb, defaults.g_mc / wb
    ref = (gm - 1j * dps) / ((k - 1j * dps) * (gm - 1j * dps) + ss.photon_number * g**2)
    got = c_minus_ratio(defaults, dps, ss.photon_number)
    np.testing.assert_allclose(got, ref, rtol=1e-12)


@pytest.mark.parametrize("p_probe", [1e-12, 1e-9, 5e-6])
def test_probe_power_invariance(defaults, p_probe):
    a = probe_response(defaults, 0.013)
    b = probe_response(replace(defaults, power_probe=p_probe), 0.013)
    assert a.chi == b.chi


def test_eps2_is_one_plus_chi(defaults):
    for r in response_spectrum(defaults.with_couplings(20, 25), np.linspace(-0.1, 0.1, 21)):
        assert r.eps2 == 1 + r.chi
        assert r.chi == r.e_out


@pytest.mark.parametrize("conv, factor", [("kappa", 1.0), ("sqrt2kappa", math.sqrt(2 * 30)), ("2kappa", 2.0)])
def test_output_conventions(defaults, conv, factor):
    # prefactors are kappa, sqrt(2 kappa), 2 kappa with kappa = 1/30 in omega_b units
    base = probe_response(defaults, 0.02).e_out
    other = probe_response(replace(defaults, output_field_convention=conv), 0.02).e_out
    assert other == pytest.approx(factor * base, rel=1e-12)


def test_spectrum_single_symmetric_dip(defaults):
    dps = np.linspace(-0.1, 0.1, 401)
    re = chi_array(defaults, dps).real
    assert find_transparency_windows(dps, re) == [pytest.approx(0.0, abs=1e-12)]
    np.testing.assert_allclose(re, re[::-1], rtol=1e-9)


def test_broadening_with_gcp(defaults):
    assert window_width(defaults.with_couplings(20, 0)) > window_width(defaults)


def test_three_minima_with_lambda(defaults):
    dps = np.linspace(-0.1, 0.1, 401)
    re = chi_array(defaults.with_couplings(20, 25), dps).real
    centers = find_transparency_windows(dps, re)
    assert len(centers) == 3
    assert centers[0] == pytest.approx(-centers[2], abs=5e-4)


@pytest.mark.parametrize("couplings", [(0, 0), (20, 0), (20, 25)])
def test_dip_center_below_threshold(defaults, couplings):
    dps = np.linspace(-0.1, 0.1, 401)
    re = chi_array(defaults.with_couplings(*couplings), dps).real
    assert re[200] < 1e-3 * re.max()


def test_spectrum_error_carries_index(monkeypatch, defaults):
    import optoshe.optomech as om

    monkeypatch.setattr(om, "DENOM_FLOOR", 1e300)
    with pytest.raises(om.DegenerateDenominator, match="grid index 0"):
        response_spectrum(defaults, [0.0, 0.1])
