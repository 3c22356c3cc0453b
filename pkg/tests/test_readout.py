import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbsim.errors import DiagnosticWarning, DipOutsideWindowError
from qbsim.readout import (
    ReadoutParams,
    dip_detuning,
    fwhm,
    infer_photon_number,
    locate_dip,
    lorentzian_dip,
    probe_grid,
    spectrum_sweep,
    transmission,
    transmission_amplitude,
)

TWO_PI = 2 * math.pi
P = ReadoutParams(TWO_PI * 4.5e9, TWO_PI * 5e9, 1e7, 2e4)
N_FIG = [64.0, 64 * math.exp(-1), 64 * math.exp(-2), 0.0]


@pytest.mark.parametrize("gamma", [2e4, 3.7e5, 1.0, 1e-3])
def test_exact_points(gamma):
    assert lorentzian_dip(0.0, gamma) == 0.0
    assert lorentzian_dip(gamma, gamma) == 0.5
    assert lorentzian_dip(-gamma, gamma) == 0.5


def test_transmission_near_dip():
    dip = P.omega_q + dip_detuning(10.0, P)
    assert transmission(dip, 10.0, P) < 1e-18
    assert math.isclose(transmission(dip + P.line_rate, 10.0, P), 0.5, rel_tol=1e-6)


def test_amplitude_modulus_matches_transmission():
    w = P.omega_q + np.linspace(-3e6, 1e6, 101)
    assert np.allclose(np.abs(transmission_amplitude(w, 5.0, P)) ** 2, transmission(w, 5.0, P), atol=1e-14)


def test_dip_affine_in_photon_number():
    n = np.linspace(0, 64, 17)
    y = np.array([dip_detuning(x, P) for x in n])
    slope, intercept = np.polyfit(n, y, 1)
    assert math.isclose(slope, P.g_a**2 / P.delta_a, rel_tol=1e-10)
    assert math.isclose(intercept, 0.5 * P.g_a**2 / P.delta_a, rel_tol=1e-10)
    assert np.max(np.abs(y - (slope * n + intercept))) < 1e-10 * np.max(np.abs(y))


def test_dip_separation_closed_form():
    sep = dip_detuning(64.0, P) - dip_detuning(64 * math.exp(-1), P)
    assert math.isclose(sep, P.g_a**2 * 64 * (1 - math.exp(-1)) / P.delta_a, rel_tol=1e-12)


def test_figure_dip_ordering_strict():
    dips = [dip_detuning(n, P) for n in N_FIG]
    # Delta_a < 0: more photons pushes the dip further below omega_q
    assert all(a < b for a, b in zip(dips, dips[1:]))


def test_round_trip_inference():
    grid = probe_grid(N_FIG, P, spacing=P.line_rate / 5, margin=25)
    for n in N_FIG:
        got = infer_photon_number(spectrum_sweep(grid, n, P), P)
        assert abs(got - n) <= max(0.005 * n, 5e-3)


def test_fwhm_is_twice_line_rate():
    grid = probe_grid([20.0], P, spacing=P.line_rate / 50, margin=25)
    assert math.isclose(fwhm(spectrum_sweep(grid, 20.0, P)), 2 * P.line_rate, rel_tol=1e-3)


def test_dip_outside_window():
    grid = P.omega_q + np.linspace(1e6, 2e6, 50)
    with pytest.warns(DiagnosticWarning):
        s = spectrum_sweep(grid, 10.0, P)
    with pytest.raises(DipOutsideWindowError):
        locate_dip(s)


def test_input_validation():
    with pytest.raises(ValueError):
        ReadoutParams(1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ReadoutParams(1.0, 2.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        transmission(P.omega_q, -1.0, P)


def test_from_waveguide():
    p = ReadoutParams.from_waveguide(1.0, 2.0, 0.1, 3.0, 2.0)
    assert p.line_rate == 4.5


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 100), st.floats(-50, 50))
def test_transmission_bounded(n, offset):
    w = P.omega_q + dip_detuning(n, P) + offset * P.line_rate
    t = transmission(w, n, P)
    assert 0.0 <= t <= 1.0
    assert math.isclose(t, offset**2 / (offset**2 + 1), rel_tol=1e-6, abs_tol=1e-9)
