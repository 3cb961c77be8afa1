import io
import math

import numpy as np
import pytest
from scipy import integrate

from lumen.atomkit import TransitionSpec
from lumen.exceptions import SingularityError
from lumen.fields import (INSIDE, ON_CONE, OUTSIDE, FieldOptions, FieldScan, GaussianPulse,
                          SourceSignal, apply_kernel, causality_scan, classify, convolve,
                          excitation_budget, field, geometric_mean_radius, longitudinal_source,
                          midfar_ratio, remanent_energy, scan, total_near_field_ap)
from lumen.kernels import classical_harmonic, kernel

MU = np.array([0.0, 0.0, 1.0])


def test_gaussian_pulse_derivatives():
    g = GaussianPulse(0.3, 0.7)
    t = np.linspace(-2, 3, 11)
    h = 1e-4
    for n in range(2):
        fd = (g.evaluate(n, t + h) - g.evaluate(n, t - h)) / (2 * h)
        np.testing.assert_allclose(fd, g.evaluate(n + 1, t), atol=1e-7)
    with pytest.raises(ValueError):
        g.evaluate(-1, t)


def test_classical_kernel_matches_fourier_synthesis():
    """Time-domain kernel on a Gaussian pulse vs frequency-domain dyadic."""
    pulse = GaussianPulse(t0=0.0, width=0.4)
    x = np.array([0.7, -0.4, 1.1])
    r = np.linalg.norm(x)
    w = np.linspace(-25, 25, 20001)
    spec = pulse.width * math.sqrt(2 * math.pi) * np.exp(-(w * pulse.width) ** 2 / 2)
    dyads = np.array([classical_harmonic(x, wi, eps0_value=1 / (4 * np.pi), c_value=1.0)
                      if wi != 0 else classical_harmonic(x, 1e-300, eps0_value=1 / (4 * np.pi), c_value=1.0)
                      for wi in w])
    for t in (r - 0.5, r, r + 0.8):
        integrand = dyads @ MU * (spec * np.exp(-1j * w * t))[:, None]
        expected = integrate.trapezoid(integrand, w, axis=0) / (2 * math.pi)
        got = apply_kernel(kernel("classical-full"), pulse, x, t, MU)
        np.testing.assert_allclose(got, expected, atol=1e-9)


def test_primitive_is_integral_of_source():
    src = SourceSignal(complex(1, -0.05))
    for t in (0.0, 0.3, 4.0, 17.5):
        re = integrate.quad(lambda s: src.derivative(0, s).real, 0, t, limit=200)[0] if t else 0
        im = integrate.quad(lambda s: src.derivative(0, s).imag, 0, t, limit=200)[0] if t else 0
        assert src.primitive(t) == pytest.approx(complex(re, im), abs=1e-12)
    assert src.primitive(-1.0) == 0
    assert src.derivative(1, 2.0) == pytest.approx(-1j * src.omega * src.derivative(0, 2.0))


def test_nascent_delta_convolution():
    """Replacing delta(t - t' - r) by a narrow Gaussian reproduces s(t - r)."""
    src = SourceSignal(complex(1, -0.01))
    x = np.array([[1.2, 0.0, 0.0]])
    t, r, eps = 3.0, 1.2, 1e-3
    tp = np.linspace(t - r - 12 * eps, t - r + 12 * eps, 4001)
    delta = np.exp(-((t - tp - r) ** 2) / (2 * eps**2)) / (eps * math.sqrt(2 * math.pi))
    conv = integrate.trapezoid(delta * src.derivative(0, tp), tp)
    term = convolve(kernel("quantum-er-dip"), src, x, np.array([t]), {"near"})
    # near-zone E.r kernel: +P_S / r^3 s(t - r)
    ps = np.eye(3) - 3 * np.diag([1.0, 0, 0])
    np.testing.assert_allclose(term[0], ps * conv / r**3, rtol=1e-5)


def test_retarded_terms_vanish_outside(hydro):
    x = np.array([[3.0, 1.0, 0.0]])
    for model in ("er-dip", "ap-dip"):
        for zones in ({"far"}, {"mid"}):
            assert np.all(field(model, x, 2.0, hydro, FieldOptions(zones=zones)) == 0)
    assert np.all(field("er-dip", x, 2.0, hydro) == 0)


def test_total_ap_field_is_causal_and_remanent(hydro):
    x = np.array([0.4, 0.2, 0.9])
    r = np.linalg.norm(x)
    assert np.all(total_near_field_ap(x, 0.5 * r, hydro) == 0)
    late = total_near_field_ap(x, r + 60 / hydro.reduced_gamma, hydro)
    xh = x / r
    remanent = -(1 / hydro.Omega0_internal) * (MU - 3 * xh * xh[2]) / r**3
    np.testing.assert_allclose(late, remanent, rtol=1e-10)


def test_near_field_ratio_inside(hydro):
    """Retarded primitive plus instantaneous counter-term, written out by hand."""
    x = np.array([0.2, -0.1, 0.3])
    r = np.linalg.norm(x)
    t = r + 4.0
    om = hydro.Omega0_internal
    ap = field("ap-dip", x, t, hydro, FieldOptions(zones={"near"}))
    xh = x / r
    ps_mu = MU - 3 * xh * xh[2]
    expected = (1 / om) * (np.exp(-1j * om * (t - r)) - np.exp(-1j * om * t)) * ps_mu / r**3
    np.testing.assert_allclose(ap, expected, rtol=1e-12)


def test_longitudinal_modes(hydro):
    x = np.array([[2.0, 0.0, 1.0]])
    src_p = longitudinal_source(hydro, "primitive")
    src_a = longitudinal_source(hydro, "amplitude")
    assert src_p.evaluate(0, 0.0) == 0
    assert src_a.evaluate(0, 0.0) == pytest.approx(1j * 1j / hydro.Omega0_internal)
    with pytest.raises(ValueError):
        longitudinal_source(hydro, "nope")
    with pytest.raises(ValueError):
        field("er-dip", x, 1.0, hydro, FieldOptions(True, "primitive"))
    with pytest.raises(ValueError):
        field("ap-exact", x, 1.0, hydro)


def test_options():
    assert FieldOptions.from_flags("off").include_longitudinal is False
    assert FieldOptions.from_flags("amplitude", "near").zones == {"near"}
    with pytest.raises(ValueError):
        FieldOptions(zones={"medium"})
    with pytest.raises(ValueError):
        FieldOptions(zones=set())
    with pytest.raises(ValueError):
        FieldOptions(True, "other")


def test_origin_and_shapes(hydro):
    with pytest.raises(SingularityError):
        field("er-dip", [0, 0, 0], 1.0, hydro)
    with pytest.raises(ValueError):
        field("er-dip", np.ones((2, 3)), np.ones(3), hydro)
    with pytest.raises(ValueError):
        field("er-dip", [1, 0, np.nan], 1.0, hydro)
    assert field("er-dip", [1, 0, 0], 2.0, hydro).shape == (3,)
    assert field("er-dip", np.ones((4, 3)), 2.0, hydro).shape == (4, 3)


def test_classify():
    z = classify(np.array([[1, 0, 0]] * 3), np.array([0.5, 1.0, 2.0]))
    assert list(z) == [OUTSIDE, ON_CONE, INSIDE]


def test_midfar_ratio(hydro):
    assert midfar_ratio([1, 2, 0.5], 10.0, hydro) == pytest.approx(1 / hydro.Omega0_internal, rel=1e-13)
    with pytest.raises(ValueError):
        midfar_ratio([5, 0, 0], 1.0, hydro)


def test_causality_scan_small(hydro):
    r = np.geomspace(0.01, 10, 12)
    t = np.linspace(0, 30, 15)
    x = np.repeat(np.outer(r, [0.6, 0.0, 0.8]), t.size, axis=0)
    tt = np.tile(t, r.size)
    _, summary = causality_scan("ap-dip", FieldOptions(True, "primitive"), x, tt, hydro)
    assert summary["max_outside"] == 0.0 and summary["peak_inside"] > 0
    _, trans = causality_scan("ap-dip", FieldOptions(False), x, tt, hydro)
    assert trans["ratio"] > 1e-3
    with pytest.raises(ValueError):
        causality_scan("ap-dip", FieldOptions(), np.empty((0, 3)), np.empty(0), hydro)


def test_scan_csv_round_trip(hydro, tmp_path):
    x = np.array([[1.0, 2.0, 3.0], [0.1, 0.0, 0.0]])
    sc = scan("ap-dip", x, np.array([5.0, 1.0 / 3]), hydro)
    p = tmp_path / "s.csv"
    sc.to_csv(p)
    back = FieldScan.from_csv(p)
    np.testing.assert_array_equal(back.psi, sc.psi)
    np.testing.assert_array_equal(back.t, sc.t)
    buf = io.StringIO()
    sc.write_csv(buf)
    assert "0.33333333333333331" in buf.getvalue()


def test_remanent_energy(hydro):
    r_min = geometric_mean_radius(hydro)
    assert r_min == pytest.approx(math.sqrt(hydro.constants.a0 * 121.567e-9), rel=1e-12)
    e = remanent_energy(r_min, hydro)
    assert e.relative_difference < 1e-12
    assert 1e-6 < e.ev < 1e-4
    half = remanent_energy(2 * r_min, hydro)
    assert e.value / half.value == pytest.approx(8.0)
    with pytest.raises(ValueError):
        remanent_energy(0.0, hydro)


def test_excitation_budget(hydro):
    ev = hydro.constants.e_charge
    assert excitation_budget(10 * ev, energy_per_excitation=1e-4 * ev) == 100000
    assert excitation_budget(10 * ev, hydro) == math.ceil(10 * ev / remanent_energy(
        geometric_mean_radius(hydro), hydro).value)
    with pytest.raises(ValueError):
        excitation_budget(-1.0, hydro)
    with pytest.raises(ValueError):
        excitation_budget(1.0)


def test_transition_scaling_invariance():
    """Internal-unit fields depend only on Gamma/omega0."""
    a = TransitionSpec(omega0=1e15, gamma=1e12)
    b = TransitionSpec(omega0=3e15, gamma=3e12)
    x = np.array([0.5, 0.5, 0.5])
    np.testing.assert_array_equal(field("ap-dip", x, 3.0, a), field("ap-dip", x, 3.0, b))
