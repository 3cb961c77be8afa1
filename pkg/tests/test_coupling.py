import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from lumen.atomkit import SI, polarization_basis
from lumen.coupling import (CouplingModel, ModeIndex, coupling, cutoff, excited_amplitude,
                            ground_amplitude, reduced_coupling)


def _sphere(n_theta=24, n_phi=48):
    ct, wt = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    st_ = np.sqrt(1 - ct**2)
    dirs = np.stack([np.outer(st_, np.cos(phi)), np.outer(st_, np.sin(phi)),
                     np.outer(ct, np.ones(n_phi))], -1).reshape(-1, 3)
    return dirs, np.outer(wt, np.full(n_phi, 2 * np.pi / n_phi)).reshape(-1)


def test_parse():
    assert CouplingModel.parse("er-dip") is CouplingModel.ER_DIPOLE
    with pytest.raises(ValueError):
        CouplingModel.parse("pa")


def test_mode_index_validation():
    with pytest.raises(ValueError):
        ModeIndex((1, 0, 0), 3)
    with pytest.raises(ValueError):
        ModeIndex((1, 0), 1)
    assert ModeIndex((3, 4, 0), 1).k_norm == 5


def test_cutoff_values():
    assert cutoff(0.0) == 1.0
    assert cutoff(1.5 / SI.a0) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        cutoff(-1.0)
    k = np.linspace(0, 1e12, 50)
    assert np.all(np.diff(cutoff(k)) < 0)


@given(st.floats(-2, 4), st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: np.linalg.norm(v) > 1e-2),
       st.sampled_from([1, 2]))
@settings(max_examples=150, deadline=None)
def test_ratio_identities(log_k, direction, lam):
    tr_k0 = 2 * math.pi / 121.567e-9
    from lumen.atomkit import TransitionSpec
    tr = TransitionSpec.preset("hydrogen-paper", m2_weights=(0.6, 0.8, 0.0))
    k = np.asarray(direction) / np.linalg.norm(direction) * tr_k0 * 10**log_k
    mode = ModeIndex(tuple(k), lam)
    ap = coupling("ap-dip", mode, tr)
    if abs(ap) < 1e-300:
        return
    assert coupling("er-dip", mode, tr) / ap == pytest.approx(SI.c * mode.k_norm / tr.omega0, rel=1e-12)
    assert coupling("ap-exact", mode, tr) / ap == pytest.approx(cutoff(mode.k_norm), rel=1e-12)


def test_ap_diverges_at_zero(hydro):
    with pytest.raises(ValueError):
        coupling("ap-dip", ModeIndex((0, 0, 0), 1), hydro)
    assert coupling("er-dip", ModeIndex((0, 0, 0), 1), hydro) == 0


def test_golden_rule_reproduces_textbook_rate(hydro_lit):
    """Sum of |G|^2 over the resonant shell, independent of the reduced scale."""
    tr = hydro_lit
    k0 = tr.omega0 / SI.c
    dirs, w = _sphere()
    total = 0.0
    for d, wi in zip(dirs, w):
        for lam in (1, 2):
            total += wi * abs(coupling("er-dip", ModeIndex(tuple(d * k0), lam), tr)) ** 2
    gamma = 2 * math.pi / SI.hbar**2 * k0**2 / SI.c * total
    textbook = tr.omega0**3 * tr.mu_norm**2 / (3 * math.pi * SI.eps0 * SI.hbar * SI.c**3)
    assert gamma == pytest.approx(textbook, rel=1e-12)
    # and the Lyman-alpha A coefficient
    assert gamma == pytest.approx(6.2649e8, rel=2e-3)


def test_reduced_coupling_golden_rule():
    gamma = 1e-3
    dirs, w = _sphere(8, 16)
    mu_hat = np.array([0.0, 0.0, 1.0])
    total = 0.0
    for d, wi in zip(dirs, w):
        for e in polarization_basis(d):
            total += wi * abs(reduced_coupling("ap-dip", 1.0, e @ mu_hat, gamma)) ** 2
    assert 2 * math.pi * total == pytest.approx(gamma, rel=1e-12)


def test_excited_amplitude(hydro):
    assert excited_amplitude(-1.0, hydro) == 0
    t = np.array([0, 1 / hydro.gamma])
    np.testing.assert_allclose(excited_amplitude(t, hydro), [1, math.exp(-0.5)])


@pytest.mark.parametrize("model", ["er-dip", "ap-dip", "ap-exact"])
@pytest.mark.parametrize("detune", [-3.0, 0.0, 0.4, 20.0])
def test_ground_amplitude_matches_quadrature(hydro, model, detune):
    k = hydro.omega0 / SI.c * (1 + detune * hydro.reduced_gamma)
    mode = ModeIndex((0, k, 0), 1)
    t_end = 2.5 / hydro.gamma
    g = coupling(model, mode, hydro)
    delta = SI.c * k - hydro.omega0

    def envelope(s):
        return math.exp(-hydro.gamma * s / 2)

    kw = dict(limit=400, epsabs=0, epsrel=1e-11)
    if delta == 0:
        re, im = integrate.quad(envelope, 0, t_end, **kw)[0], 0.0
    else:
        re = integrate.quad(envelope, 0, t_end, weight="cos", wvar=delta, **kw)[0]
        im = integrate.quad(envelope, 0, t_end, weight="sin", wvar=delta, **kw)[0]
    expected = -1j / SI.hbar * g * complex(re, im)
    assert ground_amplitude(mode, t_end, model, hydro) == pytest.approx(expected, rel=1e-9)


def test_ground_amplitude_satisfies_ode(hydro):
    k = hydro.omega0 / SI.c * 1.0003
    mode = ModeIndex((k, 0, 0), 2)
    t, h = 0.7 / hydro.gamma, 1e-4 / hydro.omega0
    deriv = (ground_amplitude(mode, t + h, "ap-dip", hydro)
             - ground_amplitude(mode, t - h, "ap-dip", hydro)) / (2 * h)
    rhs = (-1j / SI.hbar * coupling("ap-dip", mode, hydro) * excited_amplitude(t, hydro)
           * np.exp(1j * (SI.c * k - hydro.omega0) * t))
    assert deriv == pytest.approx(rhs, rel=1e-6)
    assert ground_amplitude(mode, 0.0, "ap-dip", hydro) == 0
    with pytest.raises(ValueError):
        ground_amplitude(mode, -1.0, "ap-dip", hydro)
