import json

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from lumen.kernels import (INTERNAL_UNITS, KernelModel, KernelTerm, Shape, c, classical_harmonic,
                           dyadic_m, eps0, er_ap_structure_check, kernel, longitudinal_harmonic,
                           omega0, transverse_harmonic)
from lumen.exceptions import SingularityError

T, S = Shape.TRANSVERSE, Shape.TRACELESS


def _values(model):
    return {t.key: t.internal_value for t in kernel(model).terms}


def test_internal_values():
    assert _values("classical-full") == {(T, 2, True): -1, (S, 1, True): -1, (S, 0, True): -1}
    assert _values("classical-longitudinal") == {(S, 0, False): -1}
    assert _values("classical-transverse") == {(T, 2, True): -1, (S, 1, True): -1,
                                               (S, 0, True): -1, (S, 0, False): 1}
    assert _values("quantum-er-dip") == {(T, 2, True): 1, (S, 1, True): 1, (S, 0, True): 1}
    assert _values("quantum-ap-dip") == {(T, 1, True): -1j, (S, 0, True): -1j,
                                         (S, -1, True): -1j, (S, -1, False): 1j}


def test_radial_powers_follow_derivative_order():
    for m in KernelModel:
        for t in kernel(m).terms:
            assert (t.shape is T) == (t.radial_power == 1)


def test_symbolic_cancellation():
    trans = kernel("classical-transverse").instantaneous_sum(0)
    long_ = kernel("classical-longitudinal").instantaneous_sum(0)
    assert set(trans) == set(long_) == {S}
    assert sp.simplify(trans[S] + long_[S]) == 0


def test_full_is_sum_of_parts():
    full = {t.key: t.signed for t in kernel("classical-full").terms}
    parts = {}
    for m in ("classical-transverse", "classical-longitudinal"):
        for t in kernel(m).terms:
            parts[t.key] = sp.simplify(parts.get(t.key, 0) + t.signed)
    parts = {k: v for k, v in parts.items() if v != 0}
    assert parts.keys() == full.keys()
    assert all(sp.simplify(parts[k] - full[k]) == 0 for k in full)


def test_structure_check():
    res = er_ap_structure_check()
    assert res["passed"]
    assert set(res["ap_over_er"].values()) == {str(-sp.I * omega0)}
    assert set(res["er_over_classical"].values()) == {"-1"}


def test_ap_coefficients_dimensionally_omega0_times_er():
    er = kernel("quantum-er-dip").term(T, 2, True)
    ap = kernel("quantum-ap-dip").term(T, 1, True)
    assert sp.simplify(ap.coefficient / er.coefficient - sp.I * omega0) == 0
    assert er.coefficient == 1 / (4 * sp.pi * eps0 * c**2)


def test_term_validation():
    with pytest.raises(ValueError):
        KernelTerm(T, 1, 3, True, sp.Integer(1))
    with pytest.raises(ValueError):
        KernelTerm(T, 4, 0, True, sp.Integer(1))
    with pytest.raises(ValueError):
        KernelTerm(T, 1, 0, True, sp.Integer(1), sign=2)
    with pytest.raises(KeyError):
        kernel("quantum-er-dip").term(T, 0, True)
    with pytest.raises(ValueError):
        kernel("quantum-exact")


def test_json_dump():
    data = json.loads(kernel("quantum-ap-dip").to_json())
    assert data["model"] == "quantum-ap-dip"
    assert len(data["terms"]) == 4
    assert data["terms"][3]["internal_value"] == [0.0, 1.0]


@given(st.floats(0.01, 20), st.floats(0.01, 10),
       st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: np.linalg.norm(v) > 1e-2))
@settings(max_examples=100, deadline=None)
def test_harmonic_decomposition(kr, r, d):
    x = np.asarray(d) / np.linalg.norm(d) * r
    omega = kr / r
    kw = dict(eps0_value=1 / (4 * np.pi), c_value=1.0)
    full = classical_harmonic(x, omega, **kw)
    parts = longitudinal_harmonic(x, omega, eps0_value=kw["eps0_value"]) + transverse_harmonic(x, omega, **kw)
    np.testing.assert_allclose(parts, full, rtol=0, atol=1e-12 * np.abs(full).max())


def test_transverse_harmonic_static_limit():
    x = np.array([0.3, -0.2, 1.0])
    small = transverse_harmonic(x, 1e-6, eps0_value=1 / (4 * np.pi), c_value=1.0)
    assert np.abs(small).max() < 1e-5


def test_dyadic_m_sphere_quadrature():
    """integral over directions of (I - kk) exp(i k.x) equals 2 pi M(k, x)."""
    ct, wt = np.polynomial.legendre.leggauss(60)
    n = 120
    ph = 2 * np.pi * np.arange(n) / n
    s = np.sqrt(1 - ct**2)
    kh = np.stack([np.outer(s, np.cos(ph)), np.outer(s, np.sin(ph)), np.outer(ct, np.ones(n))], -1).reshape(-1, 3)
    w = np.outer(wt, np.full(n, 2 * np.pi / n)).reshape(-1)
    proj = np.eye(3)[None] - kh[:, :, None] * kh[:, None, :]
    for k, x in [(1.3, [0.3, 1.0, -2.0]), (0.2, [1.0, 0.0, 0.5]), (5.0, [0.0, 0.1, 0.0])]:
        x = np.array(x)
        quad = np.einsum("a,aij,a->ij", w, proj, np.exp(1j * k * kh @ x))
        np.testing.assert_allclose(quad, 2 * np.pi * dyadic_m(k, x), atol=1e-12)


def test_dyadic_m_errors():
    with pytest.raises(SingularityError):
        dyadic_m(1.0, [0, 0, 0])
    with pytest.raises(ValueError):
        dyadic_m(0.0, [1, 0, 0])


def test_internal_units_map():
    assert complex(sp.N((1 / (4 * sp.pi * eps0)).subs(INTERNAL_UNITS))) == 1
