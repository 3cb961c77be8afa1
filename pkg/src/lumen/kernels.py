"""Dyadic Green functions as lists of distributional time terms.

A term contributes ``sign * coefficient * shape(x_hat) * s^(n)(t_arg) / r**p``
to the response at ``(x, t)`` of a source ``s``.  ``t_arg`` is ``t - r/c`` for
retarded terms and ``t`` for instantaneous ones; ``n = -1`` stands for the
primitive of the source.  Coefficients are sympy expressions in omega0, c, eps0
so that identities between kernels are checked exactly.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from .atomkit import SI, projectors, split_points
from .exceptions import SingularityError

omega0, c, eps0 = sp.symbols("omega0 c epsilon0", positive=True)
INTERNAL_UNITS = {omega0: 1, c: 1, eps0: 1 / (4 * sp.pi)}


class Shape(enum.Enum):
    TRANSVERSE = "I-xx"
    TRACELESS = "I-3xx"


class KernelModel(enum.Enum):
    CLASSICAL_FULL = "classical-full"
    CLASSICAL_TRANSVERSE = "classical-transverse"
    CLASSICAL_LONGITUDINAL = "classical-longitudinal"
    QUANTUM_ER_DIP = "quantum-er-dip"
    QUANTUM_AP_DIP = "quantum-ap-dip"

    @classmethod
    def parse(cls, value) -> "KernelModel":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown kernel model {value!r}") from None


@dataclass(frozen=True)
class KernelTerm:
    shape: Shape
    radial_power: int
    derivative_order: int
    retarded: bool
    coefficient: sp.Expr
    sign: int = 1

    def __post_init__(self):
        if self.derivative_order not in (-1, 0, 1, 2):
            raise ValueError("derivative_order must be in {-1, 0, 1, 2}")
        if self.radial_power not in (1, 2, 3):
            raise ValueError("radial_power must be in {1, 2, 3}")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")

    @property
    def key(self) -> tuple:
        return (self.shape, self.derivative_order, self.retarded)

    @property
    def signed(self) -> sp.Expr:
        return self.sign * self.coefficient

    @property
    def internal_value(self) -> complex:
        return _internal(self.signed)

    def as_dict(self) -> dict:
        v = self.internal_value
        return {
            "shape": self.shape.value,
            "radial_power": self.radial_power,
            "derivative_order": self.derivative_order,
            "retarded": self.retarded,
            "sign": self.sign,
            "coefficient": str(self.coefficient),
            "internal_value": [v.real, v.imag],
        }


@lru_cache(maxsize=None)
def _internal(expr: sp.Expr) -> complex:
    return complex(sp.N(expr.subs(INTERNAL_UNITS)))


@dataclass(frozen=True)
class GreenKernel:
    model: KernelModel
    terms: tuple
    causal_gate: bool = True

    def term(self, shape: Shape, n: int, retarded: bool) -> KernelTerm:
        for t in self.terms:
            if t.key == (shape, n, retarded):
                return t
        raise KeyError((shape, n, retarded))

    @property
    def triples(self) -> list:
        return [t.key for t in self.terms]

    def instantaneous_sum(self, n: int = 0) -> dict:
        """Signed coefficient sum of instantaneous terms of order ``n``, per shape."""
        out = {}
        for t in self.terms:
            if not t.retarded and t.derivative_order == n:
                out[t.shape] = sp.simplify(out.get(t.shape, 0) + t.signed)
        return out

    def to_json(self) -> str:
        return json.dumps(
            {"model": self.model.value, "causal_gate": self.causal_gate,
             "terms": [t.as_dict() for t in self.terms]},
            indent=2,
        )


def _classical_full_terms():
    pref = 1 / (4 * sp.pi * eps0)
    T, S = Shape.TRANSVERSE, Shape.TRACELESS
    return (
        KernelTerm(T, 1, 2, True, pref / c**2, -1),
        KernelTerm(S, 2, 1, True, pref / c, -1),
        KernelTerm(S, 3, 0, True, pref, -1),
    )


def _static_term(sign):
    return KernelTerm(Shape.TRACELESS, 3, 0, False, 1 / (4 * sp.pi * eps0), sign)


@lru_cache(maxsize=None)
def kernel(model) -> GreenKernel:
    """Term inventory of the requested Green function."""
    model = KernelModel.parse(model)
    pref = 1 / (4 * sp.pi * eps0)
    T, S = Shape.TRANSVERSE, Shape.TRACELESS
    if model is KernelModel.CLASSICAL_FULL:
        terms = _classical_full_terms()
    elif model is KernelModel.CLASSICAL_LONGITUDINAL:
        terms = (_static_term(-1),)
    elif model is KernelModel.CLASSICAL_TRANSVERSE:
        terms = (_static_term(+1),) + _classical_full_terms()
    elif model is KernelModel.QUANTUM_ER_DIP:
        terms = (
            KernelTerm(T, 1, 2, True, pref / c**2, +1),
            KernelTerm(S, 2, 1, True, pref / c, +1),
            KernelTerm(S, 3, 0, True, pref, +1),
        )
    else:
        ap = sp.I * omega0 * pref
        terms = (
            KernelTerm(T, 1, 1, True, ap / c**2, -1),
            KernelTerm(S, 2, 0, True, ap / c, -1),
            KernelTerm(S, 3, -1, True, ap, -1),
            KernelTerm(S, 3, -1, False, ap, +1),
        )
    return GreenKernel(model, terms)


def er_ap_structure_check() -> dict:
    """Compare the E.r, A.p and classical term inventories."""
    full = kernel(KernelModel.CLASSICAL_FULL)
    er = kernel(KernelModel.QUANTUM_ER_DIP)
    ap = kernel(KernelModel.QUANTUM_AP_DIP)
    er_vs_classical = sorted(er.triples, key=repr) == sorted(full.triples, key=repr)
    classical_ratio = {
        str(t.key): str(sp.simplify(t.signed / full.term(*t.key).signed)) for t in er.terms
    }
    ap_retarded = [t for t in ap.terms if t.retarded]
    lowered = sorted(((t.shape, t.derivative_order - 1, True) for t in er.terms), key=repr)
    orders_shifted = sorted((t.key for t in ap_retarded), key=repr) == lowered
    ratios = {}
    for t in er.terms:
        a = ap.term(t.shape, t.derivative_order - 1, True)
        ratios[str(t.key)] = sp.simplify(a.signed / t.signed)
    ratio_ok = all(sp.simplify(r + sp.I * omega0) == 0 for r in ratios.values())
    counter = [t for t in ap.terms if not t.retarded]
    retarded_prim = ap.term(Shape.TRACELESS, -1, True)
    counter_ok = (
        len(counter) == 1
        and counter[0].key == (Shape.TRACELESS, -1, False)
        and sp.simplify(counter[0].signed + retarded_prim.signed) == 0
    )
    return {
        "er_matches_classical": er_vs_classical,
        "er_over_classical": classical_ratio,
        "ap_orders_lowered_by_one": orders_shifted,
        "ap_over_er": {k: str(v) for k, v in ratios.items()},
        "ap_over_er_is_minus_i_omega0": ratio_ok,
        "ap_counter_term_ok": counter_ok,
        "passed": er_vs_classical and orders_shifted and ratio_ok and counter_ok,
    }


# harmonic-domain dyadics (SI, x in metres, omega in rad/s)

def _geometry(x):
    r, xh = split_points(np.asarray(x, dtype=float).reshape(1, 3))
    pt, ps = projectors(xh[0])
    return float(r[0]), xh[0], pt, ps


def classical_harmonic(x, omega, eps0_value=None, c_value=None):
    """Full classical dipole response at frequency omega, self-term excluded."""
    e0 = SI.eps0 if eps0_value is None else eps0_value
    cc = SI.c if c_value is None else c_value
    r, xh, pt, _ = _geometry(x)
    kr = omega / cc * r
    xx = np.outer(xh, xh)
    return -np.exp(1j * kr) / (4 * np.pi * e0 * r**3) * (
        (1 - 1j * kr - kr**2) * pt - (2 - 2j * kr) * xx
    )


def longitudinal_harmonic(x, omega=None, eps0_value=None):
    e0 = SI.eps0 if eps0_value is None else eps0_value
    r, _, _, ps = _geometry(x)
    return -ps / (4 * np.pi * e0 * r**3) + 0j


def transverse_harmonic(x, omega, eps0_value=None, c_value=None):
    e0 = SI.eps0 if eps0_value is None else eps0_value
    cc = SI.c if c_value is None else c_value
    r, xh, pt, ps = _geometry(x)
    kr = omega / cc * r
    xx = np.outer(xh, xh)
    # static parts cancel at small kr: P_S - (P_T - 2xx) = 0
    bracket = ps - np.exp(1j * kr) * ((1 - 1j * kr - kr**2) * pt - (2 - 2j * kr) * xx)
    return bracket / (4 * np.pi * e0 * r**3)


def dyadic_m(k: float, x) -> np.ndarray:
    """The 3x3 matrix M(k, x) built from outgoing and ingoing spherical waves."""
    if not k > 0:
        raise ValueError("k must be positive")
    x = np.asarray(x, dtype=float).reshape(3)
    if not np.linalg.norm(x) > 0:
        raise SingularityError("M(k, x) is singular at x = 0")
    r, xh, pt, ps = _geometry(x)
    z = k * r
    em, ep = np.exp(-1j * z), np.exp(1j * z)
    return (1j / z) * (pt * (em - ep) - ps * 1j / z * (em + ep) - ps / z**2 * (em - ep))
