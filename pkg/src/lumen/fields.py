"""Single-photon electric field of the decaying dipole, in internal units.

Positions are in c/omega0, times in 1/omega0 and fields in
|mu| omega0^3 / (4 pi eps0 c^3); see :mod:`lumen.atomkit`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import integrate

from ._validation import ZONE_POWERS, check_points, parallel_map, parse_zones
from .atomkit import SI, TransitionSpec
from .coupling import CouplingModel
from .kernels import GreenKernel, KernelModel, Shape, kernel

LIGHT_CONE_COLLAR = 1e-9
INSIDE, OUTSIDE, ON_CONE = "inside", "outside", "on-cone"


@dataclass(frozen=True)
class SourceSignal:
    """Theta(t) exp(-i Omega0 t) with its derivatives and primitive."""

    omega: complex

    def derivative(self, n: int, tau):
        tau = np.asarray(tau, dtype=float)
        on = tau >= 0
        val = (-1j * self.omega) ** n * np.exp(-1j * self.omega * np.where(on, tau, 0.0))
        return np.where(on, val, 0.0)

    def primitive(self, tau, constant: bool = True):
        """Antiderivative vanishing at t = 0 (``constant=True``), or the
        particular one (i/Omega) exp(-i Omega t) without the constant."""
        tau = np.asarray(tau, dtype=float)
        on = tau >= 0
        arg = -1j * self.omega * np.where(on, tau, 0.0)
        val = (1j / self.omega) * (np.expm1(arg) if constant else np.exp(arg))
        return np.where(on, val, 0.0)

    def evaluate(self, n: int, tau):
        return self.primitive(tau) if n == -1 else self.derivative(n, tau)


@dataclass(frozen=True)
class PrimitiveSource:
    """``factor`` times the primitive of ``base``: the effective source that
    the longitudinal field sees."""

    base: SourceSignal
    factor: complex
    constant: bool = True

    def evaluate(self, n: int, tau):
        if n == 0:
            return self.factor * self.base.primitive(tau, self.constant)
        return self.factor * self.base.evaluate(n - 1, tau)


@dataclass(frozen=True)
class GaussianPulse:
    """Smooth test source exp(-(t - t0)^2 / (2 w^2)) with exact derivatives."""

    t0: float = 0.0
    width: float = 1.0

    def evaluate(self, n: int, tau):
        if n < 0:
            raise ValueError("GaussianPulse has no closed-form primitive here")
        u = (np.asarray(tau, dtype=float) - self.t0) / self.width
        # probabilists' Hermite: d^n/du^n e^{-u^2/2} = (-1)^n He_n(u) e^{-u^2/2}
        coeffs = np.zeros(n + 1)
        coeffs[n] = 1.0
        he = np.polynomial.hermite_e.hermeval(u, coeffs)
        return (-1) ** n * he * np.exp(-u * u / 2) / self.width**n


@dataclass(frozen=True)
class FieldOptions:
    include_longitudinal: bool = False
    longitudinal_source: str = "primitive"
    zones: frozenset = frozenset(ZONE_POWERS)

    def __post_init__(self):
        object.__setattr__(self, "zones", parse_zones(self.zones))
        if self.longitudinal_source not in ("primitive", "amplitude"):
            raise ValueError("longitudinal_source must be 'primitive' or 'amplitude'")

    @classmethod
    def from_flags(cls, longitudinal: str = "off", zones="near,mid,far") -> "FieldOptions":
        if longitudinal == "off":
            return cls(False, "primitive", zones)
        return cls(True, longitudinal, zones)


def _shape_apply(shape: Shape, xh: np.ndarray, vec: np.ndarray) -> np.ndarray:
    proj = np.sum(xh * vec, axis=1)[:, None] * xh
    return vec - proj if shape is Shape.TRANSVERSE else vec - 3 * proj


def _shape_dyadic(shape: Shape, xh: np.ndarray) -> np.ndarray:
    xx = xh[:, :, None] * xh[:, None, :]
    return np.eye(3) - (xx if shape is Shape.TRANSVERSE else 3 * xx)


def _term_scalars(gk: GreenKernel, source, r, t, zones):
    powers = {ZONE_POWERS[z] for z in zones}
    for term in gk.terms:
        if term.radial_power not in powers:
            continue
        arg = t - r if term.retarded else t
        yield term, term.internal_value * source.evaluate(term.derivative_order, arg) / r**term.radial_power


def convolve(gk: GreenKernel, source, x, t, zones=frozenset(ZONE_POWERS)):
    """Dyadic response D(x, t) with psi = D @ mu_hat, for kernel ``gk`` driven by ``source``."""
    x, t, single = check_points(x, t)
    zones = parse_zones(zones)
    r = np.linalg.norm(x, axis=1)
    xh = x / r[:, None]
    out = np.zeros((x.shape[0], 3, 3), dtype=complex)
    for term, scal in _term_scalars(gk, source, r, t, zones):
        out += scal[:, None, None] * _shape_dyadic(term.shape, xh)
    return out[0] if single else out


def apply_kernel(gk: GreenKernel, source, x, t, mu_hat, zones=frozenset(ZONE_POWERS)):
    """Field vectors D(x, t) @ mu_hat without forming the dyadics."""
    x, t, single = check_points(x, t)
    zones = parse_zones(zones)
    r = np.linalg.norm(x, axis=1)
    xh = x / r[:, None]
    mu = np.broadcast_to(np.asarray(mu_hat, dtype=complex), x.shape)
    out = np.zeros(x.shape, dtype=complex)
    shaped = {}
    for term, scal in _term_scalars(gk, source, r, t, zones):
        if term.shape not in shaped:
            shaped[term.shape] = _shape_apply(term.shape, xh, mu)
        out += scal[:, None] * shaped[term.shape]
    return out[0] if single else out


def longitudinal_source(transition: TransitionSpec, mode: str = "primitive") -> PrimitiveSource:
    """Effective source of the instantaneous longitudinal field.

    Both modes use the i*omega0 factor that maps the A.p transverse kernel onto
    the classical transverse one.  ``primitive`` keeps the integration constant
    fixed by continuity; ``amplitude`` keeps only (i/Omega0) c_e e^{-i omega0 t}.
    """
    base = SourceSignal(transition.Omega0_internal)
    if mode == "primitive":
        return PrimitiveSource(base, 1j, constant=True)
    if mode == "amplitude":
        return PrimitiveSource(base, 1j, constant=False)
    raise ValueError(f"unknown longitudinal source {mode!r}")


def _quantum_kernel(model) -> GreenKernel:
    model = CouplingModel.parse(model)
    if model is CouplingModel.ER_DIPOLE:
        return kernel(KernelModel.QUANTUM_ER_DIP)
    if model is CouplingModel.AP_DIPOLE:
        return kernel(KernelModel.QUANTUM_AP_DIP)
    raise ValueError(
        "no analytic kernel for ap-exact (the form factor is only kept in the "
        "numerical reconstruction); use lumen.oracle.reconstruct_field(cutoff_on=True)"
    )


def field(model, x, t, transition: TransitionSpec, options: FieldOptions = FieldOptions()):
    """psi(x, t) for the E.r or A.p dipole model, summed over ``options.zones``."""
    model = CouplingModel.parse(model)
    gk = _quantum_kernel(model)
    if options.include_longitudinal and model is not CouplingModel.AP_DIPOLE:
        raise ValueError("the longitudinal source is only defined for the ap-dip model")
    mu = transition.mu_hat
    src = SourceSignal(transition.Omega0_internal)
    psi = apply_kernel(gk, src, x, t, mu, options.zones)
    if options.include_longitudinal and "near" in options.zones:
        long_k = kernel(KernelModel.CLASSICAL_LONGITUDINAL)
        psi = psi + apply_kernel(
            long_k, longitudinal_source(transition, options.longitudinal_source), x, t, mu, {"near"}
        )
    return psi


def total_near_field_ap(x, t, transition: TransitionSpec):
    """Transverse plus primitive-sourced longitudinal A.p near field."""
    return field(CouplingModel.AP_DIPOLE, x, t, transition,
                 FieldOptions(True, "primitive", {"near"}))


def classify(x, t, collar: float = LIGHT_CONE_COLLAR) -> np.ndarray:
    x, t, _ = check_points(x, t)
    gap = t - np.linalg.norm(x, axis=1)
    zone = np.full(gap.shape, ON_CONE, dtype=object)
    zone[gap > collar] = INSIDE
    zone[gap < -collar] = OUTSIDE
    return zone


@dataclass
class FieldScan:
    x: np.ndarray
    t: np.ndarray
    psi: np.ndarray
    zone: np.ndarray
    label: str = ""
    meta: dict = dc_field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def intensity(self) -> np.ndarray:
        return np.sum(np.abs(self.psi) ** 2, axis=1)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "z", "t", "zone", "re_psi_x", "im_psi_x", "re_psi_y",
                    "im_psi_y", "re_psi_z", "im_psi_z", "abs_psi_sq"])
        fmt = "{:.17g}".format
        for xi, ti, zi, pi, ii in zip(self.x, self.t, self.zone, self.psi, self.intensity):
            row = [fmt(v) for v in xi] + [fmt(ti), zi]
            for comp in pi:
                row += [fmt(comp.real), fmt(comp.imag)]
            w.writerow(row + [fmt(ii)])

    @classmethod
    def from_csv(cls, path, label: str = "") -> "FieldScan":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"{path}: empty scan")
        x = np.array([[float(r["x"]), float(r["y"]), float(r["z"])] for r in rows])
        t = np.array([float(r["t"]) for r in rows])
        psi = np.array([[complex(float(r[f"re_psi_{c}"]), float(r[f"im_psi_{c}"]))
                         for c in "xyz"] for r in rows])
        zone = np.array([r["zone"] for r in rows], dtype=object)
        return cls(x, t, psi, zone, label or str(path))


def _chunks(n: int, size: int = 4096):
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


def scan(model, x, t, transition: TransitionSpec, options: FieldOptions = FieldOptions(),
         collar: float = LIGHT_CONE_COLLAR) -> FieldScan:
    x, t, _ = check_points(x, t)
    parts = parallel_map(lambda s: field(model, x[s], t[s], transition, options), _chunks(len(t)))
    psi = np.concatenate([np.atleast_2d(p) for p in parts])
    return FieldScan(x, t, psi, classify(x, t, collar), CouplingModel.parse(model).value)


def causality_scan(model, options: FieldOptions, x, t, transition: TransitionSpec,
                   collar: float = LIGHT_CONE_COLLAR):
    """Evaluate the field on a grid and compare outside- and inside-cone magnitudes."""
    if np.size(t) == 0 or np.size(x) == 0:
        raise ValueError("empty grid")
    sc = scan(model, x, t, transition, options, collar)
    mag = np.linalg.norm(sc.psi, axis=1)
    inside, outside = sc.zone == INSIDE, sc.zone == OUTSIDE
    peak_in = float(mag[inside].max()) if inside.any() else 0.0
    max_out = float(mag[outside].max()) if outside.any() else 0.0
    summary = {
        "points": len(sc),
        "inside": int(inside.sum()),
        "outside": int(outside.sum()),
        "on_cone": int((~inside & ~outside).sum()),
        "max_outside": max_out,
        "peak_inside": peak_in,
        "ratio": max_out / peak_in if peak_in > 0 else math.inf,
    }
    return sc, summary


def midfar_ratio(x, t, transition: TransitionSpec) -> complex:
    """psi^{A.p}/psi^{E.r} restricted to the mid and far zones at one point."""
    x, t, _ = check_points(x, t)
    if x.shape[0] != 1:
        raise ValueError("midfar_ratio takes a single point")
    if not t[0] - np.linalg.norm(x[0]) > LIGHT_CONE_COLLAR:
        raise ValueError("midfar_ratio needs a point inside the light cone")
    opts = FieldOptions(zones={"mid", "far"})
    ap = field(CouplingModel.AP_DIPOLE, x, t, transition, opts)[0]
    er = field(CouplingModel.ER_DIPOLE, x, t, transition, opts)[0]
    i = int(np.argmax(np.abs(er)))
    if abs(er[i]) == 0:
        raise ZeroDivisionError("E.r field vanishes at this point; ratio undefined")
    return complex(ap[i] / er[i])


def geometric_mean_radius(transition: TransitionSpec) -> float:
    """sqrt(a0 * 2 pi c / omega0) in metres."""
    c = transition.constants
    return math.sqrt(c.a0 * 2 * math.pi * c.c / transition.omega0)


@dataclass(frozen=True)
class RemanentEnergy:
    r_min: float
    closed_form: float
    quadrature: float

    @property
    def value(self) -> float:
        return self.closed_form

    @property
    def ev(self) -> float:
        return self.closed_form / SI.e_charge

    @property
    def relative_difference(self) -> float:
        return abs(self.quadrature - self.closed_form) / abs(self.closed_form)


def remanent_energy(r_min: float, transition: TransitionSpec) -> RemanentEnergy:
    """Energy of the static near-zone field outside radius ``r_min`` (SI, joules)."""
    if not r_min > 0:
        raise ValueError("r_min must be positive")
    eps0 = transition.constants.eps0
    mu = transition.mu_norm
    closed = mu**2 / (72 * math.pi * eps0 * r_min**3)
    # substitute r = r_min * u to keep the integrand O(1)
    scale = eps0 * (2 * math.pi / 3) * (mu / (4 * math.pi * eps0)) ** 2 / r_min**3
    val, _ = integrate.quad(lambda u: u**-4, 1.0, math.inf, epsabs=0.0, epsrel=1e-13)
    return RemanentEnergy(r_min, closed, scale * val)


def excitation_budget(threshold_energy: float, transition: TransitionSpec | None = None,
                      r_min: float | None = None, energy_per_excitation: float | None = None) -> int:
    """Number of excitations needed to accumulate ``threshold_energy`` (joules),
    assuming the remanent energy adds up from one excitation to the next."""
    if not threshold_energy > 0:
        raise ValueError("threshold_energy must be positive")
    if energy_per_excitation is None:
        if transition is None:
            raise ValueError("need a transition or an explicit energy per excitation")
        if r_min is None:
            r_min = geometric_mean_radius(transition)
        energy_per_excitation = remanent_energy(r_min, transition).value
    if not energy_per_excitation > 0:
        raise ValueError("remanent energy is zero; budget undefined")
    n = threshold_energy / energy_per_excitation
    nearest = round(n)
    if nearest > 0 and abs(n - nearest) <= 1e-9 * n:
        return int(nearest)
    return int(math.ceil(n))
