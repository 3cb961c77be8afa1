"""Atom-field matrix elements and Wigner-Weisskopf amplitudes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .atomkit import SI, TransitionSpec, polarization_basis


class CouplingModel(enum.Enum):
    ER_DIPOLE = "er-dip"
    AP_DIPOLE = "ap-dip"
    AP_EXACT = "ap-exact"

    @classmethod
    def parse(cls, value) -> "CouplingModel":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ValueError(
                f"unknown coupling model {value!r}; expected one of "
                f"{[m.value for m in cls]}"
            ) from None


@dataclass(frozen=True)
class ModeIndex:
    """Photon mode: wave vector (1/m) and polarisation index 1 or 2."""

    k: tuple
    lam: int

    def __post_init__(self):
        k = tuple(float(v) for v in self.k)
        if len(k) != 3 or not all(math.isfinite(v) for v in k):
            raise ValueError("k must be three finite components")
        if self.lam not in (1, 2):
            raise ValueError("polarisation index must be 1 or 2")
        object.__setattr__(self, "k", k)

    @property
    def k_norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.k))

    @property
    def polarization(self) -> np.ndarray:
        return polarization_basis(self.k)[self.lam - 1]


def cutoff(k_norm, a0: float = SI.a0):
    """Form factor [1 + (2 a0 k / 3)^2]^-2 of the exact A.p matrix element."""
    k = np.asarray(k_norm, dtype=float)
    if np.any(k < 0):
        raise ValueError("k_norm must be non-negative")
    val = 1.0 / (1.0 + (2.0 * a0 * k / 3.0) ** 2) ** 2
    return float(val) if val.ndim == 0 else val


def coupling(model, mode: ModeIndex, transition: TransitionSpec) -> complex:
    """G_lambda(k) in SI units for the chosen interaction model."""
    model = CouplingModel.parse(model)
    c = transition.constants
    k = mode.k_norm
    if k == 0:
        if model is CouplingModel.ER_DIPOLE:
            return 0j
        raise ValueError("A.p coupling diverges at k = 0")
    overlap = complex(np.vdot(mode.polarization, transition.mu))  # eps* . mu
    if model is CouplingModel.ER_DIPOLE:
        return -1j * math.sqrt(c.hbar * c.c * k / (16 * math.pi**3 * c.eps0)) * overlap
    g = -1j * transition.omega0 * math.sqrt(c.hbar / (16 * math.pi**3 * c.eps0 * c.c * k)) * overlap
    if model is CouplingModel.AP_EXACT:
        g *= cutoff(k, c.a0)
    return g


def reduced_coupling(model, k, overlap, reduced_gamma: float, a0_reduced: float = 0.0):
    """Dimensionless coupling for the internal-unit mode equations.

    ``k`` is in units of omega0/c and ``overlap`` is eps* . mu_hat.  The scale
    is set so that the golden-rule rate equals ``reduced_gamma`` (Gamma/omega0).
    """
    model = CouplingModel.parse(model)
    k = np.asarray(k, dtype=float)
    base = -1j * np.sqrt(3 * reduced_gamma / (16 * math.pi**2)) * np.asarray(overlap)
    if model is CouplingModel.ER_DIPOLE:
        return base * np.sqrt(k)
    g = base / np.sqrt(k)
    if model is CouplingModel.AP_EXACT:
        g = g * cutoff(k, a0_reduced)
    return g


def excited_amplitude(t, transition: TransitionSpec):
    """Bare excited amplitude c_e(t) = Theta(t) exp(-Gamma t / 2)."""
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 0, np.exp(-transition.gamma * np.maximum(t, 0) / 2), 0.0).astype(complex)
    return complex(out) if out.ndim == 0 else out


def ground_amplitude(mode: ModeIndex, t, model, transition: TransitionSpec):
    """c_{g,lambda}(k, t) obtained by integrating the ground-state equation
    with the exponential excited amplitude."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("ground_amplitude is defined for t >= 0")
    g = coupling(model, mode, transition)
    rate = 1j * (transition.constants.c * mode.k_norm - transition.omega0) - transition.gamma / 2
    out = (-1j / transition.constants.hbar) * g * np.expm1(rate * t) / rate
    return complex(out) if np.ndim(out) == 0 else out
