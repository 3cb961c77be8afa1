"""Constants, transition description, units and dyadic geometry.

Internal units: time in 1/omega0, length in c/omega0, fields in
``|mu| omega0**3 / (4 pi eps0 c**3)``.  In these units c = omega0 = 4 pi eps0 = 1
and the dipole reduces to its unit direction ``mu_hat``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import constants as _sc

from .exceptions import SingularityError

DIPOLE_PREFACTOR = math.sqrt(2.0) * 2**7 / 3**5  # |mu| in units of e*a0
LYMAN_ALPHA_WAVELENGTH = 121.567e-9


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float
    c: float
    eps0: float
    e_charge: float
    m_e: float
    a0: float

    def __post_init__(self):
        for name in ("hbar", "c", "eps0", "e_charge", "m_e", "a0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @classmethod
    def si(cls) -> "PhysicalConstants":
        hbar, eps0, m_e, e = _sc.hbar, _sc.epsilon_0, _sc.m_e, _sc.e
        a0 = 4 * math.pi * eps0 * hbar**2 / (m_e * e**2)
        return cls(hbar=hbar, c=_sc.c, eps0=eps0, e_charge=e, m_e=m_e, a0=a0)


SI = PhysicalConstants.si()


def xi(m2: int) -> np.ndarray:
    """Spherical basis vector for magnetic sublevel ``m2``."""
    if m2 == 0:
        return np.array([0.0, 0.0, 1.0], dtype=complex)
    if m2 in (-1, 1):
        return -m2 * np.array([1.0, 1j * m2, 0.0]) / math.sqrt(2.0)
    raise ValueError(f"m2 must be -1, 0 or +1, got {m2!r}")


def _as_weights(m2_weights) -> np.ndarray:
    w = np.asarray(m2_weights, dtype=complex).reshape(-1)
    if w.shape != (3,):
        raise ValueError("m2_weights needs exactly three amplitudes (m2 = -1, 0, +1)")
    return w


def dipole_moment(m2_weights, constants: PhysicalConstants = SI) -> np.ndarray:
    """Transition dipole in SI units (C m) from the 2p sublevel amplitudes.

    The weights are ordered (m2=-1, m2=0, m2=+1) and must be normalised.
    """
    w = _as_weights(m2_weights)
    if abs(np.sum(np.abs(w) ** 2) - 1.0) > 1e-12:
        raise ValueError("m2_weights must satisfy sum |w|^2 = 1")
    scale = DIPOLE_PREFACTOR * constants.e_charge * constants.a0
    return scale * (w[0] * xi(-1) + w[1] * xi(0) + w[2] * xi(1))


def _unit(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    n = np.linalg.norm(v)
    if n == 0 or not np.isfinite(n):
        raise ValueError(f"{name} must be a non-zero finite vector")
    return v / n


def polarization_basis(k_hat) -> tuple[np.ndarray, np.ndarray]:
    """Real transverse pair (e1, e2) with e1 ~ z x k and e2 = k x e1.

    Along +-z the pair is (x, +-y).
    """
    k = _unit(k_hat, "k_hat")
    zxk = np.cross([0.0, 0.0, 1.0], k)
    n = np.linalg.norm(zxk)
    if n < 1e-12:
        e1 = np.array([1.0, 0.0, 0.0])
        return e1, np.array([0.0, np.sign(k[2]), 0.0])
    e1 = zxk / n
    return e1, np.cross(k, e1)


def projectors(x_hat) -> tuple[np.ndarray, np.ndarray]:
    """Return (I - xx, I - 3xx) for direction ``x_hat``."""
    x = _unit(x_hat, "x_hat")
    xx = np.outer(x, x)
    eye = np.eye(3)
    return eye - xx, eye - 3 * xx


def split_points(x) -> tuple[np.ndarray, np.ndarray]:
    """Radius and unit direction for an (n, 3) array of positions."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise SingularityError("field point at the origin (x = 0)")
    return r, x / r[:, None]


@dataclass(frozen=True)
class TransitionSpec:
    """Two-level transition with Wigner-Weisskopf decay rate ``gamma``."""

    omega0: float
    gamma: float
    m2_weights: tuple = (0.0, 1.0, 0.0)
    omega_g: float = 0.0
    constants: PhysicalConstants = field(default=SI, repr=False)

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")
        if not 0 < self.gamma < self.omega0:
            raise ValueError("need 0 < gamma < omega0")
        w = _as_weights(self.m2_weights)
        if abs(np.sum(np.abs(w) ** 2) - 1.0) > 1e-12:
            raise ValueError("m2_weights must satisfy sum |w|^2 = 1")
        object.__setattr__(self, "m2_weights", tuple(complex(v) for v in w))

    @property
    def omega_e(self) -> float:
        return self.omega_g + self.omega0

    @property
    def mu(self) -> np.ndarray:
        return dipole_moment(self.m2_weights, self.constants)

    @property
    def mu_norm(self) -> float:
        return float(np.linalg.norm(self.mu))

    @property
    def mu_hat(self) -> np.ndarray:
        return self.mu / self.mu_norm

    @property
    def reduced_gamma(self) -> float:
        return self.gamma / self.omega0

    @property
    def Omega0(self) -> complex:
        """Complex frequency omega0 - i Gamma/2 (SI)."""
        return complex(self.omega0, -self.gamma / 2)

    @property
    def Omega0_internal(self) -> complex:
        return complex(1.0, -self.reduced_gamma / 2)

    @property
    def units(self) -> "Units":
        return Units(self.omega0, self.mu_norm, self.constants)

    @classmethod
    def preset(cls, name: str, m2_weights=(0.0, 1.0, 0.0)) -> "TransitionSpec":
        try:
            omega0, gamma = PRESETS[name]()
        except KeyError:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
        return cls(omega0=omega0, gamma=gamma, m2_weights=m2_weights)

    @classmethod
    def from_config(cls, cfg: dict) -> "TransitionSpec":
        """Build from a config mapping (keys as in the JSON config file)."""
        base = cls.preset(cfg.get("preset", "hydrogen-paper"))
        weights = cfg.get("m2_weights")
        if weights is not None:
            weights = [complex(re, im) for re, im in weights]
        else:
            weights = base.m2_weights
        omega0 = float(cfg.get("omega0_rad_s", base.omega0))
        gamma = cfg.get("gamma_rad_s")
        if gamma is None:
            gamma = base.gamma * omega0 / base.omega0
        elif cfg.get("units", "SI") == "internal":
            # gamma given in units of omega0
            gamma = gamma * omega0
        return cls(omega0=omega0, gamma=float(gamma), m2_weights=weights)

    @classmethod
    def from_json(cls, path) -> "TransitionSpec":
        return cls.from_config(json.loads(Path(path).read_text()))


def _lyman_alpha_omega0() -> float:
    return 2 * math.pi * SI.c / LYMAN_ALPHA_WAVELENGTH


PRESETS = {
    "hydrogen-paper": lambda: (_lyman_alpha_omega0(), _lyman_alpha_omega0() / 1e3),
    "hydrogen-literature": lambda: (_lyman_alpha_omega0(), 6.2649e8),
}


@dataclass(frozen=True)
class Units:
    """Conversion between SI and the internal dimensionless units."""

    omega0: float
    mu_norm: float
    constants: PhysicalConstants = SI

    @property
    def time(self) -> float:
        return 1.0 / self.omega0

    @property
    def length(self) -> float:
        return self.constants.c / self.omega0

    @property
    def wavenumber(self) -> float:
        return self.omega0 / self.constants.c

    @property
    def field(self) -> float:
        c = self.constants
        return self.mu_norm * self.omega0**3 / (4 * math.pi * c.eps0 * c.c**3)

    def to_internal(self, value, kind: str):
        return np.asarray(value) / getattr(self, kind)

    def to_si(self, value, kind: str):
        return np.asarray(value) * getattr(self, kind)
