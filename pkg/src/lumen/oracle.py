"""Brute-force checks: mode-amplitude ODEs and numerical radial reconstruction
of the transverse field.  Everything here is in internal units."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ._validation import ZONE_POWERS, check_points, parallel_map, parse_zones
from .atomkit import TransitionSpec, polarization_basis
from .coupling import CouplingModel, cutoff, reduced_coupling
from .exceptions import AccuracyError, FitError, IntegratorError
from .fields import INSIDE, OUTSIDE, FieldScan, classify


# --------------------------------------------------------------------------
# mode grid and ODE


@dataclass(frozen=True)
class ModeGrid:
    k: np.ndarray            # radial nodes, units of omega0/c
    weights: np.ndarray      # radial quadrature weights
    directions: np.ndarray   # (n_ang, 3) unit vectors
    ang_weights: np.ndarray  # sums to 4 pi
    polarizations: np.ndarray  # (n_ang, 2, 3)

    def __post_init__(self):
        if np.any(self.weights <= 0) or np.any(self.ang_weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if abs(self.ang_weights.sum() - 4 * math.pi) > 1e-10:
            raise ValueError("angular weights must sum to 4 pi")
        if np.any(self.k <= 0):
            raise ValueError("radial nodes must be positive")

    @classmethod
    def build(cls, reduced_gamma: float, half_width: float = 50.0, spacing: float = 0.05,
              n_theta: int = 6, n_phi: int = 12) -> "ModeGrid":
        """Uniform midpoint radial rule on [1 - W, 1 + W] with W = half_width * gamma
        and node spacing ``spacing * gamma``; Gauss-Legendre x uniform angular rule."""
        if half_width < 20:
            raise ValueError("half_width must be at least 20 linewidths")
        w = half_width * reduced_gamma
        lo = max(0.0, 1.0 - w)
        n = int(round((1.0 + w - lo) / (spacing * reduced_gamma)))
        if n < 2:
            raise ValueError("radial grid needs at least two nodes")
        dk = (1.0 + w - lo) / n
        k = lo + dk * (np.arange(n) + 0.5)
        ct, wt = np.polynomial.legendre.leggauss(n_theta)
        phi = 2 * math.pi * np.arange(n_phi) / n_phi
        st = np.sqrt(1 - ct**2)
        dirs = np.stack([np.outer(st, np.cos(phi)), np.outer(st, np.sin(phi)),
                         np.outer(ct, np.ones(n_phi))], axis=-1).reshape(-1, 3)
        aw = np.outer(wt, np.full(n_phi, 2 * math.pi / n_phi)).reshape(-1)
        pols = np.array([polarization_basis(d) for d in dirs])
        return cls(k, np.full(n, dk), dirs, aw, pols)

    @classmethod
    def preset(cls, name: str, reduced_gamma: float) -> "ModeGrid":
        if name == "coarse":
            return cls.build(reduced_gamma, half_width=20.0, spacing=0.2)
        if name == "fine":
            return cls.build(reduced_gamma, half_width=50.0, spacing=0.05)
        raise ValueError(f"unknown grid preset {name!r}")

    def coupling_strengths(self, model, transition: TransitionSpec) -> np.ndarray:
        """g_j^2 = sum over directions and polarisations of |G|^2, per radial node."""
        overlap = np.einsum("apx,x->ap", self.polarizations, transition.mu_hat)  # eps . mu
        a0 = transition.constants.a0 * transition.omega0 / transition.constants.c
        g = reduced_coupling(model, self.k[:, None, None], overlap[None], transition.reduced_gamma, a0)
        return np.einsum("jap,a->j", np.abs(g) ** 2, self.ang_weights)


@dataclass
class Trajectory:
    t: np.ndarray
    c_e: np.ndarray
    c_g: np.ndarray  # (n_t, n_radial) collective amplitude per radial shell
    norm: np.ndarray


def simulate_modes(model, grid: ModeGrid, transition: TransitionSpec, t_max: float,
                   tol: float = 1e-8, n_samples: int = 600, decoupled: bool = False) -> Trajectory:
    """Integrate the coupled amplitude equations from c_e = 1, c_g = 0.

    Modes sharing |k| evolve in proportion to their coupling, so each radial
    shell is represented by one collective amplitude whose norm is the shell's
    sum of |c_g|^2 weighted by the mode measure.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    strength = np.zeros(grid.k.size) if decoupled else grid.coupling_strengths(model, transition)
    a = np.sqrt(grid.weights * grid.k**2 * strength)
    detune = grid.k - 1.0

    def rhs(t, y):
        ph = np.exp(1j * detune * t)
        out = np.empty_like(y)
        out[0] = -1j * np.dot(a * np.conj(ph), y[1:])
        out[1:] = -1j * a * ph * y[0]
        return out

    y0 = np.zeros(grid.k.size + 1, dtype=complex)
    y0[0] = 1.0
    ts = np.linspace(0.0, t_max, n_samples)
    sol = solve_ivp(rhs, (0.0, t_max), y0, method="DOP853", t_eval=ts,
                    rtol=tol, atol=tol * 1e-3)
    if not sol.success:
        raise IntegratorError(sol.message)
    c_e, c_g = sol.y[0], sol.y[1:].T
    norm = np.abs(c_e) ** 2 + np.sum(np.abs(c_g) ** 2, axis=1)
    return Trajectory(sol.t, c_e, c_g, norm)


@dataclass(frozen=True)
class DecayFit:
    gamma_eff: float
    omega_shift: float
    residual: float
    r2: float
    window: float


def fit_decay(traj: Trajectory, window_efolds: float = 3.0) -> DecayFit:
    """Least-squares fit of log|c_e| (slope -gamma/2) and the unwrapped phase
    over t in [0, window_efolds / gamma_eff]."""
    amp = np.abs(traj.c_e)
    if amp.min() <= 0 or np.log(amp[0] / amp[-1]) < 1.0:
        raise FitError("trajectory must cover at least two e-foldings of |c_e|^2")
    t = traj.t
    mask = np.ones_like(t, dtype=bool)
    for _ in range(3):
        slope, intercept = np.polyfit(t[mask], np.log(amp[mask]), 1)
        gamma = -2 * slope
        if gamma <= 0:
            raise FitError("no decay in trajectory")
        new = t <= window_efolds / gamma
        if new.sum() < 3 or np.array_equal(new, mask):
            break
        mask = new
    y = np.log(amp[mask])
    pred = intercept + slope * t[mask]
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    phase = np.unwrap(np.angle(traj.c_e[mask]))
    shift = -np.polyfit(t[mask], phase, 1)[0]
    return DecayFit(float(gamma), float(shift), math.sqrt(ss_res / mask.sum()),
                    1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
                    float(t[mask][-1]))


# --------------------------------------------------------------------------
# adaptive Gauss-Kronrod (G7/K15) over vectorised panels

_XK = np.array([0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                0.207784955007898467600689403773245, 0.0])
_WK = np.array([0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
GAUSS = np.zeros(15)
GAUSS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])


def gauss_kronrod(func, breakpoints, rtol: float = 1e-9, max_rounds: int = 40,
                  max_panels: int = 2_000_000):
    """Integrate a vector-valued ``func(k) -> (n, m)`` over the union of panels.

    Panels are bisected until the summed |K15 - G7| estimate per component is
    below ``rtol`` times that component's integral of |func|.
    """
    edges = np.asarray(breakpoints, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    total = None
    l1 = None
    done_err = None
    for _ in range(max_rounds):
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        k = mid[:, None] + half[:, None] * NODES[None, :]
        vals = func(k.reshape(-1)).reshape(k.shape + (-1,))
        kr = np.einsum("pnm,n->pm", vals, KRONROD) * half[:, None]
        ga = np.einsum("pnm,n->pm", vals, GAUSS) * half[:, None]
        ab = np.einsum("pnm,n->pm", np.abs(vals), KRONROD) * half[:, None]
        err = np.abs(kr - ga)
        if total is None:
            total = np.zeros(kr.shape[1], dtype=kr.dtype)
            l1 = ab.sum(axis=0)
            done_err = np.zeros(kr.shape[1])
        budget = rtol * np.maximum(l1, np.finfo(float).tiny)
        share = budget[None, :] * (2 * half[:, None]) / (edges[-1] - edges[0])
        ok = np.all(err <= share, axis=1)
        total += kr[ok].sum(axis=0)
        done_err += err[ok].sum(axis=0)
        if ok.all():
            return total, done_err
        lo_b, hi_b = lo[~ok], hi[~ok]
        m = (lo_b + hi_b) / 2
        lo, hi = np.concatenate([lo_b, m]), np.concatenate([m, hi_b])
        if lo.size > max_panels:
            break
    raise AccuracyError(f"Gauss-Kronrod quadrature did not converge ({lo.size} open panels)")


# --------------------------------------------------------------------------
# field reconstruction


@dataclass(frozen=True)
class ReconstructionSettings:
    cutoff_on: bool = False
    negative_k: bool | None = None   # default: on unless cutoff_on
    smoothing: float | None = None   # Gaussian regulator width (1/omega0); default 0.02 if cutoff off
    rtol: float = 1e-9

    def resolved(self):
        neg = (not self.cutoff_on) if self.negative_k is None else self.negative_k
        sig = self.smoothing
        if sig is None:
            sig = 0.0 if self.cutoff_on else 0.02
        if not self.cutoff_on and sig <= 0:
            raise ValueError("without the cutoff the k integral needs a smoothing width > 0")
        return neg, sig


def radial_integrand(transition: TransitionSpec, model, rho: float, tau: float, k,
                     cutoff_on: bool = False, smoothing: float = 0.0):
    """Scalar (far, mid, near) integrands of the radial k integral, shape (n, 3).

    The field is -(i/2pi) * integral of these times (P_T mu, P_S mu, P_S mu).
    """
    model = CouplingModel.parse(model)
    k = np.asarray(k, dtype=float)
    om = transition.Omega0_internal
    diff = k - om
    evol = np.exp(-1j * k * tau) * np.expm1(-1j * (om - k) * tau) / (1j * diff)
    weight = evol
    if model is CouplingModel.ER_DIPOLE:
        weight = weight * k
    if cutoff_on or model is CouplingModel.AP_EXACT:
        a0 = transition.constants.a0 * transition.omega0 / transition.constants.c
        weight = weight * cutoff(np.abs(k), a0)
    if smoothing > 0:
        weight = weight * np.exp(-0.5 * (k * smoothing) ** 2)
    kr = k * rho
    s = np.sin(kr)
    far = 2 / rho * k * s
    mid = 2 / rho**2 * np.cos(kr)
    near = -2 / rho**2 * np.sinc(kr / np.pi)
    return np.stack([far, mid, near], axis=-1) * weight[..., None]


def _breakpoints(lo: float, hi: float, rho: float, tau: float, gamma: float):
    h = min(math.pi / (rho + tau + 1.0), 0.25)
    pts = list(np.linspace(lo, hi, max(2, int(math.ceil((hi - lo) / h)) + 1)))
    width = max(gamma, 1.0 / (tau + 1.0))
    for res in (1.0, -1.0):
        pts += [res + j * width / 4 for j in range(-12, 13)]
    pts = np.unique(np.clip(pts, lo, hi))
    return pts


def reconstruct_zones(transition: TransitionSpec, model, x, t,
                      settings: ReconstructionSettings = ReconstructionSettings()) -> dict:
    """Numerically reconstructed transverse field per radial zone at one point."""
    x, t, _ = check_points(x, t)
    if x.shape[0] != 1:
        raise ValueError("reconstruct_zones takes a single point")
    rho, tau = float(np.linalg.norm(x[0])), float(t[0])
    if not tau > 0:
        raise ValueError("reconstruction needs t > 0")
    negative_k, sigma = settings.resolved()
    cutoff_on = settings.cutoff_on or CouplingModel.parse(model) is CouplingModel.AP_EXACT
    if sigma > 0:
        kmax = 9.0 / sigma
    else:
        a0 = transition.constants.a0 * transition.omega0 / transition.constants.c
        kmax = 60.0 / a0  # form factor ~ (a0 k)^-4 leaves < 1e-7 beyond this
    lo = -kmax if negative_k else 0.0

    def f(k):
        return radial_integrand(transition, model, rho, tau, k, cutoff_on, sigma)

    ints, _ = gauss_kronrod(f, _breakpoints(lo, kmax, rho, tau, transition.reduced_gamma),
                            rtol=settings.rtol)
    scal = -1j / (2 * math.pi) * ints
    xh = x[0] / rho
    mu = transition.mu_hat
    pt_mu = mu - xh * np.dot(xh, mu)
    ps_mu = mu - 3 * xh * np.dot(xh, mu)
    return {"far": scal[0] * pt_mu, "mid": scal[1] * ps_mu, "near": scal[2] * ps_mu}


def reconstruct_field(transition: TransitionSpec, model, x, t, cutoff_on: bool = False,
                      zones=frozenset(ZONE_POWERS), **settings):
    """Transverse field psi(x, t) from the radial k integral; points may be (n, 3)."""
    zones = parse_zones(zones)
    cutoff_on = cutoff_on or CouplingModel.parse(model) is CouplingModel.AP_EXACT
    cfg = ReconstructionSettings(cutoff_on=cutoff_on, **settings)
    x, t, single = check_points(x, t)

    def one(i):
        parts = reconstruct_zones(transition, model, x[i], t[i], cfg)
        return sum(parts[z] for z in zones)

    out = np.array(parallel_map(one, range(len(t))))
    return out[0] if single else out


def reconstruct_scan(transition: TransitionSpec, model, x, t, zones=frozenset(ZONE_POWERS),
                     cutoff_on: bool = False, **settings) -> FieldScan:
    x, t, _ = check_points(x, t)
    psi = np.atleast_2d(reconstruct_field(transition, model, x, t, cutoff_on, zones, **settings))
    return FieldScan(x, t, psi, classify(x, t), f"reconstructed-{CouplingModel.parse(model).value}")


# --------------------------------------------------------------------------
# scan comparison


def _errors(a: np.ndarray, b: np.ndarray) -> dict:
    diff = np.linalg.norm(a - b, axis=1)
    ref = np.linalg.norm(a, axis=1)
    scale = ref.max() if ref.size else 0.0
    denom = math.sqrt(np.sum(ref**2))
    return {
        "points": int(a.shape[0]),
        "max_abs": float(diff.max()) if diff.size else 0.0,
        "max_rel": float(diff.max() / scale) if scale > 0 else (0.0 if not diff.any() else math.inf),
        "rms_rel": float(math.sqrt(np.sum(diff**2)) / denom) if denom > 0
        else (0.0 if not diff.any() else math.inf),
    }


def compare(analytic: FieldScan, numeric: FieldScan, rms_tol: float | None = None) -> dict:
    """Max and normalised-RMS errors of ``numeric`` against ``analytic``,
    overall and per light-cone zone."""
    if analytic.x.shape != numeric.x.shape or not (
        np.allclose(analytic.x, numeric.x, rtol=1e-12, atol=0)
        and np.allclose(analytic.t, numeric.t, rtol=1e-12, atol=0)
    ):
        raise ValueError("scans are on different grids")
    report = {"all": _errors(analytic.psi, numeric.psi)}
    for zone in (INSIDE, OUTSIDE):
        m = analytic.zone == zone
        if m.any():
            report[zone] = _errors(analytic.psi[m], numeric.psi[m])
    if rms_tol is not None:
        report["tolerance"] = rms_tol
        report["passed"] = report["all"]["rms_rel"] <= rms_tol
    return report
