"""Self-checks of the library's physical claims, run by ``lumen verify-all``
and by the acceptance test module."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field as dc_field

import numpy as np
import sympy as sp

from .atomkit import SI, TransitionSpec
from .coupling import CouplingModel, ModeIndex, coupling, cutoff
from .estimators import DecayEstimator
from .fields import (OUTSIDE, FieldOptions, causality_scan, classify, field,
                     geometric_mean_radius, remanent_energy, scan)
from .kernels import (KernelModel, classical_harmonic, er_ap_structure_check, kernel,
                      longitudinal_harmonic, transverse_harmonic)
from .oracle import compare, reconstruct_scan


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: dict = dc_field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: measured={self.measured:.3e} tolerance={self.tolerance:.3e}"

    def as_dict(self) -> dict:
        return asdict(self)


def light_cone_grid(transition: TransitionSpec, n_r: int = 40, n_dir: int = 5, n_t: int = 60,
                    seed: int = 0):
    """Points with |x| in [0.01, 10] c/omega0 and t in [0, 20/Gamma]; half of the
    times fall within the first 12/omega0 so the cone is crossed densely."""
    rng = np.random.default_rng(seed)
    radii = np.geomspace(0.01, 10.0, n_r)
    dirs = rng.normal(size=(n_dir, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    t_end = 20.0 / transition.reduced_gamma
    half = n_t // 2
    times = np.concatenate([np.linspace(0.0, 12.0, half), np.geomspace(12.5, t_end, n_t - half)])
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    x = np.repeat(pts, times.size, axis=0)
    t = np.tile(times, pts.shape[0])
    return x, t


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - start
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def check_causal_confinement(transition, seed=0):
    x, t = light_cone_grid(transition, seed=seed)
    _, summary = causality_scan(CouplingModel.AP_DIPOLE, FieldOptions(True, "primitive"),
                                x, t, transition)
    ok = summary["ratio"] <= 1e-12 and summary["outside"] > 0 and summary["inside"] > 0
    return CheckResult("causal-confinement", ok, summary["ratio"], 1e-12, summary)


@_timed
def check_noncausal_transverse(transition, seed=0):
    x, t = light_cone_grid(transition, seed=seed)
    sc = scan(CouplingModel.AP_DIPOLE, x, t, transition, FieldOptions(False, zones={"near"}))
    out = sc.zone == OUTSIDE
    xo, to = x[out], t[out]
    r = np.linalg.norm(xo, axis=1)
    xh = xo / r[:, None]
    mu = transition.mu_hat
    ps_mu = mu[None, :] - 3 * xh * (xh @ mu)[:, None]
    om = transition.Omega0_internal
    expected = (np.abs(1 / om) * np.abs(np.exp(-1j * om * to) - 1)
                * np.linalg.norm(ps_mu, axis=1) / r**3)
    got = np.linalg.norm(sc.psi[out], axis=1)
    nz = expected > 0
    rel = np.abs(got[nz] - expected[nz]) / expected[nz]
    zero_ok = bool(np.all(got[~nz] <= 1e-300))
    worst = float(rel.max()) if rel.size else math.inf
    detail = {"outside_points": int(out.sum()), "max_outside_abs": float(got.max()),
              "exact_zero_points_ok": zero_ok}
    return CheckResult("noncausal-transverse", worst <= 1e-12 and zero_ok, worst, 1e-12, detail)


def _inside_points(n, rng, r_range=(0.05, 10.0), lag_range=(0.05, 50.0)):
    r = rng.uniform(*r_range, n)
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return r[:, None] * d, r + rng.uniform(*lag_range, n)


@_timed
def check_midfar_ratio(transition, seed=0):
    rng = np.random.default_rng(seed)
    x, t = _inside_points(1000, rng)
    opts = FieldOptions(zones={"mid", "far"})
    ap = field(CouplingModel.AP_DIPOLE, x, t, transition, opts)
    er = field(CouplingModel.ER_DIPOLE, x, t, transition, opts)
    target = 1 / transition.Omega0_internal
    mask = np.abs(er) > 1e-9 * np.abs(er).max(axis=1, keepdims=True)
    rel = np.abs(ap[mask] / er[mask] - target) / abs(target)
    worst = float(rel.max())
    return CheckResult("midfar-ratio", worst <= 1e-12, worst, 1e-12,
                       {"components": int(mask.sum()), "target": [target.real, target.imag]})


@_timed
def check_classical_decomposition(transition, seed=0):
    rng = np.random.default_rng(seed)
    lam = SI.c / transition.omega0
    worst = 0.0
    for _ in range(100):
        d = rng.normal(size=3)
        x = d / np.linalg.norm(d) * rng.uniform(0.01, 10.0) * lam
        omega = rng.uniform(0.05, 5.0) * transition.omega0
        full = classical_harmonic(x, omega)
        parts = longitudinal_harmonic(x, omega) + transverse_harmonic(x, omega)
        worst = max(worst, float(np.linalg.norm(full - parts) / np.linalg.norm(full)))
    s_t = kernel(KernelModel.CLASSICAL_TRANSVERSE).instantaneous_sum(0)
    s_l = kernel(KernelModel.CLASSICAL_LONGITUDINAL).instantaneous_sum(0)
    shapes = set(s_t) | set(s_l)
    symbolic = {sh.value: str(sp.simplify(s_t.get(sh, 0) + s_l.get(sh, 0))) for sh in shapes}
    symbolic_zero = all(sp.simplify(s_t.get(sh, 0) + s_l.get(sh, 0)) == 0 for sh in shapes)
    ok = worst <= 1e-12 and symbolic_zero and bool(shapes)
    return CheckResult("classical-decomposition", ok, worst, 1e-12,
                       {"instantaneous_sum": symbolic, "symbolic_zero": symbolic_zero})


@_timed
def check_structure(transition=None, seed=0):
    res = er_ap_structure_check()
    return CheckResult("er-ap-structure", bool(res["passed"]), 0.0 if res["passed"] else 1.0, 0.0, res)


@_timed
def check_coupling_ratios(transition, seed=0):
    rng = np.random.default_rng(seed)
    k0 = transition.omega0 / SI.c
    w_er = w_cut = 0.0
    for _ in range(1000):
        d = rng.normal(size=3)
        k = d / np.linalg.norm(d) * k0 * 10 ** rng.uniform(-2, 4)
        mode = ModeIndex(tuple(k), int(rng.integers(1, 3)))
        ap = coupling(CouplingModel.AP_DIPOLE, mode, transition)
        if abs(ap) == 0:
            continue
        er = coupling(CouplingModel.ER_DIPOLE, mode, transition)
        ex = coupling(CouplingModel.AP_EXACT, mode, transition)
        kn = mode.k_norm
        r1 = SI.c * kn / transition.omega0
        w_er = max(w_er, abs(er / ap - r1) / r1)
        r2 = cutoff(kn, transition.constants.a0)
        w_cut = max(w_cut, abs(ex / ap - r2) / r2)
    worst = max(w_er, w_cut)
    return CheckResult("coupling-ratios", worst <= 1e-12, worst, 1e-12,
                       {"er_over_ap": w_er, "exact_over_dip": w_cut})


@_timed
def check_oracle_decay(transition=None, seed=0, grid_preset="fine", coupling_model="ap-dip"):
    est = DecayEstimator(coupling=coupling_model, grid_preset=grid_preset).fit()
    tr = TransitionSpec.preset(est.preset)
    detail = {"gamma_eff": est.gamma_eff_, "gamma_configured": tr.reduced_gamma,
              "gamma_rel_diff": abs(est.gamma_eff_ - tr.reduced_gamma) / tr.reduced_gamma,
              "omega_shift": est.omega_shift_, "r2": est.r2_, "norm_drift": est.norm_drift_}
    ok = est.r2_ > 0.999 and est.norm_drift_ < 1e-6
    return CheckResult("oracle-decay", ok, 1 - est.r2_, 1e-3, detail)


def reconstruction_points(n_inside=25, n_outside=25, seed=0):
    """Sample points kept >= 0.3/omega0 away from the light cone and from t = 0."""
    rng = np.random.default_rng(seed)
    xi, ti = _inside_points(n_inside, rng, (0.5, 10.0), (0.3, 30.0))
    r = rng.uniform(1.0, 10.0, n_outside)
    d = rng.normal(size=(n_outside, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    to = rng.uniform(0.3, np.maximum(r - 0.3, 0.31))
    return np.vstack([xi, r[:, None] * d]), np.concatenate([ti, to])


@_timed
def check_reconstruction(transition, seed=0):
    x, t = reconstruction_points(seed=seed)
    detail, ok, worst = {}, True, 0.0
    for group, zones, tol in (("far+mid", {"far", "mid"}, 0.02), ("near", {"near"}, 0.05)):
        ana = scan(CouplingModel.AP_DIPOLE, x, t, transition, FieldOptions(zones=zones))
        num = reconstruct_scan(transition, CouplingModel.AP_DIPOLE, x, t, zones=zones)
        rep = compare(ana, num, rms_tol=tol)
        detail[group] = rep
        ok = ok and rep["passed"]
        worst = max(worst, rep["all"]["rms_rel"] / tol)
    return CheckResult("oracle-reconstruction", ok, worst, 1.0, detail)


QUOTED_REMANENT_EV = 1e-4


@_timed
def check_remanent_energy(transition, seed=0):
    r_min = geometric_mean_radius(transition)
    e = remanent_energy(r_min, transition)
    factor = QUOTED_REMANENT_EV / e.ev
    within = 1e-2 <= factor <= 1e2
    detail = {"r_min_m": r_min, "energy_J": e.value, "energy_eV": e.ev,
              "quoted_eV": QUOTED_REMANENT_EV, "quoted_over_computed": factor,
              "quadrature_rel_diff": e.relative_difference}
    return CheckResult("remanent-energy", e.relative_difference <= 1e-10 and within,
                       e.relative_difference, 1e-10, detail)


@_timed
def check_footnote_mode(transition, seed=0):
    rng = np.random.default_rng(seed)
    x, t = _inside_points(1000, rng)
    near = {"near"}
    amp = field(CouplingModel.AP_DIPOLE, x, t, transition, FieldOptions(True, "amplitude", near))
    er = field(CouplingModel.ER_DIPOLE, x, t, transition, FieldOptions(zones=near))
    factor = 1 / transition.Omega0_internal
    scale = np.linalg.norm(er, axis=1)
    rel = np.linalg.norm(amp - factor * er, axis=1) / scale
    literal = np.linalg.norm(amp - er, axis=1) / scale
    worst = float(rel.max())
    # outside the cone: static field (omega0/Omega0) P_S mu / r^3 remains
    r = rng.uniform(1.0, 10.0, 200)
    d = rng.normal(size=(200, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    xo, to = r[:, None] * d, rng.uniform(0.0, 0.9, 200) * r
    if not np.all(classify(xo, to) == OUTSIDE):
        raise RuntimeError("outside-cone sample landed inside the cone")
    static = field(CouplingModel.AP_DIPOLE, xo, to, transition, FieldOptions(True, "amplitude", near))
    min_static = float(np.min(np.linalg.norm(static, axis=1) * r**3))
    detail = {"max_rel_vs_scaled_er": worst, "max_rel_vs_literal_er": float(literal.max()),
              "scale_factor": [factor.real, factor.imag],
              "min_outside_static_times_r3": min_static}
    ok = worst <= 1e-12 and min_static > 0
    return CheckResult("footnote-amplitude-mode", ok, worst, 1e-12, detail)


CHECKS = {
    "causal-confinement": check_causal_confinement,
    "noncausal-transverse": check_noncausal_transverse,
    "midfar-ratio": check_midfar_ratio,
    "classical-decomposition": check_classical_decomposition,
    "er-ap-structure": check_structure,
    "coupling-ratios": check_coupling_ratios,
    "oracle-decay": check_oracle_decay,
    "oracle-reconstruction": check_reconstruction,
    "remanent-energy": check_remanent_energy,
    "footnote-amplitude-mode": check_footnote_mode,
}


def run_all(transition: TransitionSpec | None = None, seed: int = 0, names=None) -> list:
    transition = transition or TransitionSpec.preset("hydrogen-paper")
    unknown = set(names or ()) - set(CHECKS)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    return [fn(transition, seed=seed) for name, fn in CHECKS.items()
            if names is None or name in names]
