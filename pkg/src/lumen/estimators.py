"""scikit-learn style wrappers around the field evaluator and the decay oracle."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_spacetime, parse_zones
from .atomkit import TransitionSpec
from .coupling import CouplingModel
from .fields import FieldOptions, field
from .oracle import ModeGrid, fit_decay, simulate_modes


class EmissionFieldEstimator(TransformerMixin, BaseEstimator):
    """Analytic single-photon field on rows of (x, y, z, t) in internal units.

    ``fit`` only resolves the transition and options; there is nothing to learn.
    ``predict`` returns the complex field (n, 3); ``transform`` returns the real
    features [Re psi, Im psi, |psi|^2] with shape (n, 7).
    """

    def __init__(self, coupling="ap-dip", longitudinal="off", zones="near,mid,far",
                 preset="hydrogen-paper"):
        self.coupling = coupling
        self.longitudinal = longitudinal
        self.zones = zones
        self.preset = preset

    def fit(self, X=None, y=None):
        self.model_ = CouplingModel.parse(self.coupling)
        if self.model_ is CouplingModel.AP_EXACT:
            raise ValueError("ap-exact has no analytic field; use the oracle reconstruction")
        if self.longitudinal not in ("off", "primitive", "amplitude"):
            raise ValueError("longitudinal must be off, primitive or amplitude")
        self.options_ = FieldOptions.from_flags(self.longitudinal, parse_zones(self.zones))
        self.transition_ = TransitionSpec.preset(self.preset)
        if X is not None:
            X = check_spacetime(X)
            self.n_features_in_ = 4
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "transition_")
        x, t = check_spacetime(X)
        return np.atleast_2d(field(self.model_, x, t, self.transition_, self.options_))

    def transform(self, X) -> np.ndarray:
        psi = self.predict(X)
        return np.hstack([psi.real, psi.imag, np.sum(np.abs(psi) ** 2, axis=1, keepdims=True)])


class DecayEstimator(BaseEstimator):
    """Integrates the mode equations and fits the excited-state decay.

    After ``fit`` the attributes ``gamma_eff_`` (units of omega0), ``omega_shift_``,
    ``r2_`` and ``norm_drift_`` are available.
    """

    def __init__(self, coupling="ap-dip", grid_preset="fine", preset="hydrogen-paper",
                 t_max_efolds=3.3, tol=1e-8):
        self.coupling = coupling
        self.grid_preset = grid_preset
        self.preset = preset
        self.t_max_efolds = t_max_efolds
        self.tol = tol

    def fit(self, X=None, y=None):
        if not self.t_max_efolds > 2:
            raise ValueError("t_max_efolds must exceed 2")
        tr = TransitionSpec.preset(self.preset)
        grid = ModeGrid.preset(self.grid_preset, tr.reduced_gamma)
        traj = simulate_modes(self.coupling, grid, tr, self.t_max_efolds / tr.reduced_gamma, self.tol)
        fit = fit_decay(traj)
        self.trajectory_ = traj
        self.gamma_eff_ = fit.gamma_eff
        self.omega_shift_ = fit.omega_shift
        self.r2_ = fit.r2
        in_window = traj.t <= fit.window
        self.norm_drift_ = float(np.max(np.abs(traj.norm[in_window] - 1.0)))
        return self

    def predict(self, X) -> np.ndarray:
        """Fitted |c_e(t)| at the times in X (any shape)."""
        check_is_fitted(self, "gamma_eff_")
        t = np.asarray(X, dtype=float).reshape(-1)
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise ValueError("times must be finite and non-negative")
        return np.exp(-self.gamma_eff_ * t / 2)

    def score(self, X=None, y=None) -> float:
        check_is_fitted(self, "gamma_eff_")
        return self.r2_
