"""scikit-learn style wrappers around the staircase and the conjugation."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .conjugation import ConjugationSpec, phi_eval
from .core import ParameterError, check_rho, d_bound, r_bound, validate_params
from .heckemahler import SeriesTolerance, delta_of_rho
from .rotation import DEFAULT_MAX_DEN, rho_exact

__all__ = ["StaircaseTransformer", "PhiTransformer"]


def _column(X):
    arr = check_array(X, ensure_2d=False, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] != 1:
        raise ValueError(f"expected a single column, got shape {arr.shape}")
    return arr, arr.ravel()


def _check_lam_mu(lam, mu):
    if not 0 < lam < 1:
        raise ParameterError(f"lambda must satisfy 0 < lambda < 1, got {lam!r}")
    if not mu > 0:
        raise ParameterError(f"mu must be positive, got {mu!r}")


class StaircaseTransformer(TransformerMixin, BaseEstimator):
    """Maps delta to the rotation number rho(lam, mu, delta), and back.

    ``transform`` returns the exact rational as a float, or the midpoint of
    the Farey bracket when no rational with denominator up to ``max_den``
    matches.  ``inverse_transform`` evaluates delta(lam, mu, rho).
    """

    def __init__(self, lam=0.5, mu=0.5, max_den=DEFAULT_MAX_DEN, tol=1e-12):
        self.lam = lam
        self.mu = mu
        self.max_den = max_den
        self.tol = tol

    def fit(self, X=None, y=None):
        _check_lam_mu(self.lam, self.mu)
        self.r_bound_ = r_bound(self.lam, self.mu)
        self.d_bound_ = d_bound(self.lam, self.mu)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "r_bound_")
        arr, flat = _column(X)
        out = np.empty_like(flat)
        self.boundaries_ = []
        for i, d in enumerate(flat):
            res = rho_exact(validate_params(self.lam, self.mu, float(d)), max_den=self.max_den)
            out[i] = res.estimate
            self.boundaries_.append(res.boundary)
        return out.reshape(arr.shape)

    def inverse_transform(self, X):
        check_is_fitted(self, "r_bound_")
        arr, flat = _column(X)
        tol = SeriesTolerance(abs_tol=self.tol)
        out = np.array([delta_of_rho(self.lam, self.mu, float(r), tol) for r in flat])
        return out.reshape(arr.shape)

    def predict(self, X):
        return self.transform(X)


class PhiTransformer(TransformerMixin, BaseEstimator):
    """Maps y to phi(y) for fixed (lam, mu, rho).

    With ``delta=None`` the fitted ``delta_`` is delta(lam, mu, rho), the
    value for which phi conjugates the rotation to the lift of f.
    """

    def __init__(self, lam=0.95, mu=0.9, rho=0.6180339887498949, delta=None, tol=1e-12):
        self.lam = lam
        self.mu = mu
        self.rho = rho
        self.delta = delta
        self.tol = tol

    def fit(self, X=None, y=None):
        _check_lam_mu(self.lam, self.mu)
        check_rho(self.lam, self.mu, self.rho)
        tol = SeriesTolerance(abs_tol=self.tol)
        self.delta_ = self.delta if self.delta is not None else delta_of_rho(self.lam, self.mu, self.rho, tol)
        self.spec_ = ConjugationSpec(validate_params(self.lam, self.mu, self.delta_), self.rho, tol)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "spec_")
        arr, flat = _column(X)
        out = np.array([float(phi_eval(self.spec_, float(v))) for v in flat])
        return out.reshape(arr.shape)
