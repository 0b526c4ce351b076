"""Estimator-style wrappers around the splitting and perturbative routines."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bath import BathSpec
from .perturbation import Expansion, KSeries, SpinModel
from .quadrature import QuadratureScheme
from .splitting import effective_hamiltonian, effective_hamiltonian_su, haar_mc_effective_hamiltonian, split
from .superop import RANDOM_TOL, commutator_superop
from .validation import check_generators, check_operators, check_times

_METHODS = ("elementary", "su", "haar_mc")


class MinimalDissipationSplit(TransformerMixin, BaseEstimator):
    """Map stacks of generators ``(n, d**2, d**2)`` to effective Hamiltonians ``(n, d, d)``.

    Stateless: ``fit`` only validates. ``inverse_transform`` returns the
    commutator superoperators ``-i[K, .]``.
    """

    def __init__(self, method="elementary", tol=RANDOM_TOL, samples=100_000, seed=0):
        self.method = method
        self.tol = tol
        self.samples = samples
        self.seed = seed

    def fit(self, X, y=None):
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}")
        X = check_generators(X)
        self.dim_ = int(round(np.sqrt(X.shape[1])))
        self.n_features_in_ = X.shape[1] ** 2
        return self

    def transform(self, X):
        check_is_fitted(self, "dim_")
        X = check_generators(X)
        if X.shape[1] != self.dim_**2:
            raise ValueError(f"fitted for d = {self.dim_}, got superoperators of side {X.shape[1]}")
        if self.method == "elementary":
            return np.array([effective_hamiltonian(L, tol=self.tol) for L in X])
        if self.method == "su":
            return np.array([effective_hamiltonian_su(L, tol=self.tol) for L in X])
        self.stderr_ = np.empty((len(X), self.dim_, self.dim_))
        out = np.empty((len(X), self.dim_, self.dim_), dtype=complex)
        for n, L in enumerate(X):
            out[n], self.stderr_[n] = haar_mc_effective_hamiltonian(L, samples=self.samples, seed=self.seed)
        return out

    def inverse_transform(self, K):
        K = check_operators(K)
        return np.array([commutator_superop(k) for k in K])

    def split(self, X):
        """Full splits (``GeneratorSplit`` objects) of every generator."""
        X = check_generators(X)
        return [split(L, tol=self.tol) for L in X]


class PerturbativeEffectiveHamiltonian(BaseEstimator):
    """``fit`` tabulates the bath on ``[0, horizon]``; ``predict(times)`` returns ``K(t)``.

    ``predict`` gives the Schrödinger-frame partial sum up to ``max_order``.
    """

    def __init__(self, omega=1.0, coupling=None, lam=0.1, bath=None, horizon=1.0, h=0.01, max_order=2):
        self.omega = omega
        self.coupling = coupling
        self.lam = lam
        self.bath = bath
        self.horizon = horizon
        self.h = h
        self.max_order = max_order

    def _model(self) -> SpinModel:
        if self.coupling is None:
            return SpinModel(self.omega, lam=self.lam)
        return SpinModel(self.omega, np.asarray(self.coupling), self.lam)

    def fit(self, X=None, y=None):
        if not isinstance(self.bath, BathSpec):
            raise TypeError("bath must be a BathSpec")
        self.expansion_ = Expansion(self._model(), self.bath, self.horizon, QuadratureScheme(self.h))
        return self

    def series(self, times) -> KSeries:
        check_is_fitted(self, "expansion_")
        return self.expansion_.series(check_times(times), self.max_order)

    def predict(self, times):
        return self.series(times).total
