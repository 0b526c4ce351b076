import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from effham.bath import BathSpec, OhmicExp
from effham.estimators import MinimalDissipationSplit, PerturbativeEffectiveHamiltonian
from effham.perturbation import SpinModel, k_series
from effham.superop import SIGMA_X, SIGMA_Z, commutator_superop, random_htp_generator


def _stack(rng, d=2, n=3):
    return np.array([random_htp_generator(d, rng) for _ in range(n)])


def test_split_params_and_clone():
    est = MinimalDissipationSplit(method="su", seed=4)
    params = est.get_params()
    assert params["method"] == "su" and params["seed"] == 4
    assert clone(est).get_params() == params


@pytest.mark.parametrize("method", ["elementary", "su"])
def test_transform_round_trip(rng, method):
    X = _stack(rng, d=3)
    K = MinimalDissipationSplit(method=method).fit_transform(X)
    assert K.shape == (3, 3, 3)
    assert np.allclose(K, K.conj().transpose(0, 2, 1))
    comm = MinimalDissipationSplit().fit(X).inverse_transform(K)
    again = MinimalDissipationSplit().fit_transform(comm)
    assert np.allclose(again, K, atol=1e-12)


def test_methods_agree(rng):
    X = _stack(rng)
    a = MinimalDissipationSplit().fit_transform(X)
    b = MinimalDissipationSplit(method="su").fit_transform(X)
    assert np.allclose(a, b, atol=1e-12)
    mc = MinimalDissipationSplit(method="haar_mc", samples=20_000, seed=1).fit(X)
    c = mc.transform(X)
    assert mc.stderr_.shape == (3, 2, 2)
    assert np.all(np.abs(c - a) <= 6 * mc.stderr_ + 1e-12)


def test_split_objects(rng):
    X = _stack(rng)
    for L, s in zip(X, MinimalDissipationSplit().split(X)):
        assert np.allclose(s.reconstruct(), L, atol=1e-12)


def test_transform_errors(rng):
    with pytest.raises(NotFittedError):
        MinimalDissipationSplit().transform(_stack(rng))
    with pytest.raises(ValueError):
        MinimalDissipationSplit(method="nope").fit(_stack(rng))
    est = MinimalDissipationSplit().fit(_stack(rng, d=2))
    with pytest.raises(ValueError):
        est.transform(_stack(rng, d=3))


def test_perturbative_predict():
    bath = BathSpec(OhmicExp(0.1, 5.0), beta=2.0)
    est = PerturbativeEffectiveHamiltonian(omega=1.0, coupling=SIGMA_X, lam=0.3, bath=bath,
                                           horizon=1.0, h=0.05, max_order=2).fit()
    times = [0.5, 1.0]
    ref = k_series(SpinModel(1.0, SIGMA_X, 0.3), bath, 2, times, 0.05)
    assert np.allclose(est.predict(times), ref.total, atol=1e-15)
    assert est.series(times).max_order == 2


def test_perturbative_defaults_and_errors():
    est = PerturbativeEffectiveHamiltonian(lam=0.0, bath=BathSpec(OhmicExp(0.1, 5.0)), h=0.1)
    assert np.allclose(est.fit().predict([0.5]), 0.5 * SIGMA_Z)
    with pytest.raises(NotFittedError):
        PerturbativeEffectiveHamiltonian(bath=BathSpec(OhmicExp(0.1, 5.0))).predict([0.5])
    with pytest.raises(TypeError):
        PerturbativeEffectiveHamiltonian().fit()


def test_inverse_transform_is_commutator():
    K = np.array([0.3 * SIGMA_Z])
    assert np.allclose(MinimalDissipationSplit().inverse_transform(K)[0], commutator_superop(0.3 * SIGMA_Z))
