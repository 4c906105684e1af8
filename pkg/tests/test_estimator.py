import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pwaffine import ParameterError
from pwaffine.estimator import PhiTransformer, StaircaseTransformer

GOLDEN = (math.sqrt(5) - 1) / 2


def test_params_roundtrip():
    est = StaircaseTransformer(lam=0.9, mu=0.8)
    assert est.get_params()["lam"] == 0.9
    other = clone(est).set_params(mu=0.7)
    assert other.mu == 0.7 and est.mu == 0.8


def test_unfitted():
    with pytest.raises(NotFittedError):
        StaircaseTransformer().transform([0.75])


def test_staircase_transform():
    est = StaircaseTransformer().fit()
    out = est.transform(np.array([[0.75], [0.9], [2 / 3]]))
    assert out.shape == (3, 1)
    assert np.all(out == 0.5)
    assert est.boundaries_ == ["interior", "right_endpoint", "left_endpoint"]
    assert est.r_bound_ == 1.0


def test_staircase_inverse():
    est = StaircaseTransformer(lam=0.95, mu=0.9).fit()
    d = est.inverse_transform([GOLDEN])
    assert abs(d[0] - 0.6617) < 5e-5
    assert est.predict(d)[0] == pytest.approx(GOLDEN, abs=1e-3)


def test_bad_params():
    with pytest.raises(ParameterError):
        StaircaseTransformer(lam=1.2).fit()
    with pytest.raises(ParameterError):
        StaircaseTransformer().fit().transform([0.2])


def test_phi_transformer():
    est = PhiTransformer().fit()
    assert abs(est.delta_ - 0.6617) < 5e-5
    y = np.linspace(0, 0.99, 12)
    out = est.fit_transform(y)
    assert out[0] == pytest.approx(0, abs=1e-10)
    assert np.all(np.diff(out) > 0)


def test_phi_transformer_rejects_two_columns():
    with pytest.raises(ValueError):
        PhiTransformer().fit().transform(np.zeros((3, 2)))
