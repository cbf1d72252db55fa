import logging
import math

import numpy as np
import pytest

from flowsieve.errors import ConfigError, DataError
from flowsieve.models.dataset import Dataset
from flowsieve.models.scaler import ScalerParams
from flowsieve.services.scaling_service import fit_scaler, transform


def _column(values, name="a"):
    return Dataset(feature_names=(name,), X=np.array(values, dtype=np.float64).reshape(-1, 1))


def test_fit_population_std():
    p = fit_scaler(_column([1, 2, 3]))
    assert p.mean.tolist() == [2.0]
    assert p.std[0] == pytest.approx(math.sqrt(2 / 3), abs=1e-12)
    assert p.ddof == 0


def test_fit_sample_std():
    p = fit_scaler(_column([1, 2, 3]), ddof=1)
    assert p.std[0] == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        fit_scaler(_column([1, 2, 3]), ddof=2)
    with pytest.raises(DataError):
        fit_scaler(_column([5]), ddof=1)


def test_fit_constant_and_single_row():
    p = fit_scaler(_column([5, 5, 5]))
    assert (p.mean[0], p.std[0]) == (5.0, 0.0)
    p = fit_scaler(_column([0]))
    assert (p.mean[0], p.std[0]) == (0.0, 0.0)


def test_fit_empty_dataset():
    with pytest.raises(DataError):
        fit_scaler(Dataset(feature_names=("a",), X=np.zeros((0, 1))))


def test_transform_z_scores():
    d = _column([1, 2, 3])
    out = transform(fit_scaler(d), d)
    assert out.X[:, 0] == pytest.approx([-1.224744871391589, 0.0, 1.224744871391589], abs=1e-12)
    assert out.scaled_with == fit_scaler(d).fingerprint


def test_transform_constant_column_is_zero():
    d = _column([5, 5, 5])
    assert transform(fit_scaler(d), d).X[:, 0].tolist() == [0.0, 0.0, 0.0]


def test_transform_keeps_labels_and_checks_names():
    d = Dataset(feature_names=("a", "b"), X=[[1.0, 2.0], [3.0, 5.0]], y=[0, 1])
    p = fit_scaler(d)
    out = transform(p, d)
    assert out.y.tolist() == [0, 1]
    with pytest.raises(DataError):
        transform(p, d.subset_features(["b", "a"]))


def test_transform_twice_warns(caplog):
    d = _column([1, 2, 4])
    p = fit_scaler(d)
    once = transform(p, d)
    with caplog.at_level(logging.WARNING, logger="flowsieve"):
        transform(p, once)
    assert "already standardized" in caplog.text


def test_fit_then_transform_has_zero_mean_unit_std(rng):
    d = Dataset(feature_names=("a", "b", "c"), X=rng.normal(3.0, 7.0, size=(500, 3)))
    out = transform(fit_scaler(d), d)
    assert np.abs(out.X.mean(axis=0)).max() < 1e-12
    assert out.X.std(axis=0) == pytest.approx([1.0, 1.0, 1.0], abs=1e-12)


def test_params_survive_json_with_feature_order():
    d = Dataset(feature_names=("zeta", "alpha"), X=[[1.0, 10.0], [3.0, 30.0]])
    p = fit_scaler(d)
    again = ScalerParams.from_dict(p.to_dict())
    assert again.feature_names == ("zeta", "alpha")
    assert again.fingerprint == p.fingerprint
    assert np.array_equal(transform(again, d).X, transform(p, d).X)


def test_transforming_another_dataset_warns(caplog):
    p = fit_scaler(_column([1, 2, 4]))
    with caplog.at_level(logging.INFO, logger="flowsieve"):
        transform(p, _column([7, 8]), foreign_ok=True)
    assert [r.levelno for r in caplog.records if "other than" in r.getMessage()] == [logging.INFO]

    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="flowsieve"):
        out = transform(p, _column([7, 8]))
    assert "other than the one the scaler was fit on" in caplog.text
    assert out.scaled_with == p.fingerprint


def test_fit_matches_exact_moments_on_awkward_values():
    values = [0.1] * 999 + [1e6]
    p = fit_scaler(_column(values))
    exact_mean = math.fsum(values) / len(values)
    assert p.mean[0] == pytest.approx(exact_mean, rel=1e-14)
    assert p.std[0] == pytest.approx(math.sqrt(math.fsum((v - exact_mean) ** 2 for v in values) / len(values)), rel=1e-12)
    assert fit_scaler(_column([0.1] * 1001)).std[0] == 0.0
