import numpy as np
import pytest

from flowsieve.errors import ConfigError
from flowsieve.models.synth import SynthSpec
from flowsieve.services.stats_service import pearson
from flowsieve.services.synth_service import generate, generate_with_truth


def test_same_spec_same_dataset():
    spec = SynthSpec(n_rows=500, n_informative=2, n_noise=3, seed=42)
    assert generate(spec).fingerprint() == generate(spec).fingerprint()
    assert generate(spec).fingerprint() != generate(SynthSpec(n_rows=500, n_informative=2, n_noise=3, seed=43)).fingerprint()


def test_imbalance_sets_the_attack_share():
    d = generate(SynthSpec(n_rows=1000, n_informative=1, n_noise=1, imbalance=0.97, seed=1))
    assert d.class_counts() == {"benign": 30, "attack": 970}


def test_informative_features_correlate_with_both_signs(blobs):
    d = blobs.dataset
    r = [pearson(d.column(name), d.y) for name in blobs.informative]
    assert all(abs(v) > 0.3 for v in r)
    assert r[0] > 0 and r[1] < 0
    assert all(abs(pearson(d.column(name), d.y)) < 0.1 for name in blobs.noise)


def test_feature_names_and_truth(small_blobs):
    truth = small_blobs.ground_truth()
    assert small_blobs.dataset.feature_names[:3] == ("informative_0", "informative_1", "informative_2")
    assert truth["noise"] == [f"noise_{j}" for j in range(5)]
    assert truth["attack_means"] == {"informative_0": 6.0, "informative_1": -6.0, "informative_2": 6.0}
    assert truth["flipped_labels"] == 0
    assert sum(truth["class_counts"].values()) == 600


def test_label_noise_flips_labels():
    result = generate_with_truth(SynthSpec(n_rows=2000, n_informative=1, n_noise=0, label_noise=0.1, seed=3))
    assert 120 < result.flipped < 280


def test_zero_separation_gives_no_signal():
    d = generate(SynthSpec(n_rows=5000, n_informative=1, n_noise=0, separation=0.0, seed=9))
    assert abs(pearson(d.X[:, 0], d.y)) < 0.05


@pytest.mark.parametrize(
    "options",
    [
        {"n_rows": 5},
        {"n_informative": 0, "n_noise": 0},
        {"imbalance": 1.0},
        {"imbalance": 0.001},
        {"label_noise": 1.0},
        {"separation": -1.0},
    ],
)
def test_spec_validation(options):
    base = {"n_rows": 100, "n_informative": 1, "n_noise": 1}
    with pytest.raises(ConfigError):
        SynthSpec(**{**base, **options})


def test_spec_survives_json():
    spec = SynthSpec(n_rows=100, n_informative=2, n_noise=1, imbalance=0.3, seed=5)
    assert SynthSpec.from_dict(spec.to_dict()) == spec
    assert np.array_equal(generate(SynthSpec.from_dict(spec.to_dict())).X, generate(spec).X)
