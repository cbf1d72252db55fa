from pathlib import Path
from typing import Callable, List, Sequence

import numpy as np
import pytest

from flowsieve.models.dataset import Dataset
from flowsieve.models.synth import SynthSpec
from flowsieve.services.synth_service import generate_with_truth


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


@pytest.fixture
def write_csv(tmp_path: Path) -> Callable[[str, str], Path]:
    """Write raw CSV text to a file under tmp_path."""

    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


def make_dataset(columns: Sequence[Sequence[float]], y: Sequence[int], names: List[str] = None) -> Dataset:
    X = np.column_stack([np.asarray(c, dtype=np.float64) for c in columns])
    names = names or [f"f{j}" for j in range(X.shape[1])]
    return Dataset(feature_names=tuple(names), X=X, y=np.asarray(y))


@pytest.fixture(scope="session")
def blobs():
    """6-sigma blobs: 5000 rows, 3 informative and 7 noise features."""
    return generate_with_truth(SynthSpec(n_rows=5000, n_informative=3, n_noise=7, seed=7))


@pytest.fixture(scope="session")
def small_blobs():
    return generate_with_truth(SynthSpec(n_rows=600, n_informative=3, n_noise=5, seed=11))


@pytest.fixture
def label_copy_dataset(rng) -> Dataset:
    """f0 equals the label, f1 is its complement, f2 is noise."""
    y = rng.integers(0, 2, size=1000)
    y[:2] = [0, 1]
    return make_dataset([y, 1 - y, rng.standard_normal(1000)], y)


CIC_IDS_TEXT = (
    "Flow ID, Source IP, Destination Port, Flow Duration,Timestamp, Total Fwd Packets, Label\n"
    "a,10.0.0.1,80,100,t1,3,BENIGN\n"
    "b,10.0.0.2,443,200,t2,Infinity,DDoS\n"
    "c,10.0.0.3,53,NaN,t3,5,BENIGN\n"
    "d,10.0.0.4,80,400,t4,6,DDoS\n"
    "e,10.0.0.5,22,500,t5,7,PortScan\n"
    "f,10.0.0.6,80,600,t6,8,BENIGN\n"
)


@pytest.fixture
def cic_ids_csv(write_csv) -> Path:
    """Six CIC IDS 2017 style rows: space-prefixed headers, one NaN, one Infinity, one PortScan."""
    return write_csv("ids.csv", CIC_IDS_TEXT)


@pytest.fixture
def dataset_of() -> Callable[..., Dataset]:
    return make_dataset
