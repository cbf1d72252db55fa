import os

import pytest

from flowsieve.models.classifier import ModelSpec
from flowsieve.models.pipeline import PipelineConfig
from flowsieve.models.selection import SelectionTrace
from flowsieve.models.synth import SynthSpec
from flowsieve.services.artifact_service import ArtifactStore, save_dataset
from flowsieve.services.pipeline_service import run_pipeline
from flowsieve.services.run_service import RunService
from flowsieve.services.synth_service import generate_with_truth


@pytest.fixture(scope="module")
def finished_run(tmp_path_factory):
    d = generate_with_truth(SynthSpec(n_rows=300, n_informative=2, n_noise=3, seed=5)).dataset
    path = save_dataset(d, tmp_path_factory.mktemp("input") / "synth.npz")
    out = tmp_path_factory.mktemp("run")
    config = PipelineConfig(
        inputs=(str(path),),
        seed=3,
        output_dir=str(out),
        model=ModelSpec(kind="tree", params={"max_depth": 3}),
        cv_folds=0,
    )
    return out, run_pipeline(config, threads=1)


def test_missing_directory_loads_nothing(tmp_path):
    service = RunService()
    assert service.load(tmp_path / "absent") == {}
    assert service.config_hash(tmp_path / "absent") is None


def test_run_is_parsed_once_while_unchanged(finished_run, monkeypatch):
    out, result = finished_run
    service = RunService()
    run = service.load(out)
    assert isinstance(run["trace"], SelectionTrace)
    assert service.config_hash(out) == result.config_hash

    monkeypatch.setattr(ArtifactStore, "load_run", lambda self: pytest.fail("run was parsed again"))
    assert service.load(out) is run


def test_changed_artifacts_are_reloaded(finished_run, tmp_path):
    out, _ = finished_run
    copy = tmp_path / "copy"
    copy.mkdir()
    for path in out.iterdir():
        (copy / path.name).write_bytes(path.read_bytes())

    service = RunService()
    first = service.load(copy)
    assert "importance" in first

    os.remove(copy / "importance.json")
    second = service.load(copy)
    assert "importance" not in second
    assert second["trace"].a6 == first["trace"].a6


def test_forget_drops_the_cached_run(finished_run):
    out, _ = finished_run
    service = RunService()
    run = service.load(out)
    service.forget(out)
    again = service.load(out)
    assert again is not run
    assert again["trace"].a6 == run["trace"].a6
