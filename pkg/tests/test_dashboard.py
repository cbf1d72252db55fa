import pytest
from streamlit.testing.v1 import AppTest

from flowsieve.config import DASHBOARD_RUN_DIR_ENV, DASHBOARD_TITLE
from flowsieve.models.classifier import ModelSpec
from flowsieve.models.pipeline import PipelineConfig
from flowsieve.models.synth import SynthSpec
from flowsieve.services.artifact_service import save_dataset
from flowsieve.services.pipeline_service import run_pipeline
from flowsieve.services.synth_service import generate_with_truth


def _dashboard():
    from flowsieve.ui.main import main

    main()


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    d = generate_with_truth(SynthSpec(n_rows=300, n_informative=2, n_noise=3, seed=9)).dataset
    path = save_dataset(d, tmp_path_factory.mktemp("input") / "synth.npz")
    out = tmp_path_factory.mktemp("run")
    config = PipelineConfig(
        inputs=(str(path),),
        seed=1,
        output_dir=str(out),
        model=ModelSpec(kind="gbdt", params={"rounds": 5, "max_depth": 2}),
        cv_folds=2,
    )
    run_pipeline(config, threads=1)
    return out


def test_dashboard_renders_a_finished_run(run_dir, monkeypatch):
    monkeypatch.setenv(DASHBOARD_RUN_DIR_ENV, str(run_dir))
    at = AppTest.from_function(_dashboard, default_timeout=30).run()
    assert not at.exception
    assert not at.error
    assert at.title[0].value == DASHBOARD_TITLE
    assert [tab.label for tab in at.tabs] == ["Selection", "Metrics", "Importance", "Run"]
    assert at.subheader[0].value.startswith("Feature selection:")


def test_dashboard_reports_an_empty_directory(tmp_path, monkeypatch):
    monkeypatch.setenv(DASHBOARD_RUN_DIR_ENV, str(tmp_path / "nothing"))
    at = AppTest.from_function(_dashboard, default_timeout=30).run()
    assert not at.exception
    assert "No artifacts found" in at.info[0].value
    assert not at.tabs
