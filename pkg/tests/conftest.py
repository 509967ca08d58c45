import shutil
import sys
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def data_dir():
    return DATA


def copy_fixture(dest: Path) -> Path:
    shutil.copytree(DATA, dest, ignore=shutil.ignore_patterns("out"))
    return dest / "pipeline.toml"


@pytest.fixture(scope="session")
def fixture_run(tmp_path_factory):
    """The bundled 50-page fixture pushed through the whole pipeline once."""
    from taxoforge.pipeline import PipelineConfig, run_pipeline

    config_path = copy_fixture(tmp_path_factory.mktemp("run") / "fx")
    config = PipelineConfig.from_file(config_path)
    manifest = run_pipeline(config)
    return config, manifest


@pytest.fixture(scope="session")
def fixture_graph(fixture_run):
    from taxoforge.store import load

    config, _ = fixture_run
    return load(config.output_dir / "taxonomy.snapshot")
