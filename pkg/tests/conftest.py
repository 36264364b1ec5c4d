import pytest
import numpy as np
import yaml
from catsim.schema_definitions import DetectorModel
from dotenv import load_dotenv

load_dotenv()

ALPHA = 3.0

@pytest.fixture
def alpha():
    return ALPHA

@pytest.fixture
def ideal_detector():
    return DetectorModel(efficiency=1.0, vacuum_threshold=0)

@pytest.fixture
def lossy_detector():
    return DetectorModel(efficiency=0.9, vacuum_threshold=0)

@pytest.fixture(params=[0, 1, 2])
def rng(request):
    return np.random.default_rng(request.param)

@pytest.fixture
def config_file(tmp_path):
    """Writes a catsim YAML section and returns its path"""
    def _write(values: dict, name: str = "config.yaml"):
        path = tmp_path / name
        path.write_text(yaml.safe_dump({"catsim": values}))
        return str(path)
    return _write
