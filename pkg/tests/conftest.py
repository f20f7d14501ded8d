import pytest

from bookscore.config import parse_config
from bookscore.minicorpus import generate
from bookscore.pipeline import Pipeline


@pytest.fixture(scope="session")
def minicorpus_config(tmp_path_factory):
    """Generate the synthetic mini-corpus once per session."""
    root = tmp_path_factory.mktemp("minicorpus")
    return generate(root / "corpus")


@pytest.fixture(scope="session")
def minicorpus_run(minicorpus_config, tmp_path_factory):
    """Full pipeline run over the mini-corpus; returns (config, out_dir)."""
    out = tmp_path_factory.mktemp("mc-out")
    cfg = parse_config(minicorpus_config, {"output_dir": str(out)})
    Pipeline(cfg).run("all")
    return cfg, out
