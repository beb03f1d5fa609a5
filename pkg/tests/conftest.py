import pytest

from rfchain.chain import AnalysisState, Chain
from rfchain.config import default_config


@pytest.fixture
def chain():
    return Chain()


@pytest.fixture
def noiseless_chain():
    return Chain(analysis=AnalysisState(noiseless=True))


@pytest.fixture
def cfg():
    return default_config()


@pytest.fixture
def cli(capsys):
    """Run the CLI in-process and capture (exit_code, stdout, stderr)."""
    from rfchain.cli import main

    def run(*argv):
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return run
