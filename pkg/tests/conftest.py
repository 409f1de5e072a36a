import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from epilab import cli  # noqa: E402


@pytest.fixture(scope="session")
def corpus_run(tmp_path_factory):
    """One CLI run over the bundled corpus: ``(exit_code, out_dir, seconds)``."""
    out = tmp_path_factory.mktemp("corpus-run")
    t0 = time.perf_counter()
    code = cli.main(["run", "--out", str(out), "--emit-plots"])
    return code, out, time.perf_counter() - t0
