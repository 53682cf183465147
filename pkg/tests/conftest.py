import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mndsolver.knapsack import KnapsackInstance  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def golden_path() -> Path:
    return DATA / "golden_seed1_2x2.json"


@pytest.fixture(scope="session")
def golden(golden_path) -> KnapsackInstance:
    return KnapsackInstance.from_dict(json.loads(golden_path.read_text()))


def pytest_terminal_summary(terminalreporter):
    module = next((m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance")), None)
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
