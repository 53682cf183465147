import json

import numpy as np
import pytest

from mndsolver.instance_io import InstanceFormatError, dumps_instance, loads_instance, read_instance, write_instance
from mndsolver.knapsack import generate_instance


def test_round_trip(tmp_path):
    inst = generate_instance(17, 3, 4, gamma=50)
    path = tmp_path / "inst.json"
    write_instance(inst, path)
    back = read_instance(path)
    assert back.to_dict() == inst.to_dict()
    assert dumps_instance(back) == path.read_text()


def test_golden_file_parses(golden_path):
    inst = read_instance(golden_path)
    assert inst.alpha.tolist() == [947, 1024]
    assert inst.c.tolist() == [[35, 145], [823, 949]]
    assert inst.seed == 1 and inst.gamma == 1000


def test_budget_below_cost_is_rejected(golden_path):
    data = json.loads(golden_path.read_text())
    data["b"] = [data["b"][0] - 1, data["b"][1]]
    with pytest.raises(InstanceFormatError, match="budget"):
        loads_instance(json.dumps(data))


def test_syntax_error_has_location():
    with pytest.raises(InstanceFormatError, match=r"file.json:2:\d+"):
        loads_instance('{"players": 2,\n "markets": }', source="file.json")


def test_floats_rejected(golden_path):
    data = json.loads(golden_path.read_text())
    data["c"][0][0] = 35.5
    with pytest.raises(InstanceFormatError, match="integers"):
        loads_instance(json.dumps(data))


def test_missing_field_and_wrong_shape(golden_path):
    data = json.loads(golden_path.read_text())
    with pytest.raises(InstanceFormatError, match="missing"):
        loads_instance(json.dumps({k: v for k, v in data.items() if k != "d"}))
    with pytest.raises(InstanceFormatError):
        loads_instance(json.dumps({**data, "alpha": [1, 2, 3]}))
    with pytest.raises(InstanceFormatError):
        loads_instance("[1, 2]")


def test_arrays_are_read_only():
    inst = generate_instance(0, 2, 2)
    with pytest.raises(ValueError):
        inst.c[0, 0] = 1
    assert inst.c.dtype == np.int64
