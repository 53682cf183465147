"""JSON persistence for knapsack game instances.

Schema::

    {"players": J, "markets": L, "alpha": [L], "beta": [L],
     "c": [[L] * J], "a": [[L] * J], "b": [J], "d": [[L] * J], "e": [L],
     "seed": int | null, "gamma": int | null}

All numbers are integers; matrices are lists of rows, one row per player.
"""

from __future__ import annotations

import json
from pathlib import Path

from .knapsack import KnapsackInstance


class InstanceFormatError(ValueError):
    """Malformed or invalid instance file."""


def dumps_instance(inst: KnapsackInstance) -> str:
    return json.dumps(inst.to_dict(), indent=2) + "\n"


def loads_instance(text: str, source: str = "<string>") -> KnapsackInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise InstanceFormatError(f"{source}: top-level value must be an object")
    for key, val in data.items():
        if isinstance(val, float) or (isinstance(val, list) and any(isinstance(v, float) for v in _flatten(val))):
            raise InstanceFormatError(f"{source}: field {key!r} must contain integers only")
    try:
        return KnapsackInstance.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"{source}: {exc}") from exc


def _flatten(values):
    for v in values:
        if isinstance(v, list):
            yield from _flatten(v)
        else:
            yield v


def write_instance(inst: KnapsackInstance, path) -> None:
    Path(path).write_text(dumps_instance(inst))


def read_instance(path) -> KnapsackInstance:
    path = Path(path)
    return loads_instance(path.read_text(), source=str(path))
