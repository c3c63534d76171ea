"""Bundled reference instances.

``table1``: the five-opportunity worked example (exponential response times).
``random20``: the twenty-opportunity randomly generated example.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .model import Instance, parse_instance_file

FIXTURES = {"table1": "table1.csv", "random20": "random20.json"}


def fixture_path(name: str) -> Path:
    try:
        filename = FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}") from None
    return Path(str(resources.files("oppsched") / "data" / filename))


def load_fixture(name: str) -> Instance:
    return parse_instance_file(fixture_path(name))
