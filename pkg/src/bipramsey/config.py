"""Versioned default constants, loaded from the packaged ``defaults.json``."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=None)
def _raw() -> dict:
    return json.loads(resources.files(__package__).joinpath("defaults.json").read_text())


def load_defaults(path: str | None = None) -> dict:
    """Full config dict; ``path`` overrides the packaged file."""
    if path is None:
        return json.loads(json.dumps(_raw()))
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
