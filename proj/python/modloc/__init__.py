"""Python front end for the modloc checks.

Configs are YAML text, a path to a YAML file, or a nested dict with the same keys.
Reports come back as the dict form of report.json.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, Mapping, Union

import yaml

from . import _modloc
from ._modloc import (  # noqa: F401
    DomainError,
    NumericError,
    bw_residual,
    is_standard,
    list_checks,
    modular_data,
    one_particle,
    schema,
)

ConfigLike = Union[str, os.PathLike, Mapping]

__all__ = [
    "DomainError",
    "NumericError",
    "bw_residual",
    "config_text",
    "default_config",
    "is_standard",
    "list_checks",
    "load_config",
    "modular_data",
    "one_particle",
    "refine",
    "run",
    "schema",
]


def config_text(config: ConfigLike | None = None) -> str:
    if config is None:
        return _modloc.default_config()
    if isinstance(config, Mapping):
        return yaml.safe_dump(dict(config), sort_keys=False)
    if isinstance(config, os.PathLike) or (isinstance(config, str) and "\n" not in config and os.path.isfile(config)):
        with open(config, encoding="utf-8") as f:
            return f.read()
    return str(config)


def default_config() -> dict:
    return yaml.safe_load(_modloc.default_config())


def load_config(config: ConfigLike | None = None) -> dict:
    """Validated config with every default filled in; raises ValueError naming the offending field."""
    return yaml.safe_load(_modloc.normalize_config(config_text(config)))


def run(config: ConfigLike | None = None, criteria: Iterable[int] = (), include_volatile: bool = True) -> dict:
    return json.loads(_modloc.run_json(config_text(config), list(criteria), include_volatile))


def refine(config: ConfigLike, ladder: Iterable[int]) -> dict:
    return json.loads(_modloc.refine_json(config_text(config), list(ladder)))
