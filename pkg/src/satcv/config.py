"""Scenario configuration: TOML parsing, JSON-schema validation and sweeps."""

from __future__ import annotations

import copy
import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ValidationError

SCHEME_LEGS = {
    "uplink": ("uplink",),
    "downlink": ("downlink",),
    "reflect": ("uplink", "downlink"),
    "dual_downlink": ("downlink",),
    "swap_relay": ("arm_a", "arm_b"),
}

DEFAULT_METRICS = {
    "uplink": ["mean_loss_db", "log_negativity", "key_rate"],
    "downlink": ["mean_loss_db", "log_negativity", "key_rate"],
    "reflect": ["mean_loss_db", "log_negativity", "key_rate"],
    "dual_downlink": ["mean_loss_db", "log_negativity"],
    "swap_relay": ["log_negativity"],
}


def load_schema() -> dict:
    text = resources.files("satcv").joinpath("config_schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated scenario document plus the directory relative paths resolve against."""

    data: dict
    base_dir: Path = Path(".")

    @property
    def scheme(self) -> str:
        return self.data["scheme"]

    @property
    def name(self) -> str:
        return self.data.get("name", self.scheme)

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 0))

    @property
    def metrics(self) -> list[str]:
        return list(self.data.get("metrics", {}).get("compute", DEFAULT_METRICS[self.scheme]))

    def sweep_points(self) -> list[dict]:
        """One fully resolved config dict per sweep value (a single point without a sweep)."""
        sweep = self.data.get("sweep")
        if sweep is None:
            return [self.data]
        points = []
        for value in sweep["values"]:
            d = copy.deepcopy(self.data)
            set_path(d, sweep["path"], value)
            points.append(d)
        return points

    def to_toml(self) -> str:
        return tomli_w.dumps(self.data)


def set_path(data: dict, dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            raise ValidationError(f"sweep path {dotted!r}: {k!r} is not a table")
        node = node[k]
    if keys[-1] not in node:
        raise ValidationError(f"sweep path {dotted!r} does not name an existing field")
    node[keys[-1]] = value


def validate(data: dict) -> None:
    try:
        jsonschema.validate(data, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"config invalid at {where}: {exc.message}") from None
    legs = data["channel"]
    missing = [leg for leg in SCHEME_LEGS[data["scheme"]] if leg not in legs]
    if missing:
        raise ValidationError(f"scheme {data['scheme']!r} needs channel legs {missing}")
    if data["scheme"] == "reflect" and legs["downlink"]["model"] == "beam_wander":
        raise ValidationError("reflect scheme composes a fading uplink with a fixed downlink")
    if "sweep" in data:
        probe = copy.deepcopy(data)
        set_path(probe, data["sweep"]["path"], data["sweep"]["values"][0])
        try:
            jsonschema.validate(probe, load_schema())
        except jsonschema.ValidationError as exc:
            raise ValidationError(f"sweep values produce an invalid config: {exc.message}") from None


def parse_config(text: str, base_dir: str | Path = ".") -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"TOML syntax error: {exc}") from None
    validate(data)
    return ScenarioConfig(data, Path(base_dir))


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, path.parent)
