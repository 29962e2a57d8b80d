"""Plain-text configuration: one ``section.key = value`` per line.

Sections map onto the config dataclasses of each stage; ``pipeline.*``
holds the top-level fields.  Unknown keys are errors.  Angles are radians,
lengths metres.  ``none`` selects the automatic choice for optional fields.
"""

from __future__ import annotations

import dataclasses
import math
import types
import typing
from pathlib import Path

from .experience_map import RelaxConfig
from .local_view import LocalViewConfig
from .odometry import OdometryConfig
from .pipeline import SlamConfig
from .pose_cells import PoseCellConfig
from .sim import LidarModel


class ConfigError(ValueError):
    pass


SECTIONS = {
    "odometry": OdometryConfig,
    "local_view": LocalViewConfig,
    "pose_cells": PoseCellConfig,
    "relax": RelaxConfig,
    "lidar": LidarModel,
}
TOP_LEVEL = ("pc_match_radius", "seed")


def _coerce(text: str, tp, where: str):
    hints = typing.get_args(tp) if typing.get_origin(tp) in (typing.Union, types.UnionType) else ()
    optional = type(None) in hints
    if optional:
        if text.lower() == "none":
            return None
        tp = next(h for h in hints if h is not type(None))
    try:
        if tp is bool:
            low = text.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(text)
        if tp is int:
            return int(text)
        if tp is float:
            v = float(text)
            if math.isnan(v):
                raise ValueError(text)
            return v
        if tp is str:
            return text
    except ValueError:
        raise ConfigError(f"{where}: cannot read {text!r} as {tp.__name__}") from None
    raise ConfigError(f"{where}: unsupported field type {tp}")


def _field_types(cls) -> dict[str, object]:
    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in dataclasses.fields(cls) if f.init}


def parse_config(text: str, source: str = "<config>") -> SlamConfig:
    values: dict[str, dict[str, object]] = {s: {} for s in SECTIONS}
    top: dict[str, object] = {}
    top_types = _field_types(SlamConfig)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'section.key = value'")
        key, val = (p.strip() for p in line.split("=", 1))
        if "." not in key:
            raise ConfigError(f"{where}: key {key!r} needs a section prefix")
        section, name = key.split(".", 1)
        if section == "pipeline":
            if name not in TOP_LEVEL:
                raise ConfigError(f"{where}: unknown key {key!r}")
            top[name] = _coerce(val, top_types[name], f"{where}: {key}")
            continue
        if section not in SECTIONS:
            raise ConfigError(f"{where}: unknown section {section!r}")
        ftypes = _field_types(SECTIONS[section])
        if name not in ftypes:
            raise ConfigError(f"{where}: unknown key {key!r}")
        values[section][name] = _coerce(val, ftypes[name], f"{where}: {key}")
    try:
        parts = {s: cls(**values[s]) for s, cls in SECTIONS.items()}
        return SlamConfig(**parts, **top)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{source}: {e}") from None


def load_config(path: str | Path) -> SlamConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {p}: {e.strerror}") from None
    return parse_config(text, str(p))


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    return repr(v)


def dump_config(cfg: SlamConfig) -> str:
    """Inverse of :func:`parse_config`; every field is written out."""
    lines = []
    for section in SECTIONS:
        obj = getattr(cfg, section)
        for name in _field_types(type(obj)):
            lines.append(f"{section}.{name} = {_fmt(getattr(obj, name))}")
        lines.append("")
    for name in TOP_LEVEL:
        lines.append(f"pipeline.{name} = {_fmt(getattr(cfg, name))}")
    return "\n".join(lines) + "\n"
