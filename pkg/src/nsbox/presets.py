"""Named measurement settings, frozen in ``presets.json`` (angles in units of pi)."""

from __future__ import annotations

import functools
import json
import math
from importlib import resources

from nsbox.errors import ArgumentError
from nsbox.measurement import PartySettings


@functools.lru_cache(maxsize=None)
def _load() -> dict:
    return json.loads(resources.files("nsbox").joinpath("presets.json").read_text())


def presets_version() -> int:
    return int(_load()["version"])


def preset_names() -> list[str]:
    return list(_load()["presets"])


def _party(angles, signs) -> PartySettings:
    return PartySettings.from_angles([(t * math.pi, p * math.pi) for t, p in angles], signs)


def get_preset(name: str) -> tuple[PartySettings, PartySettings]:
    """(Alice, Bob) settings of a named preset."""
    try:
        entry = _load()["presets"][name]
    except KeyError:
        raise ArgumentError(f"unknown basis preset {name!r}; choose from {', '.join(preset_names())}") from None
    return _party(entry["alice"], entry.get("alice_sign")), _party(entry["bob"], entry.get("bob_sign"))


def preset_for_parties(name: str, n: int) -> list[PartySettings]:
    """Preset settings for ``n`` parties; beyond two parties the preset must treat both sides alike."""
    alice, bob = get_preset(name)
    if n == 2:
        return [alice, bob]
    if alice != bob:
        raise ArgumentError(f"preset {name!r} differs between parties and cannot be extended to {n} parties")
    return [alice] * n
