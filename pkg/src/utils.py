"""General utility functions."""
from __future__ import annotations

import dataclasses
from typing import Any

import msgspec

__all__ = [
    "dataclass_as_dict_shallow",
    "deep_merge",
    "parse_assignment",
    "parse_int_list",
    "set_dotted",
]


def dataclass_as_dict_shallow(dataclass: Any) -> dict[str, Any]:
    """Convert a dataclass to a dict.

    Args:
        dataclass: The dataclass to convert.

    Returns:
        The dataclass as a dict.
    """
    return {field.name: getattr(dataclass, field.name) for field in dataclasses.fields(dataclass)}


def deep_merge(base: dict[str, Any], update: dict[str, Any]) -> dict[str, Any]:
    """Return ``base`` with ``update`` merged in; nested dicts merge, everything else replaces.

    Args:
        base: The defaults.
        update: Values taking precedence.

    Returns:
        A new dict.
    """
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def set_dotted(document: dict[str, Any], path: str, value: Any) -> None:
    """Set ``document["a"]["b"] = value`` for ``path="a.b"``, creating dicts on the way.

    Args:
        document: The dict to modify in place.
        path: Dot-separated key path.
        value: The value to store.
    """
    *parents, leaf = path.split(".")
    node = document
    for key in parents:
        child = node.get(key)
        if not isinstance(child, dict):
            child = node[key] = {}
        node = child
    node[leaf] = value


def parse_assignment(text: str) -> tuple[str, Any]:
    """Split ``key.path=value``; the value is read as JSON when it parses, else kept as a string.

    Args:
        text: The assignment.

    Returns:
        The key path and the value.

    Raises:
        ValueError: If there is no ``=`` or the key is empty.
    """
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key:
        msg = f"expected key=value, got {text!r}"
        raise ValueError(msg)
    try:
        return key, msgspec.json.decode(raw)
    except msgspec.DecodeError:
        return key, raw


def parse_int_list(text: str) -> list[int]:
    """Parse ``"0,1,2"`` into ``[0, 1, 2]``.

    Args:
        text: Comma-separated integers.

    Returns:
        The integers in order.
    """
    return [int(part) for part in text.split(",") if part.strip()]
