"""Lossless JSON encoding of fibertor records.

Every dataclass becomes an object tagged with ``"type"``; integers are
written as decimal strings so that arbitrarily large values survive any
JSON reader.  :func:`from_jsonable` rebuilds the original objects using
the dataclass field annotations.
"""
from __future__ import annotations

import dataclasses
import json
import types
import typing
from typing import Any

from .. import alexander, covers, group, intpoly, linalg, tower
from ..alexander import LaurentPoly
from ..group import FreeWord
from ..intpoly import IntPoly
from ..linalg import IntMatrix

_MODULES = (alexander, covers, group, intpoly, linalg, tower)


def _registry() -> dict[str, type]:
    reg: dict[str, type] = {}
    for mod in _MODULES:
        for name in dir(mod):
            obj = getattr(mod, name)
            if isinstance(obj, type) and dataclasses.is_dataclass(obj) and obj.__module__ == mod.__name__:
                reg[name] = obj
    return reg


REGISTRY = _registry()


def register(cls: type) -> type:
    """Make another dataclass round-trippable."""
    REGISTRY[cls.__name__] = cls
    return cls


def to_jsonable(obj: Any) -> Any:
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return obj
    if isinstance(obj, complex):
        return {"type": "complex", "re": obj.real, "im": obj.imag}
    if isinstance(obj, IntMatrix):
        return {"type": "IntMatrix", "rows": str(obj.rows), "cols": str(obj.cols),
                "entries": [str(x) for x in obj.entries]}
    if isinstance(obj, IntPoly):
        return {"type": "IntPoly", "coeffs": [str(c) for c in obj.coeffs]}
    if isinstance(obj, FreeWord):
        return {"type": "FreeWord", "word": str(obj)}
    if isinstance(obj, LaurentPoly):
        return {"type": "LaurentPoly", "nvars": str(obj.nvars),
                "terms": [[[str(x) for x in e], str(c)] for e, c in obj.terms]}
    if dataclasses.is_dataclass(obj):
        out = {"type": type(obj).__name__}
        for f in dataclasses.fields(obj):
            out[f.name] = to_jsonable(getattr(obj, f.name))
        return out
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def loads(text: str) -> Any:
    return from_jsonable(json.loads(text))


def _decode_tagged(data: dict) -> Any:
    tag = data["type"]
    if tag == "complex":
        return complex(data["re"], data["im"])
    if tag == "IntMatrix":
        return IntMatrix(int(data["rows"]), int(data["cols"]), tuple(int(x) for x in data["entries"]))
    if tag == "IntPoly":
        return IntPoly(tuple(int(c) for c in data["coeffs"]))
    if tag == "FreeWord":
        return FreeWord.parse(data["word"])
    if tag == "LaurentPoly":
        return LaurentPoly(int(data["nvars"]),
                           tuple((tuple(int(x) for x in e), int(c)) for e, c in data["terms"]))
    cls = REGISTRY.get(tag)
    if cls is None:
        raise ValueError(f"unknown record type {tag!r}")
    hints = typing.get_type_hints(cls)
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name in data:
            kwargs[f.name] = _decode(data[f.name], hints.get(f.name, Any))
    return cls(**kwargs)


def _decode(value: Any, hint: Any) -> Any:
    if isinstance(value, dict) and "type" in value:
        return _decode_tagged(value)
    if value is None:
        return None
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin in (typing.Union, types.UnionType):
        options = [a for a in args if a is not type(None)]
        for opt in options:
            try:
                return _decode(value, opt)
            except (TypeError, ValueError):
                continue
        raise ValueError(f"cannot decode {value!r} as {hint}")
    if origin in (tuple, list):
        if origin is tuple and len(args) == 2 and args[1] is Ellipsis:
            return tuple(_decode(v, args[0]) for v in value)
        if origin is tuple and args:
            return tuple(_decode(v, a) for v, a in zip(value, args))
        inner = args[0] if args else Any
        seq = [_decode(v, inner) for v in value]
        return tuple(seq) if origin is tuple else seq
    if hint is int:
        if isinstance(value, bool):
            raise TypeError("bool is not an int")
        return int(value)
    if hint is float:
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise TypeError("expected a string")
        return value
    if hint is bool:
        return bool(value)
    if isinstance(value, list):
        return tuple(_decode(v, Any) for v in value)
    return value


def from_jsonable(data: Any) -> Any:
    return _decode(data, Any)
