"""JSON space specs.

    {"kind": "grid" | "halfline" | "finite" | "free_union" | "product",
     "params": {...}, "core_radius": int, "padding": int}

params per kind: grid {"dim": d}; halfline {}; finite {"points": [...],
"dist": [[...]]} (also accepted at the top level); free_union {"parts":
[spec, ...]}; product {"factors": [spec, spec]}.  Nested specs only need
kind and params.  Errors name the offending field path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .spaces import AmbientSpec, MetricViolation

KINDS = ("grid", "halfline", "finite", "free_union", "product")


class SpecError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path or '<root>'}: {msg}")
        self.path = path


@dataclass
class LoadedSpace:
    spec: AmbientSpec
    core_radius: int | None
    padding: int | None
    labels: list | None = None
    source: str = ""


def _join(path: str, key: str | int) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else key


def _int(node: Any, path: str, minimum: int = 0) -> int:
    if isinstance(node, bool) or not isinstance(node, int):
        raise SpecError(path, f"expected an integer, got {json.dumps(node)}")
    if node < minimum:
        raise SpecError(path, f"must be >= {minimum}")
    return node


def _obj(node: Any, path: str) -> dict:
    if not isinstance(node, dict):
        raise SpecError(path, f"expected an object, got {type(node).__name__}")
    return node


def _list(node: Any, path: str) -> list:
    if not isinstance(node, list):
        raise SpecError(path, f"expected a list, got {type(node).__name__}")
    return node


def _finite(node: dict, params: dict, path: str) -> tuple[AmbientSpec, list]:
    src, ppath = (params, _join(path, "params")) if "dist" in params else (node, path)
    if "dist" not in src:
        raise SpecError(_join(path, "params.dist"), "missing distance table")
    dist = _list(src["dist"], _join(ppath, "dist"))
    n = len(dist)
    if n == 0:
        raise SpecError(_join(ppath, "dist"), "empty distance table")
    table = []
    for i, row in enumerate(dist):
        rpath = _join(_join(ppath, "dist"), i)
        row = _list(row, rpath)
        if len(row) != n:
            raise SpecError(rpath, f"row has {len(row)} entries, expected {n}")
        table.append([_int(x, _join(rpath, j)) for j, x in enumerate(row)])
    labels = src.get("points", list(range(n)))
    labels = _list(labels, _join(ppath, "points"))
    if len(labels) != n:
        raise SpecError(_join(ppath, "points"), f"{len(labels)} labels for {n} points")
    try:
        return AmbientSpec.finite(table), labels
    except MetricViolation as exc:
        raise SpecError(_join(ppath, "dist"), str(exc)) from exc


def parse_space(node: Any, path: str = "") -> tuple[AmbientSpec, list | None]:
    node = _obj(node, path)
    if "kind" not in node:
        raise SpecError(_join(path, "kind"), "missing")
    kind = node["kind"]
    if kind not in KINDS:
        raise SpecError(_join(path, "kind"), f"unknown kind {json.dumps(kind)}; expected one of {', '.join(KINDS)}")
    params = _obj(node.get("params", {}), _join(path, "params"))
    ppath = _join(path, "params")
    if kind == "grid":
        return AmbientSpec.grid(_int(params.get("dim", 1), _join(ppath, "dim"), 1)), None
    if kind == "halfline":
        return AmbientSpec.halfline(), None
    if kind == "finite":
        return _finite(node, params, path)
    key, count = ("parts", None) if kind == "free_union" else ("factors", 2)
    if key not in params:
        raise SpecError(_join(ppath, key), "missing")
    items = _list(params[key], _join(ppath, key))
    if not items or (count is not None and len(items) != count):
        raise SpecError(_join(ppath, key), f"expected {count or 'at least one'} entries, got {len(items)}")
    subs = [parse_space(x, _join(_join(ppath, key), i))[0] for i, x in enumerate(items)]
    if kind == "free_union":
        return AmbientSpec.free_union(*subs), None
    return AmbientSpec.product(*subs), None


def load_space(data: Any, source: str = "") -> LoadedSpace:
    spec, labels = parse_space(data)
    core = _int(data["core_radius"], "core_radius") if "core_radius" in data else None
    pad = _int(data["padding"], "padding") if "padding" in data else None
    return LoadedSpace(spec, core, pad, labels, source)


def load_space_file(path: str | Path) -> LoadedSpace:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return load_space(data, str(path))
