"""JSON layout documents.

Schema (all keys required unless noted)::

    {
      "name": "rarity-tapster",
      "elements": [
        {"id": "S", "kind": "source"},
        {"id": "PS_alpha", "kind": "phase_shifter", "setting": 0.0},
        {"id": "M_a", "kind": "mirror", "phase": 0.0},            # phase optional
        {"id": "BS_L", "kind": "beamsplitter", "outputs": ["u", "d"],
         "split_ratio": 0.5},                                      # ratio optional
        {"id": "u", "kind": "detector"}
      ],
      "paths": [
        {"label": "a", "wing": "left",
         "traversals": [["S", "pass"], ["PS_alpha", "pass"], ["M_a", "pass"]],
         "exit": {"splitter": "BS_L", "port": 1}}
      ],
      "pairs": [["a", "a'"], ["b", "b'"]],                         # optional
      "congruent_pairs": [["b", "a'"]],                            # optional
      "detector_twins": [["u", "u'"], ["d", "d'"]],                # optional
      "params": {"alpha": 0.0, "beta": 0.0}                        # optional
    }
"""

from __future__ import annotations

import json
from pathlib import Path as FilePath

from .interferometer import Element, Layout, LayoutError, Path

_ELEMENT_KEYS = {"id", "kind", "setting", "phase", "outputs", "split_ratio"}


def layout_to_dict(layout: Layout) -> dict:
    elements = []
    for e in layout.elements:
        item = {"id": e.id, "kind": e.kind}
        if e.kind == "phase_shifter":
            item["setting"] = e.setting
        if e.kind == "mirror":
            item["phase"] = e.phase
        if e.kind == "beamsplitter":
            item["outputs"] = list(e.outputs)
            item["split_ratio"] = e.split_ratio
        elements.append(item)
    paths = [
        {
            "label": p.label,
            "wing": p.wing,
            "traversals": [list(t) for t in p.traversals],
            "exit": {"splitter": p.exit_splitter, "port": p.exit_port},
        }
        for p in layout.paths
    ]
    return {
        "name": layout.name,
        "elements": elements,
        "paths": paths,
        "pairs": [list(p) for p in layout.pairs],
        "congruent_pairs": [list(p) for p in layout.congruent_pairs],
        "detector_twins": [list(p) for p in layout.detector_twins],
        "params": dict(layout.params),
    }


def dumps_layout(layout: Layout) -> str:
    return json.dumps(layout_to_dict(layout), indent=2) + "\n"


def save_layout(layout: Layout, path) -> None:
    FilePath(path).write_text(dumps_layout(layout))


def _require(obj, key, where):
    if not isinstance(obj, dict):
        raise LayoutError(f"{where}: expected an object")
    if key not in obj:
        raise LayoutError(f"{where}: missing field {key!r}")
    return obj[key]


def _pairs(doc, key):
    out = []
    for k, item in enumerate(doc.get(key, [])):
        if not (isinstance(item, list) and len(item) == 2):
            raise LayoutError(f"{key}[{k}]: expected a two-element list")
        out.append((str(item[0]), str(item[1])))
    return tuple(out)


def layout_from_dict(doc: dict) -> Layout:
    elements = []
    for k, item in enumerate(_require(doc, "elements", "layout")):
        where = f"elements[{k}]"
        eid = _require(item, "id", where)
        kind = _require(item, "kind", where)
        unknown = set(item) - _ELEMENT_KEYS
        if unknown:
            raise LayoutError(f"{where}: unknown fields {sorted(unknown)}")
        try:
            elements.append(Element(
                id=str(eid),
                kind=str(kind),
                setting=float(item.get("setting", 0.0)),
                phase=float(item.get("phase", 0.0)),
                outputs=tuple(item["outputs"]) if "outputs" in item else None,
                split_ratio=float(item.get("split_ratio", 0.5)),
            ))
        except (TypeError, ValueError) as exc:
            raise LayoutError(f"{where}: {exc}") from None
    paths = []
    for k, item in enumerate(_require(doc, "paths", "layout")):
        where = f"paths[{k}]"
        exit_ = _require(item, "exit", where)
        try:
            paths.append(Path(
                label=str(_require(item, "label", where)),
                wing=str(_require(item, "wing", where)),
                traversals=tuple(tuple(t) for t in _require(item, "traversals", where)),
                exit_splitter=str(_require(exit_, "splitter", f"{where}.exit")),
                exit_port=int(_require(exit_, "port", f"{where}.exit")),
            ))
        except (TypeError, ValueError) as exc:
            raise LayoutError(f"{where}: {exc}") from None
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise LayoutError("params: expected an object")
    return Layout(
        name=str(doc.get("name", "layout")),
        elements=tuple(elements),
        paths=tuple(paths),
        pairs=_pairs(doc, "pairs"),
        congruent_pairs=_pairs(doc, "congruent_pairs"),
        detector_twins=_pairs(doc, "detector_twins"),
        params=tuple((str(k), float(v)) for k, v in params.items()),
    )


def loads_layout(text: str) -> Layout:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LayoutError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return layout_from_dict(doc)


def load_layout(path) -> Layout:
    """Read a layout document; raises ``OSError`` or :class:`LayoutError`."""
    return loads_layout(FilePath(path).read_text())
