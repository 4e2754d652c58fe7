"""Graph document parsing and the bundled example graphs.

A graph document is a JSON object with keys ``random``, ``fixed``,
``directed``, ``bidirected`` and ``cardinalities``; missing cardinalities
default to 2.  The package ships one document per standard example graph
(four-variable chain with confounder, five-vertex hyper-edge graph, the
five-chain, the saturated four-vertex gadget, the instrumental-variables
triple, the bidirected 4-cycle and 3-cycle); CLI commands accept either a
path or one of these names.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .errors import MdagError, ParseError
from .graph import Mdag, build_mdag

ALIASES = {
    "verma": "fig3",
    "chain": "fig5a",
    "gadget": "fig7a",
    "iv": "fig8a",
    "4cycle": "fig9a",
}
EXAMPLE_NAMES = ("fig3", "fig4a", "fig5a", "fig7a", "fig8a", "fig9a", "3cycle")


def load_graph_document(text: str, *, maximality: str = "strict") -> Mdag:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("graph document must be a JSON object")
    unknown = set(doc) - {"random", "fixed", "directed", "bidirected", "cardinalities"}
    if unknown:
        raise ParseError(f"unknown keys in graph document: {sorted(unknown)}")
    try:
        return build_mdag(
            random=[str(v) for v in doc.get("random", [])],
            fixed=[str(v) for v in doc.get("fixed", [])],
            directed=[(str(a), str(b)) for a, b in doc.get("directed", [])],
            bidirected=[[str(v) for v in e] for e in doc.get("bidirected", [])],
            cards={str(k): int(v) for k, v in doc.get("cardinalities", {}).items()},
            maximality=maximality,
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed graph document: {exc}") from exc


def graph_to_document(g: Mdag) -> str:
    doc = {
        "random": list(g.random_vertices),
        "fixed": list(g.fixed_vertices),
        "directed": sorted([a, b] for a, b in g.directed_edges),
        "bidirected": [list(e) for e in g.bidirected_edges],
        "cardinalities": {v: c for v, c in g.cards},
    }
    return json.dumps(doc, indent=2) + "\n"


def example_names() -> tuple[str, ...]:
    return EXAMPLE_NAMES


def example_graph(name: str) -> Mdag:
    key = ALIASES.get(name, name)
    if key not in EXAMPLE_NAMES:
        raise ParseError(f"unknown example graph {name!r}; try one of {EXAMPLE_NAMES}")
    text = resources.files("mdag.data").joinpath(f"{key}.graph").read_text()
    return load_graph_document(text)


def resolve_graph_arg(arg: str, *, maximality: str = "strict") -> Mdag:
    """Load a graph from a file path, or fall back to a bundled example name."""
    path = Path(arg)
    if path.exists():
        try:
            return load_graph_document(path.read_text(), maximality=maximality)
        except OSError as exc:
            raise ParseError(f"cannot read {arg}: {exc}") from exc
    if arg in EXAMPLE_NAMES or arg in ALIASES:
        return example_graph(arg)
    raise ParseError(f"no such file or bundled example: {arg!r}")
