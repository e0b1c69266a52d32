"""Plain-text graph files.

::

    # comment
    n 4
    e 1 2
    e 3 4
    p 1 1 2
    p 2 3 4

``e u v`` lines need ``1 <= u < v <= n`` and may not repeat.  The optional
``p`` lines give an ordered partition; together they must cover every vertex
exactly once.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from .decomp import Partition
from .graph import Graph

__all__ = ["GraphFormatError", "parse_graph_text", "format_graph_text", "read_graph", "write_graph"]


class GraphFormatError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _ints(fields: list[str], lineno: int) -> list[int]:
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise GraphFormatError(f"expected integers, got {' '.join(fields)!r}", lineno) from None


def parse_graph_text(text: str) -> tuple[Graph, Optional[Partition]]:
    n = None
    edges: list[tuple[int, int]] = []
    seen = set()
    parts: dict[int, list[tuple[int, int]]] = {}  # part -> [(vertex, line)]
    last = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last = lineno
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tag, *rest = line.split()
        if n is None:
            if tag != "n" or len(rest) != 1:
                raise GraphFormatError("first line must be 'n <count>'", lineno)
            (n,) = _ints(rest, lineno)
            if n < 0:
                raise GraphFormatError("negative vertex count", lineno)
            continue
        if tag == "e":
            if len(rest) != 2:
                raise GraphFormatError("edge line needs two vertices", lineno)
            u, v = _ints(rest, lineno)
            if not 1 <= u < v <= n:
                raise GraphFormatError(f"edge {u} {v} violates 1 <= u < v <= {n}", lineno)
            if (u, v) in seen:
                raise GraphFormatError(f"duplicate edge {u} {v}", lineno)
            seen.add((u, v))
            edges.append((u, v))
        elif tag == "p":
            if not rest:
                raise GraphFormatError("partition line needs a part index", lineno)
            idx, *members = _ints(rest, lineno)
            if idx < 1:
                raise GraphFormatError(f"part index {idx} must be positive", lineno)
            parts.setdefault(idx, []).extend((v, lineno) for v in members)
        elif tag == "n":
            raise GraphFormatError("repeated 'n' line", lineno)
        else:
            raise GraphFormatError(f"unknown line type {tag!r}", lineno)
    if n is None:
        raise GraphFormatError("missing 'n <count>' line", last)
    g = Graph(n, edges)
    if not parts:
        return g, None
    l = max(parts)
    assign = [0] * n
    for idx, members in parts.items():
        for v, lineno in members:
            if not 1 <= v <= n:
                raise GraphFormatError(f"partition vertex {v} out of range", lineno)
            if assign[v - 1]:
                raise GraphFormatError(f"vertex {v} in more than one part", lineno)
            assign[v - 1] = idx
    if 0 in assign:
        raise GraphFormatError(f"vertex {assign.index(0) + 1} missing from the partition", last)
    return g, Partition(l, tuple(assign))


def format_graph_text(g: Graph, pi: Optional[Partition] = None) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"e {u} {v}" for u, v in g.edges())
    if pi is not None:
        for i, part in enumerate(pi.parts(), start=1):
            lines.append(" ".join(["p", str(i), *map(str, part)]))
    return "\n".join(lines) + "\n"


def read_graph(path: Union[str, Path]) -> tuple[Graph, Optional[Partition]]:
    return parse_graph_text(Path(path).read_text())


def write_graph(path: Union[str, Path], g: Graph, pi: Optional[Partition] = None) -> None:
    Path(path).write_text(format_graph_text(g, pi))
