"""JSON readers/writers for graphs, distributions, schedules and reports."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .dist import Distribution
from .errors import GraphMCError, InvalidOverride, LabelMismatch
from .graph import Graph
from .planner import Schedule, make_schedule

PathLike = Union[str, Path]


def _read(path: PathLike) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise GraphMCError(f"cannot read {path}: {exc}") from exc


def load_graph(path: PathLike) -> Graph:
    obj = _read(path)
    try:
        return Graph.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, GraphMCError):
            raise
        raise GraphMCError(f"malformed graph file {path}: {exc}") from exc


def load_dist(path: PathLike, graph: Optional[Graph] = None) -> Distribution:
    """Read a distribution; with ``graph`` given, reorder onto its labels."""
    obj = _read(path)
    try:
        d = Distribution.from_json(obj)
    except (KeyError, TypeError) as exc:
        raise GraphMCError(f"malformed distribution file {path}: {exc}") from exc
    if graph is None or d.labels == graph.labels:
        return d
    if set(d.labels) != set(graph.labels):
        raise LabelMismatch("distribution labels differ from the graph labels")
    return Distribution(graph.labels, tuple(d[lab] for lab in graph.labels))


def parse_schedule(text: str, d: Distribution, g: Graph, base: Optional[Path] = None
                   ) -> Schedule:
    """``paper`` | ``growth:C`` | path to a JSON schedule file."""
    if text == "paper":
        return make_schedule("PAPER_POLY", d, g)
    if text.startswith("growth:"):
        try:
            c = float(text.split(":", 1)[1])
        except ValueError as exc:
            raise InvalidOverride(f"bad growth constant in {text!r}") from exc
        return make_schedule("GROWTH_CONSTRAINED", d, g, c=c)
    path = Path(text)
    if base is not None and not path.is_absolute():
        path = base / path
    return schedule_from_json(_read(path), d, g)


def schedule_from_json(obj: dict, d: Distribution, g: Graph) -> Schedule:
    kind = str(obj.get("kind", "")).lower()
    if kind in ("paper", "paper_poly"):
        return make_schedule("PAPER_POLY", d, g)
    if kind in ("growth", "growth_constrained"):
        return make_schedule("GROWTH_CONSTRAINED", d, g, c=obj.get("c", 1))
    if kind == "practical":
        geo = obj.get("geometric")
        if geo is not None:
            return make_schedule("PRACTICAL", d, g, geometric=(geo["first"], geo["ratio"]))
        return make_schedule("PRACTICAL", d, g, blocks=obj.get("blocks"))
    raise InvalidOverride(f"unknown schedule kind {obj.get('kind')!r}")


def _encode(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in x) + "]"
    return json.dumps(str(x))


def dumps(obj: Any) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj) + "\n"
