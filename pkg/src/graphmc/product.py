"""Independent per-factor chains on a strong product with a product target."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .dist import Distribution, tv_array
from .errors import InfeasibleFactor
from .graph import Graph, product_label, strong_product
from .planner import ChainPlan, Mode, Schedule, plan
from .simulator import (
    TrajectoryReport,
    _full_index,
    count_violations,
    make_rng,
    simulate_path,
)

JOINT_CAP = 10**6
JOINT_GRAPH_CAP = 10**4


@dataclass(frozen=True, eq=False)
class ProductSpec:
    """Factors (target, graph, schedule) with their plans and joint objects.

    ``joint_graph`` is materialised up to JOINT_GRAPH_CAP composite vertices
    and ``joint_target`` up to JOINT_CAP; beyond that only factor-level
    statistics are kept.
    """

    factors: tuple[tuple[Distribution, Graph, Optional[Schedule]], ...]
    plans: tuple[ChainPlan, ...]
    joint_labels: Optional[tuple[str, ...]]
    joint_graph: Optional[Graph]
    joint_target: Optional[Distribution]

    @property
    def joint_size(self) -> int:
        return math.prod(g.n for _, g, _ in self.factors)

    @property
    def faithful(self) -> bool:
        return all(s is None or s.faithful for _, _, s in self.factors)


def min_gap_holds(schedule: Schedule, c, blocks: int = 20) -> bool:
    """t_{k+1} - t_k >= c * k**(exponent-1) over the first ``blocks`` blocks."""
    if not schedule.faithful:
        return False
    c = Fraction(c)
    e = schedule.exponent
    return all(schedule.boundary(k + 1) - schedule.boundary(k) >= c * k ** (e - 1)
               for k in range(schedule.k_start, schedule.k_start + blocks))


def _product_target(factors) -> Distribution:
    labels, masses = [], []
    for combo in itertools.product(*[list(zip(d.labels, d.mass)) for d, _, _ in factors]):
        lab = combo[0][0]
        for other, _ in combo[1:]:
            lab = product_label(lab, other)
        labels.append(lab)
        masses.append(math.prod(m for _, m in combo))
    return Distribution(tuple(labels), tuple(masses))


def build_product_spec(factors: Sequence[tuple]) -> ProductSpec:
    """Plan every factor on its own and assemble the joint objects."""
    norm = []
    for f in factors:
        d, g, s = (tuple(f) + (None,))[:3]
        norm.append((d, g, s))
    plans = []
    for h, (d, g, s) in enumerate(norm):
        p = plan(d, g, schedule=s)
        if p.mode is Mode.INFEASIBLE:
            raise InfeasibleFactor(f"factor {h} has a split support: {p.case.witness}")
        plans.append(p)
    size = math.prod(g.n for _, g, _ in norm)
    target = _product_target(norm) if size <= JOINT_CAP else None
    graph = strong_product(*[g for _, g, _ in norm]) if size <= JOINT_GRAPH_CAP else None
    return ProductSpec(tuple(norm), tuple(plans),
                       target.labels if target else None, graph, target)


@dataclass
class ProductReport:
    joint: Optional[TrajectoryReport]
    marginals: list[TrajectoryReport]
    factorization_defect: Optional[float]

    def to_json(self) -> dict:
        return {"joint": self.joint.to_json() if self.joint else None,
                "marginals": [m.to_json() for m in self.marginals],
                "factorization_defect": self.factorization_defect}


def _report(labels, counts, steps, seed, replica, trace, violations, final, meta=None):
    return TrajectoryReport(seed=seed, steps=steps, labels=tuple(labels),
                            visit_counts=tuple(int(c) for c in counts), tv_trace=trace,
                            consistency_violations=violations, final_state=final,
                            replica=replica, meta=meta or {})


def _trace(codes: np.ndarray, size: int, target: np.ndarray, checkpoints) -> list:
    out = []
    for t in sorted(set(int(t) for t in checkpoints if 1 <= t < codes.size)):
        out.append((t, tv_array(np.bincount(codes[:t], minlength=size) / t, target)))
    return out


def run_product(spec: ProductSpec, steps: int, seed: int,
                checkpoints: Sequence[int] = (), replica: int = 0) -> ProductReport:
    """Advance all factor chains in lockstep with independent streams."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    codes = []
    marginals = []
    factor_ok = None
    for h, (p, (d, g, _)) in enumerate(zip(spec.plans, spec.factors)):
        path = simulate_path(p, steps, make_rng(seed, replica, h))
        lab_path = _full_index(p)[path]
        codes.append(lab_path)
        ok = g.adjacency[lab_path[:-1], lab_path[1:]]
        factor_ok = ok if factor_ok is None else factor_ok & ok
        counts = np.bincount(lab_path[:-1], minlength=g.n)
        marginals.append(_report(
            g.labels, counts, steps, seed, replica,
            _trace(lab_path, g.n, d.array, checkpoints),
            count_violations(p, path), g.labels[lab_path[-1]], {"factor": h}))

    joint = defect = None
    if spec.joint_target is not None:
        code = np.zeros(steps + 1, np.int64)
        for (_, g, _), c in zip(spec.factors, codes):
            code = code * g.n + c
        size = spec.joint_size
        if spec.joint_graph is not None:
            adj = spec.joint_graph.adjacency
            violations = int((~adj[code[:-1], code[1:]]).sum())
        else:
            # Definition-level check: every coordinate adjacent-or-equal
            violations = int((~factor_ok).sum())
        counts = np.bincount(code[:-1], minlength=size)
        joint = _report(spec.joint_labels, counts, steps, seed, replica,
                        _trace(code, size, spec.joint_target.array, checkpoints),
                        violations, spec.joint_labels[code[-1]],
                        {"faithful": spec.faithful})
        outer = marginals[0].empirical.array
        for m in marginals[1:]:
            outer = np.multiply.outer(outer, m.empirical.array).ravel()
        defect = float(np.abs(counts / steps - outer).max())
    return ProductReport(joint, marginals, defect)
