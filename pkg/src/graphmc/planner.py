"""Case classification of (target, graph) pairs and executable chain plans."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Union

from .dist import Distribution, kbar, mixture, support_list
from .errors import (
    ConflictingOptions,
    InvalidOverride,
    KbarTooLarge,
    LabelMismatch,
    MissingSchedule,
    ScheduleExhausted,
    WrongMode,
)
from .graph import Graph, connected_components, induced_subgraph, is_connected
from .kernel import StochasticKernel, build_kernel

KBAR_CAP = 10**9


class Case(str, Enum):
    DIRAC = "DIRAC"
    CONNECTED_SUPPORT = "CONNECTED_SUPPORT"
    SUPPORT_IN_ONE_COMPONENT = "SUPPORT_IN_ONE_COMPONENT"
    SUPPORT_SPLIT = "SUPPORT_SPLIT"


class Mode(str, Enum):
    CONSTANT = "CONSTANT"
    HOMOGENEOUS = "HOMOGENEOUS"
    NONHOMOGENEOUS = "NONHOMOGENEOUS"
    INFEASIBLE = "INFEASIBLE"


class ScheduleKind(str, Enum):
    PAPER_POLY = "PAPER_POLY"
    GROWTH_CONSTRAINED = "GROWTH_CONSTRAINED"
    PRACTICAL = "PRACTICAL"


@dataclass(frozen=True)
class CaseClass:
    tag: Case
    witness: dict

    def to_json(self) -> dict:
        return {"case": self.tag.value, "witness": self.witness}


def classify(d: Distribution, g: Graph) -> CaseClass:
    if d.labels != g.labels:
        raise LabelMismatch("distribution and graph use different label lists")
    supp = support_list(d)
    if len(supp) == 1:
        return CaseClass(Case.DIRAC, {"atom": supp[0]})
    sub = induced_subgraph(g, supp)
    sub_comps = connected_components(sub)
    if len(sub_comps) == 1:
        return CaseClass(Case.CONNECTED_SUPPORT, {"support": supp})
    in_supp = set(supp)
    hits = [c for c in connected_components(g) if in_supp & set(c)]
    if len(hits) == 1:
        return CaseClass(Case.SUPPORT_IN_ONE_COMPONENT,
                         {"support_components": sub_comps, "component": hits[0]})
    grouped = [[s for s in c if s in in_supp] for c in hits]
    return CaseClass(Case.SUPPORT_SPLIT, {
        "support_components": sub_comps,
        "graph_components": grouped,
        "pair": [grouped[0][0], grouped[1][0]],
    })


def _checked_kbar(d: Distribution) -> int:
    kb = kbar(d)
    if kb > KBAR_CAP:
        raise KbarTooLarge(f"kbar={kb} exceeds the supported cap {KBAR_CAP}")
    return kb


@dataclass(eq=False)
class Schedule:
    """Block boundaries t_k for k = k_start, k_start+1, ...

    Times are exact Python integers, normalised so that ``boundary(k_start)``
    is 0. Block k covers ``[boundary(k), boundary(k+1))``.
    """

    kind: ScheduleKind
    k_start: int
    exponent: Optional[int] = None
    c: Optional[Fraction] = None
    blocks: tuple[int, ...] = ()
    geometric: Optional[tuple[int, Fraction]] = None
    _bounds: list = field(default_factory=lambda: [0], repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def faithful(self) -> bool:
        return self.kind is not ScheduleKind.PRACTICAL

    @property
    def params(self) -> dict:
        if self.kind is ScheduleKind.PAPER_POLY:
            return {"exponent": self.exponent}
        if self.kind is ScheduleKind.GROWTH_CONSTRAINED:
            return {"exponent": self.exponent, "c": str(self.c)}
        if self.geometric:
            return {"first": self.geometric[0], "ratio": str(self.geometric[1])}
        return {"blocks": list(self.blocks)}

    def _length(self, k: int) -> int:
        j = k - self.k_start
        if self.kind is ScheduleKind.GROWTH_CONSTRAINED:
            return math.ceil(self.c * k ** (self.exponent - 1))
        if self.geometric:
            first, ratio = self.geometric
            return math.ceil(first * ratio ** j)
        if j >= len(self.blocks):
            raise ScheduleExhausted(
                f"practical schedule has only {len(self.blocks)} blocks")
        return self.blocks[j]

    def boundary(self, k: int) -> int:
        if k < self.k_start:
            raise WrongMode(f"block {k} precedes the first block {self.k_start}")
        if self.kind is ScheduleKind.PAPER_POLY:
            return k ** self.exponent - self.k_start ** self.exponent
        with self._lock:
            while len(self._bounds) <= k - self.k_start:
                kk = self.k_start + len(self._bounds) - 1
                self._bounds.append(self._bounds[-1] + self._length(kk))
            return self._bounds[k - self.k_start]

    def block_of(self, t: int) -> int:
        """Index k of the block containing time t."""
        if t < 0:
            raise ValueError("negative time")
        if self.kind is ScheduleKind.PAPER_POLY:
            e, k = self.exponent, _iroot(t + self.k_start ** self.exponent, self.exponent)
            while (k + 1) ** e <= t + self.k_start ** e:
                k += 1
            return k
        k = self.k_start
        while self.boundary(k + 1) <= t:
            k += 1
        return k

    def segments(self, horizon: int) -> list[tuple[int, int, int]]:
        """(k, start, end) for every block met in [0, horizon), clipped."""
        out, k = [], self.k_start
        start = 0
        while start < horizon:
            end = self.boundary(k + 1)
            out.append((k, start, min(end, horizon)))
            start, k = end, k + 1
        return out

    def table(self, count: int = 20) -> list[dict]:
        rows = []
        for k in range(self.k_start, self.k_start + count):
            try:
                end = self.boundary(k + 1)
            except ScheduleExhausted:
                break
            rows.append({"k": k, "start": str(self.boundary(k)), "end": str(end)})
        return rows

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "k_start": self.k_start,
                "faithful": self.faithful, "params": self.params}


def _iroot(x: int, e: int) -> int:
    """floor(x ** (1/e)) for big integers."""
    lo, hi = 0, 1
    while hi ** e <= x:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid ** e <= x:
            lo = mid
        else:
            hi = mid
    return lo


def _state_space_size(d: Distribution, g: Graph) -> int:
    supp = set(support_list(d))
    for comp in connected_components(g):
        if supp <= set(comp):
            return len(comp)
    return g.n


def make_schedule(kind: Union[ScheduleKind, str], d: Distribution, g: Graph,
                  *, c=1, blocks: Optional[Sequence[int]] = None,
                  geometric: Optional[tuple] = None) -> Schedule:
    """Build a schedule for the case-(ii) instance (d, g).

    The exponent 5N uses N = size of the component holding supp d. ``c``
    only affects GROWTH_CONSTRAINED; ``blocks`` or ``geometric=(first, ratio)``
    define a PRACTICAL schedule.
    """
    kind = ScheduleKind(kind.upper() if isinstance(kind, str) else kind)
    k_start = _checked_kbar(d) + 1
    exponent = 5 * _state_space_size(d, g)
    if kind is ScheduleKind.PAPER_POLY:
        return Schedule(kind, k_start, exponent=exponent)
    if kind is ScheduleKind.GROWTH_CONSTRAINED:
        c = Fraction(str(c)) if isinstance(c, float) else Fraction(c)
        if c <= 0:
            raise InvalidOverride(f"growth constant must be positive, got {c}")
        return Schedule(kind, k_start, exponent=exponent, c=c)
    if geometric is not None:
        if blocks is not None:
            raise InvalidOverride("give either explicit blocks or a geometric rule")
        first, ratio = geometric
        ratio = Fraction(str(ratio)) if isinstance(ratio, float) else Fraction(ratio)
        if int(first) != first or first <= 0 or ratio < 1:
            raise InvalidOverride("geometric blocks need first >= 1 and ratio >= 1")
        return Schedule(kind, k_start, geometric=(int(first), ratio))
    if not blocks:
        raise InvalidOverride("a practical schedule needs block lengths")
    blocks = tuple(blocks)
    if any(int(b) != b or b <= 0 for b in blocks):
        raise InvalidOverride("block lengths must be positive integers")
    if any(b2 < b1 for b1, b2 in zip(blocks, blocks[1:])):
        raise InvalidOverride("block lengths must not decrease")
    return Schedule(kind, k_start, blocks=tuple(int(b) for b in blocks))


@dataclass(frozen=True, eq=False)
class ChainPlan:
    """Executable description of the chain chosen for a (target, graph) pair.

    ``states`` is the state space the chain lives on (the atom, the support,
    or the component holding the support) and ``state_graph`` the graph
    induced on it. ``target`` stays on the full label list.
    """

    case: CaseClass
    mode: Mode
    graph: Graph
    target: Distribution
    states: tuple[str, ...] = ()
    state_graph: Optional[Graph] = None
    initial: Optional[Distribution] = None
    kernel: Optional[StochasticKernel] = None
    schedule: Optional[Schedule] = None
    epsilon: Optional[float] = None
    k: Optional[int] = None
    _family: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def state_target(self) -> Distribution:
        return self.target.restrict(self.states)

    def kernel_for(self, k: int) -> StochasticKernel:
        """Mixture kernel of index k on the plan's state space (memoised)."""
        with self._lock:
            ker = self._family.get(k)
            if ker is None:
                ker = build_kernel(mixture(self.state_target, k), self.state_graph)
                self._family[k] = ker
            return ker

    def advertised_error(self) -> Optional[float]:
        return None if self.k is None else 1.0 / self.k

    def to_json(self, blocks: int = 20) -> dict:
        out = {"mode": self.mode.value, **self.case.to_json(),
               "states": list(self.states)}
        if self.kernel is not None:
            out["kernel"] = self.kernel.to_json()
        if self.k is not None:
            out["k"] = self.k
            out["epsilon"] = self.epsilon
        if self.schedule is not None:
            out["schedule"] = self.schedule.to_json()
            out["blocks"] = self.schedule.table(blocks)
        return out


def _initial_on(states: Sequence[str], initial: Optional[Distribution]) -> Distribution:
    if initial is None:
        return Distribution.uniform(states)
    if initial.labels == tuple(states):
        return initial
    return initial.restrict(states)


def plan(d: Distribution, g: Graph, schedule: Optional[Schedule] = None,
         epsilon: Optional[float] = None, initial: Optional[Distribution] = None
         ) -> ChainPlan:
    if schedule is not None and epsilon is not None:
        raise ConflictingOptions("give either a schedule or an epsilon, not both")
    cc = classify(d, g)
    if cc.tag is Case.SUPPORT_SPLIT:
        return ChainPlan(cc, Mode.INFEASIBLE, g, d)
    if cc.tag is Case.DIRAC:
        atom = cc.witness["atom"]
        point = Distribution.dirac([atom], atom)
        sg = induced_subgraph(g, [atom])
        ker = StochasticKernel.from_matrix([[1.0]], point, graph=sg)
        return ChainPlan(cc, Mode.CONSTANT, g, d, (atom,), sg, point, ker)
    if cc.tag is Case.CONNECTED_SUPPORT:
        states = tuple(cc.witness["support"])
        sg = induced_subgraph(g, states)
        ker = build_kernel(d.restrict(states), sg)
        return ChainPlan(cc, Mode.HOMOGENEOUS, g, d, states, sg,
                         _initial_on(states, initial), ker)

    states = tuple(cc.witness["component"])
    sg = induced_subgraph(g, states)
    assert is_connected(sg)
    kb = _checked_kbar(d)
    init = _initial_on(states, initial)
    if epsilon is not None:
        eps = Fraction(repr(float(epsilon)))
        if not 0 < eps < 1:
            raise InvalidOverride(f"epsilon must lie in (0, 1), got {epsilon}")
        k = max(math.ceil(1 / eps), kb + 1)
        ker = build_kernel(mixture(d.restrict(states), k), sg)
        return ChainPlan(cc, Mode.HOMOGENEOUS, g, d, states, sg, init, ker,
                         epsilon=float(epsilon), k=k)
    if schedule is None:
        raise MissingSchedule("this target needs a schedule or an epsilon")
    if schedule.k_start <= kb:
        raise InvalidOverride(f"schedule starts at k={schedule.k_start}, needs > {kb}")
    return ChainPlan(cc, Mode.NONHOMOGENEOUS, g, d, states, sg, init,
                     schedule=schedule)


def kernel_at_time(p: ChainPlan, t: int) -> StochasticKernel:
    if p.mode is not Mode.NONHOMOGENEOUS:
        raise WrongMode(f"plan is {p.mode.value}, not NONHOMOGENEOUS")
    return p.kernel_for(p.schedule.block_of(t))
