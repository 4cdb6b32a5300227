"""Seeded trajectories, empirical distributions and the too-fast-schedule demo.

Random numbers come from numpy's Philox4x64 counter-based generator. A run
is keyed by ``SeedSequence([seed, replica])``; a replica batch drawn with
:func:`sample_final_states` uses one stream keyed by ``[seed, BATCH_STREAM]``.
Each transition inverts the cumulative row of the current kernel, in label
order, at one uniform draw.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np
from numba import njit

from .dist import Distribution, mixture, tv_array
from .errors import InfeasiblePlan, UnknownState
from .graph import build_graph
from .kernel import StochasticKernel, build_kernel
from .planner import ChainPlan, Mode, kernel_at_time

log = logging.getLogger(__name__)

CHUNK = 1 << 20
BATCH_STREAM = 2**32 - 1
TRACE_CAP = 10**7


def make_rng(seed: int, replica: int = 0, *stream: int) -> np.random.Generator:
    key = np.random.SeedSequence([seed, replica, *stream])
    return np.random.Generator(np.random.Philox(key))


def row_cdfs(matrix: np.ndarray) -> np.ndarray:
    """Cumulative rows, rescaled so the last positive entry is exactly 1."""
    c = np.cumsum(np.asarray(matrix, dtype=float), axis=-1)
    return c / c[..., -1:]


def _draw(cdf: np.ndarray, u: float) -> int:
    return int(np.searchsorted(cdf, u, side="right"))


@njit(cache=True)
def _walk(cdfs, seg_end, seg_kernel, x0, u, t0):
    """Path x0, X(t0+1), ... driven by uniforms u; time t uses the kernel of
    the segment whose (exclusive) end exceeds t."""
    n = u.size
    path = np.empty(n + 1, np.int64)
    x = x0
    path[0] = x
    s = 0
    for i in range(n):
        t = t0 + i
        while t >= seg_end[s]:
            s += 1
        row = cdfs[seg_kernel[s], x]
        j = 0
        while j < row.size - 1 and u[i] >= row[j]:
            j += 1
        x = j
        path[i + 1] = x
    return path


@njit(cache=True)
def _walk_many(cdfs, seg_end, seg_kernel, x0s, U):
    out = np.empty(x0s.size, np.int64)
    for r in range(x0s.size):
        out[r] = _walk(cdfs, seg_end, seg_kernel, x0s[r], U[r], 0)[-1]
    return out


@dataclass
class TrajectoryReport:
    seed: int
    steps: int
    labels: tuple[str, ...]
    visit_counts: tuple[int, ...]
    tv_trace: list[tuple[int, float]]
    consistency_violations: int
    final_state: str
    replica: int = 0
    meta: dict = field(default_factory=dict)
    path: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def empirical(self) -> Distribution:
        return Distribution(self.labels, tuple(c / self.steps for c in self.visit_counts))

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "replica": self.replica,
            "steps": self.steps,
            "labels": list(self.labels),
            "visit_counts": list(self.visit_counts),
            "empirical": [c / self.steps for c in self.visit_counts],
            "tv_trace": [[t, v] for t, v in self.tv_trace],
            "consistency_violations": self.consistency_violations,
            "final_state": self.final_state,
            **({"meta": self.meta} if self.meta else {}),
        }


@dataclass(frozen=True)
class PooledReport:
    """Replica reports summed; merging is associative and order-free."""

    labels: tuple[str, ...]
    replicas: int
    steps: int
    visit_counts: tuple[int, ...]
    consistency_violations: int

    @property
    def empirical(self) -> Distribution:
        return Distribution(self.labels, tuple(c / self.steps for c in self.visit_counts))

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "replicas": self.replicas,
                "steps": self.steps, "visit_counts": list(self.visit_counts),
                "empirical": [c / self.steps for c in self.visit_counts],
                "consistency_violations": self.consistency_violations}


def merge_reports(reports: Iterable[Union[TrajectoryReport, PooledReport]]) -> PooledReport:
    reports = list(reports)
    labels = reports[0].labels
    assert all(r.labels == labels for r in reports)
    return PooledReport(
        labels,
        sum(getattr(r, "replicas", 1) for r in reports),
        sum(r.steps for r in reports),
        tuple(int(x) for x in np.sum([r.visit_counts for r in reports], axis=0)),
        sum(r.consistency_violations for r in reports),
    )


def step(state: str, k: StochasticKernel, rng: np.random.Generator) -> str:
    """One transition from ``state`` under kernel ``k``."""
    if state not in k.base.index:
        raise UnknownState(f"{state!r} is not a state of the kernel")
    cdf = row_cdfs(k.matrix[k.base.index[state]])
    nxt = k.labels[_draw(cdf, rng.random())]
    if k.graph is not None:
        assert k.graph.adjacency[k.graph.index[state], k.graph.index[nxt]], \
            "transition leaves the graph"
    return nxt


def _segment_tables(plan: ChainPlan, steps: int):
    """Stacked row CDFs plus the segment table covering times [0, steps)."""
    if plan.mode is Mode.INFEASIBLE:
        raise InfeasiblePlan("no graph-consistent process reaches this target: "
                             f"{plan.case.witness}")
    if plan.mode is not Mode.NONHOMOGENEOUS:
        cdfs = row_cdfs(plan.kernel.matrix)[None]
        return cdfs, np.array([steps], np.int64), np.zeros(1, np.int64), [plan.k]
    segs = plan.schedule.segments(steps)
    ks = [k for k, _, _ in segs]
    cdfs = np.stack([row_cdfs(plan.kernel_for(k).matrix) for k in ks])
    ends = np.array([e for _, _, e in segs], np.int64)
    return cdfs, ends, np.arange(len(segs), dtype=np.int64), ks


def simulate_path(plan: ChainPlan, steps: int, rng: np.random.Generator) -> np.ndarray:
    """X(0..steps) as indices into ``plan.states`` (unchunked)."""
    cdfs, ends, seg_kernel, _ = _segment_tables(plan, steps)
    x = _draw(row_cdfs(plan.initial.array), rng.random())
    return _walk(cdfs, ends, seg_kernel, x, rng.random(steps), 0)


def count_violations(plan: ChainPlan, path: np.ndarray) -> int:
    return int((~plan.state_graph.adjacency[path[:-1], path[1:]]).sum())


def _full_index(plan: ChainPlan) -> np.ndarray:
    return np.array([plan.graph.index[s] for s in plan.states])


def run(plan: ChainPlan, steps: int, seed: int, checkpoints: Sequence[int] = (),
        replica: int = 0, keep_path: bool = False,
        on_chunk: Optional[Callable[[int, np.ndarray], None]] = None) -> TrajectoryReport:
    """Simulate X(0..steps) under ``plan``.

    Visit counts cover X(0)..X(steps-1); ``final_state`` is X(steps). A
    checkpoint t records TV between the empirical law of X(0..t-1) and the
    target. ``on_chunk(t0, states)`` receives consecutive blocks of states
    (as state-space indices) for tracing.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    cdfs, ends, seg_kernel, ks = _segment_tables(plan, steps)
    rng = make_rng(seed, replica)
    x = _draw(row_cdfs(plan.initial.array), rng.random())
    adj = plan.state_graph.adjacency
    n = len(plan.states)
    counts = np.zeros(n, np.int64)
    cps = sorted(set(int(t) for t in checkpoints if 1 <= t <= steps))
    target = plan.target.array
    full = _full_index(plan)
    trace: list[tuple[int, float]] = []
    violations = 0
    paths = []
    ci = 0
    for t0 in range(0, steps, CHUNK):
        m = min(CHUNK, steps - t0)
        path = _walk(cdfs, ends, seg_kernel, x, rng.random(m), t0)
        violations += int((~adj[path[:-1], path[1:]]).sum())
        while ci < len(cps) and cps[ci] <= t0 + m:
            part = counts + np.bincount(path[:cps[ci] - t0], minlength=n)
            trace.append((cps[ci], _tv_full(part, full, target)))
            ci += 1
        counts += np.bincount(path[:-1], minlength=n)
        if on_chunk is not None:
            on_chunk(t0, path[:-1])
        if keep_path:
            paths.append(path[:-1])
        x = int(path[-1])
    if violations:
        log.error("%d graph-inconsistent transitions", violations)
    full_counts = np.zeros(plan.graph.n, np.int64)
    full_counts[full] = counts
    meta = {"mode": plan.mode.value}
    if plan.mode is Mode.NONHOMOGENEOUS:
        meta.update(k_values=ks, faithful=plan.schedule.faithful)
    elif plan.k is not None:
        meta.update(k=plan.k)
    return TrajectoryReport(
        seed=seed, steps=steps, labels=plan.graph.labels,
        visit_counts=tuple(int(c) for c in full_counts), tv_trace=trace,
        consistency_violations=violations, final_state=plan.states[x],
        replica=replica, meta=meta,
        path=np.concatenate(paths + [[x]]) if keep_path else None,
    )


def _tv_full(counts: np.ndarray, full: np.ndarray, target: np.ndarray) -> float:
    emp = np.zeros_like(target)
    emp[full] = counts / counts.sum()
    return tv_array(emp, target)


def run_replicas(plan: ChainPlan, steps: int, seed: int, replicas: int,
                 checkpoints: Sequence[int] = ()) -> list[TrajectoryReport]:
    return [run(plan, steps, seed, checkpoints, replica=r) for r in range(replicas)]


def ergodic_average(report: Union[TrajectoryReport, PooledReport],
                    f: Union[Mapping[str, float], Sequence[float]]) -> float:
    """Time average of f along the trajectory, from the visit counts."""
    if isinstance(f, Mapping):
        vals = np.array([f[lab] for lab in report.labels], dtype=float)
    else:
        vals = np.asarray(f, dtype=float)
        if vals.size != len(report.labels):
            raise UnknownState("f must give one value per label")
    return float(np.dot(report.visit_counts, vals) / report.steps)


def expectation(d: Distribution, f: Union[Mapping[str, float], Sequence[float]]) -> float:
    vals = [f[lab] for lab in d.labels] if isinstance(f, Mapping) else list(f)
    return float(np.dot(d.array, vals))


def marginal_law(plan: ChainPlan, steps: int) -> np.ndarray:
    """Law of X(steps) over ``plan.states``: initial times P(0)...P(steps-1)."""
    if plan.mode is Mode.INFEASIBLE:
        raise InfeasiblePlan("infeasible plan has no law")
    law = plan.initial.array.copy()
    for t in range(steps):
        ker = kernel_at_time(plan, t) if plan.mode is Mode.NONHOMOGENEOUS else plan.kernel
        law = law @ ker.matrix
    return law


def sample_final_states(plan: ChainPlan, steps: int, seed: int, replicas: int,
                        batch: int = 1 << 16) -> np.ndarray:
    """Counts of X(steps) over ``plan.states`` across independent replicas."""
    cdfs, ends, seg_kernel, _ = _segment_tables(plan, steps)
    rng = make_rng(seed, BATCH_STREAM)
    init_cdf = row_cdfs(plan.initial.array)
    counts = np.zeros(len(plan.states), np.int64)
    for r0 in range(0, replicas, batch):
        m = min(batch, replicas - r0)
        x0 = np.searchsorted(init_cdf, rng.random(m), side="right").astype(np.int64)
        finals = _walk_many(cdfs, ends, seg_kernel, x0, rng.random((m, steps)))
        counts += np.bincount(finals, minlength=len(plan.states))
    return counts


# --- schedule taken too fast -------------------------------------------------

FOUR_STATE_LABELS = ("s1", "s2", "s3", "s4")
FOUR_STATE_EDGES = (("s1", "s3"), ("s3", "s4"), ("s2", "s4"))
# exit probabilities below 2**-LEVEL_CAP are invisible to 53-bit uniforms
LEVEL_CAP = 128


def four_state_instance():
    g = build_graph(FOUR_STATE_LABELS, FOUR_STATE_EDGES)
    return g, Distribution.from_values(g.labels, [0.5, 0.5, 0, 0])


def fast_kernel(level: int) -> StochasticKernel:
    """Kernel of the four-state instance built from the mixture of index 2**level."""
    g, mu = four_state_instance()
    return build_kernel(mixture(mu, 2**level), g)


@dataclass(frozen=True)
class CounterexampleSummary:
    replicas: int
    steps: int
    stuck_fraction: float
    mean_final_tv: float
    consistency_violations: int

    def to_json(self) -> dict:
        return {"replicas": self.replicas, "steps": self.steps,
                "stuck_fraction": self.stuck_fraction,
                "mean_final_tv": self.mean_final_tv,
                "consistency_violations": self.consistency_violations}


def counterexample_scenario(replicas: int = 1000, steps: int = 10**5, seed: int = 0,
                            stuck_threshold: float = 0.9) -> CounterexampleSummary:
    """Four-state instance with a new kernel every step: the transition
    X(t) -> X(t+1) uses the kernel of :func:`fast_kernel` at level t+1.
    Every replica starts in s1."""
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    g, mu = four_state_instance()
    levels = min(steps, LEVEL_CAP)
    cdfs = np.stack([row_cdfs(fast_kernel(lv).matrix) for lv in range(1, levels + 1)])
    ends = np.arange(1, levels + 1, dtype=np.int64)
    ends[-1] = steps
    seg_kernel = np.arange(levels, dtype=np.int64)
    stuck, tv_sum, violations = 0, 0.0, 0
    for r in range(replicas):
        rng = make_rng(seed, r)
        path = _walk(cdfs, ends, seg_kernel, 0, rng.random(steps), 0)
        violations += int((~g.adjacency[path[:-1], path[1:]]).sum())
        emp = np.bincount(path[:-1], minlength=4) / steps
        stuck += emp[0] > stuck_threshold
        tv_sum += tv_array(emp, mu.array)
    return CounterexampleSummary(replicas, steps, stuck / replicas, tv_sum / replicas,
                                 violations)
