"""Reversible graph-consistent transition kernels and Dobrushin analytics.

The kernel for a strictly positive distribution ``d`` on a connected graph
is built in *rank space*: states are relabelled so that masses are
non-increasing, moves towards a higher rank (lower mass) get the common
probability ``p`` and moves towards a lower rank get ``p`` scaled by the
mass ratio, which puts ``d`` in detailed balance with the kernel.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional

import numpy as np

from .dist import Distribution, Mass, kbar, mixture, support_list, tv_array
from .errors import (
    GraphMCError,
    InvalidK,
    LabelMismatch,
    NotConnected,
    NotStochastic,
    TooFewStates,
    ZeroMass,
)
from .graph import Graph, connected_components, induced_subgraph, is_connected

EXACT_TOL = 1e-12
POWER_TOL = 1e-9


@dataclass(frozen=True)
class StateOrdering:
    """Relabelling s^1..s^N with non-increasing mass; ties keep input order."""

    by_rank: tuple[str, ...]

    @cached_property
    def rank(self) -> dict[str, int]:
        return {lab: r for r, lab in enumerate(self.by_rank, start=1)}

    def __len__(self) -> int:
        return len(self.by_rank)


def order_states(d: Distribution) -> StateOrdering:
    idx = sorted(range(len(d.labels)), key=lambda i: -d.mass[i])
    return StateOrdering(tuple(d.labels[i] for i in idx))


@dataclass(frozen=True, eq=False)
class StochasticKernel:
    """Row-stochastic matrix bound to the distribution it was built for.

    ``matrix`` is indexed in label order of ``base``; :attr:`rank_matrix`
    gives the rank-space view. ``exact`` holds the rational entries when
    the kernel was built from a ``Fraction``-valued distribution.
    """

    base: Distribution
    matrix: np.ndarray
    ordering: StateOrdering
    p_value: Optional[Mass] = None
    graph: Optional[Graph] = None
    exact: Optional[tuple[tuple[Fraction, ...], ...]] = None

    @property
    def labels(self) -> tuple[str, ...]:
        return self.base.labels

    @property
    def n(self) -> int:
        return len(self.base.labels)

    @cached_property
    def rank_matrix(self) -> np.ndarray:
        perm = [self.base.index[lab] for lab in self.ordering.by_rank]
        return self.matrix[np.ix_(perm, perm)]

    def entry(self, u: str, v: str) -> float:
        return float(self.matrix[self.base.index[u], self.base.index[v]])

    @classmethod
    def from_matrix(cls, matrix, base: Distribution, graph: Optional[Graph] = None
                    ) -> "StochasticKernel":
        """Wrap an arbitrary square matrix, e.g. to audit a hand-built kernel."""
        m = np.array(matrix, dtype=float)
        if m.shape != (base.array.size,) * 2:
            raise LabelMismatch(f"matrix shape {m.shape} does not match base")
        return cls(base=base, matrix=m, ordering=order_states(base), graph=graph)

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "ordering": list(self.ordering.by_rank),
            "p": None if self.p_value is None else float(self.p_value),
            "matrix": self.matrix.tolist(),
        }


def _rank_weights(d: Distribution, g: Graph, ordering: StateOrdering):
    """Per rank: list of (neighbour rank, weight); weight is 1 towards higher
    ranks and the mass ratio towards lower ones."""
    if d.labels != g.labels:
        raise LabelMismatch("distribution and graph use different label lists")
    if g.n < 2:
        raise TooFewStates("the kernel needs at least two states")
    if not is_connected(g):
        raise NotConnected("graph is not connected")
    if any(m <= 0 for m in d.mass):
        raise ZeroMass("distribution must be strictly positive on every vertex")
    rank = ordering.rank
    one = Fraction(1) if d.exact else 1.0
    rows = []
    for lab in ordering.by_rank:
        l = rank[lab]
        ml = d[lab]
        row = []
        for j in g.neighbors[g.index[lab]]:
            other = g.labels[j]
            m = rank[other]
            row.append((m, one if m > l else d[other] / ml))
        rows.append(row)
    return rows


def _denominator(row) -> Mass:
    return sum(w for _, w in row)


def base_probability(d: Distribution, g: Graph, ordering: Optional[StateOrdering] = None) -> Mass:
    """Common off-diagonal scale: min over ranks of 1 / (2 * weighted degree)."""
    ordering = ordering or order_states(d)
    rows = _rank_weights(d, g, ordering)
    dens = [_denominator(r) for r in rows]
    # connected and N >= 2 means every rank has a neighbour
    assert all(x > 0 for x in dens), "rank without neighbours in a connected graph"
    return min(1 / (2 * x) for x in dens)


def build_kernel(d: Distribution, g: Graph) -> StochasticKernel:
    ordering = order_states(d)
    rows = _rank_weights(d, g, ordering)
    p = base_probability(d, g, ordering)
    n = g.n
    one = Fraction(1) if d.exact else 1.0
    zero = one - one
    by_rank = [[zero] * n for _ in range(n)]
    for l, row in enumerate(rows, start=1):
        for m, w in row:
            by_rank[l - 1][m - 1] = w * p
        by_rank[l - 1][l - 1] = one - p * _denominator(row)
    # back to label order
    pos = [d.index[lab] for lab in ordering.by_rank]
    entries = [[zero] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            entries[pos[a]][pos[b]] = by_rank[a][b]
    matrix = np.array([[float(x) for x in r] for r in entries])
    exact = tuple(tuple(r) for r in entries) if d.exact else None
    return StochasticKernel(base=d, matrix=matrix, ordering=ordering, p_value=p,
                            graph=g, exact=exact)


def verify_reversible(k: StochasticKernel) -> float:
    """Largest detailed-balance violation |d(i)P(i,j) - d(j)P(j,i)|."""
    flow = k.base.array[:, None] * k.matrix
    return float(np.abs(flow - flow.T).max())


def stationary_residual(k: StochasticKernel) -> float:
    pi = k.base.array
    return float(np.abs(pi @ k.matrix - pi).max())


def check_stochastic(m: np.ndarray, tol: float = POWER_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotStochastic(f"expected a square matrix, got shape {m.shape}")
    if (m < -tol).any() or np.abs(m.sum(axis=1) - 1.0).max() > tol:
        raise NotStochastic("rows must be non-negative and sum to one")
    return m


def dobrushin_delta(m) -> float:
    """1 minus the smallest overlap sum_h min(m[i,h], m[j,h]) over row pairs."""
    m = check_stochastic(m)
    overlap = np.minimum(m[:, None, :], m[None, :, :]).sum(axis=2)
    return float(min(1.0, max(0.0, 1.0 - overlap.min())))


def matrix_power(m, n: int) -> np.ndarray:
    if n < 1:
        raise GraphMCError(f"power must be >= 1, got {n}")
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotStochastic(f"expected a square matrix, got shape {m.shape}")
    out = np.linalg.matrix_power(m, n)
    if np.allclose(m.sum(axis=1), 1.0, atol=POWER_TOL):
        assert np.abs(out.sum(axis=1) - 1.0).max() <= POWER_TOL
    return out


@dataclass(frozen=True)
class LemmaReport:
    delta: float
    bound: float
    holds: bool
    n: int
    k: int
    c_n: float

    def to_json(self) -> dict:
        return {"delta": self.delta, "bound": self.bound, "holds": self.holds,
                "N": self.n, "k": self.k, "c_N": self.c_n}


def support_component(d: Distribution, g: Graph) -> list[str]:
    """The connected component of ``g`` holding all of supp ``d``."""
    supp = set(support_list(d))
    for comp in connected_components(g):
        if supp <= set(comp):
            return comp
    raise NotConnected("support spans several components")


def lemma_bound_check(d: Distribution, g: Graph, k: int) -> LemmaReport:
    """Compare delta(P^(N-1)) for the mixture kernel with 1 - (c_N/k)^(N-1)."""
    comp = support_component(d, g)
    dc, gc = d.restrict(comp), induced_subgraph(g, comp)
    n = gc.n
    if n < 3:
        raise TooFewStates("the bound needs N >= 3")
    if k <= kbar(dc):
        raise InvalidK(f"k={k} must exceed kbar={kbar(dc)}")
    ker = build_kernel(mixture(dc, k), gc)
    delta = dobrushin_delta(matrix_power(ker.matrix, n - 1))
    c_n = 1.0 / (2 * (n - 1) ** 2)
    bound = 1.0 - (c_n / k) ** (n - 1)
    return LemmaReport(delta, bound, delta <= bound + EXACT_TOL, n, k, c_n)


@dataclass(frozen=True)
class ContractionReport:
    tv: float
    bound: float
    holds: bool


def contraction_check(k: StochasticKernel, initial: Distribution, n: int,
                      tol: float = POWER_TOL) -> ContractionReport:
    """TV(initial P^n, base) against delta(P^(N-1))^floor(n/(N-1))."""
    if initial.labels != k.labels:
        raise LabelMismatch("initial distribution is on a different label list")
    blk = k.n - 1
    if blk < 1 or n < blk:
        raise GraphMCError(f"need N >= 2 and n >= N-1, got N={k.n}, n={n}")
    tv = tv_array(initial.array @ matrix_power(k.matrix, n), k.base.array)
    bound = dobrushin_delta(matrix_power(k.matrix, blk)) ** (n // blk)
    return ContractionReport(tv, bound, tv <= bound + tol)
