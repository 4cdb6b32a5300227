"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line
(also collected into the terminal summary) and then asserts the criterion."""
import itertools
import time
from fractions import Fraction as F

import numpy as np

from graphmc.dist import Distribution, kbar, mixture, tv_array
from graphmc.graph import build_graph
from graphmc.kernel import (
    build_kernel,
    contraction_check,
    lemma_bound_check,
    stationary_residual,
    verify_reversible,
)
from graphmc.planner import Case, Mode, classify, kernel_at_time, make_schedule, plan
from graphmc.product import build_product_spec, run_product
from graphmc.simulator import (
    counterexample_scenario,
    ergodic_average,
    four_state_instance,
    marginal_law,
    run,
    sample_final_states,
)

from conftest import ACCEPTANCE_LINES, EX1_EDGES, EX1_LABELS


def report(n, ok, detail, elapsed, limit):
    ok = ok and elapsed < limit
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}  [{elapsed:.2f}s / {limit}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def random_connected(rng, n):
    labels = [f"v{i}" for i in range(n)]
    edges = {(int(rng.integers(i)), i) for i in range(1, n)}
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < 0.3:
            edges.add((i, j))
    return build_graph(labels, [(labels[i], labels[j]) for i, j in sorted(edges)])


def reach(adj):
    """Transitive closure by repeated squaring of a boolean matrix."""
    r = adj.copy()
    for _ in range(max(1, int(np.ceil(np.log2(max(adj.shape[0], 2)))) + 1)):
        r = (r.astype(np.int64) @ r.astype(np.int64)) > 0
    return r


def induced_connected(adj, nodes):
    sub = adj[np.ix_(nodes, nodes)]
    return bool(reach(sub).all())


def random_case2(rng, n_min=3, n_max=7):
    """Connected graph with a target whose support is disconnected in it."""
    while True:
        n = int(rng.integers(n_min, n_max + 1))
        g = random_connected(rng, n)
        size = int(rng.integers(2, n))
        supp = sorted(rng.choice(n, size=size, replace=False).tolist())
        if induced_connected(g.adjacency, supp):
            continue
        w = rng.integers(1, 21, size=size)
        mass = [F(0)] * n
        for s, x in zip(supp, w):
            mass[s] = F(int(x), int(w.sum()))
        return g, Distribution(g.labels, tuple(mass))


def ex1():
    g = build_graph(EX1_LABELS, EX1_EDGES)
    return g, Distribution.from_values(g.labels, ["1/2", "1/2", "0", "0"])


def test_criterion_01_kernel_exactness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = {"rows": 0.0, "balance": 0.0, "stationary": 0.0, "diag": 1.0, "off_graph": 0.0}
    for _ in range(500):
        n = int(rng.integers(2, 9))
        g = random_connected(rng, n)
        d = Distribution.from_values(g.labels, list(rng.dirichlet(np.ones(n))))
        k = build_kernel(d, g)
        m = k.matrix
        worst["rows"] = max(worst["rows"], float(np.abs(m.sum(axis=1) - 1).max()))
        worst["balance"] = max(worst["balance"], verify_reversible(k))
        worst["stationary"] = max(worst["stationary"], stationary_residual(k))
        worst["diag"] = min(worst["diag"], float(np.diag(m).min()))
        worst["off_graph"] = max(worst["off_graph"], float(np.abs(m[~g.adjacency]).max(initial=0)))
    ok = (worst["rows"] <= 1e-12 and worst["balance"] <= 1e-12 and worst["stationary"] <= 1e-12
          and worst["diag"] >= 0.5 - 1e-12 and worst["off_graph"] == 0)
    assert report(1, ok, f"worst={worst}", time.perf_counter() - t0, 5)


def test_criterion_02_four_state_closed_forms():
    t0 = time.perf_counter()
    g, mu = ex1()
    _, mu_float = four_state_instance()
    ok, worst_rel = True, 0.0
    for ell in range(1, 21):
        want = F(1, 2 ** (ell + 1))
        k = build_kernel(mixture(mu, 2**ell), g)
        ok &= k.p_value == want and k.exact[0][0] == 1 - want
        kf = build_kernel(mixture(mu_float, 2**ell), g)
        rel = abs(kf.p_value - float(want)) / float(want)
        rel11 = abs(kf.matrix[0, 0] - float(1 - want)) / float(1 - want)
        worst_rel = max(worst_rel, rel, rel11)
    ok &= worst_rel <= 1e-15
    assert report(2, ok, f"exact match l=1..20, float worst rel={worst_rel:.1e}",
                  time.perf_counter() - t0, 1)


def test_criterion_03_lemma_bound():
    t0 = time.perf_counter()
    rng = np.random.default_rng(303)
    held, worst_gap = 0, -np.inf
    for _ in range(200):
        g, d = random_case2(rng)
        k = kbar(d) + int(rng.integers(1, 21))
        r = lemma_bound_check(d, g, k)
        held += r.delta <= r.bound + 1e-12
        worst_gap = max(worst_gap, r.delta - r.bound)
    assert report(3, held == 200, f"{held}/200 hold, max(delta-bound)={worst_gap:.3e}",
                  time.perf_counter() - t0, 10)


def test_criterion_04_dobrushin_contraction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(404)
    held, worst = 0, -np.inf
    for _ in range(100):
        g, d = random_case2(rng)
        k = kbar(d) + int(rng.integers(1, 21))
        ker = build_kernel(mixture(d, k), g)
        nu = Distribution.from_values(g.labels, list(rng.dirichlet(np.ones(g.n) * 0.5)))
        n = int(rng.integers(g.n - 1, 51))
        r = contraction_check(ker, nu, n, tol=1e-9)
        held += r.holds
        worst = max(worst, r.tv - r.bound)
    assert report(4, held == 100, f"{held}/100 hold, max(tv-bound)={worst:.3e}",
                  time.perf_counter() - t0, 5)


def test_criterion_05_homogeneous_ergodicity():
    t0 = time.perf_counter()
    labels = [f"v{i}" for i in range(5)]
    g = build_graph(labels, list(zip(labels, labels[1:])))
    mu = Distribution.from_values(labels, [0.4, 0.25, 0.15, 0.12, 0.08])
    r = run(plan(mu, g), 10**6, seed=5)
    tv = tv_array(r.empirical.array, mu.array)
    ok = tv <= 0.01 and r.consistency_violations == 0
    assert report(5, ok, f"TV={tv:.4f} (<=0.01)", time.perf_counter() - t0, 10)


def test_criterion_06_epsilon_approximation():
    t0 = time.perf_counter()
    g, mu = ex1()
    p = plan(mu, g, epsilon=0.05)
    r = run(p, 10**6, seed=6)
    gap = float(np.abs(r.empirical.array - mu.array).max())
    f = np.random.default_rng(606).uniform(-1, 1, size=4)
    f /= np.abs(f).max()
    err = abs(ergodic_average(r, f) - float(mu.array @ f))
    bound = 0.05 * np.abs(f).max()
    ok = p.k == 20 and gap <= 0.05 + 0.01 and err <= bound + 0.01
    assert report(6, ok, f"k={p.k}, max|emp-mu|={gap:.4f} (<=0.06), "
                  f"|avg f - E f|={err:.4f} (<={bound + 0.01:.2f})",
                  time.perf_counter() - t0, 10)


def test_criterion_07_nonhomogeneous_substitutes():
    t0 = time.perf_counter()
    g, mu = ex1()
    # (a) exact boundaries for N = 3 and N = 4
    path3 = build_graph(["a", "b", "c"], [("a", "b"), ("b", "c")])
    mu3 = Distribution.from_values(path3.labels, ["1/2", "0", "1/2"])
    ok_a = True
    for d, gr, n in ((mu3, path3, 3), (mu, g, 4)):
        s = make_schedule("PAPER_POLY", d, gr)
        e = 5 * n
        ok_a &= s.exponent == e
        ok_a &= all(s.boundary(ell) == ell**e - s.k_start**e
                    for ell in range(s.k_start, 11))
    # N = 4 already exceeds 64-bit counters at l = 10
    ok_a &= s.boundary(10) > 2**64
    # (b) every block kernel is stationary for its mixture
    s = make_schedule("PAPER_POLY", mu, g)
    p = plan(mu, g, schedule=s)
    worst_b = max(stationary_residual(p.kernel_for(k)) for k in range(s.k_start, 11))
    ok_b = worst_b <= 1e-12
    # (c) practical geometric schedule: block of index l has length 10^4 * 2^l
    k0 = kbar(mu) + 1
    sp = make_schedule("PRACTICAL", mu, g, geometric=(10**4 * 2**k0, 2))
    r = run(plan(mu, g, schedule=sp), 10**6, seed=7)
    tv = tv_array(r.empirical.array, mu.array)
    ok_c = tv <= 0.05 and r.consistency_violations == 0
    ok = ok_a and ok_b and ok_c
    assert report(7, ok, f"(a) {'ok' if ok_a else 'bad'}, (b) worst={worst_b:.1e}, "
                  f"(c) TV={tv:.4f} (<=0.05) over k={r.meta['k_values']}",
                  time.perf_counter() - t0, 30)


def test_criterion_08_fast_schedule_fails():
    t0 = time.perf_counter()
    r = counterexample_scenario(replicas=1000, steps=10**5, seed=8)
    ok = r.stuck_fraction >= 0.45 and r.mean_final_tv >= 0.3 and r.consistency_violations == 0
    assert report(8, ok, f"stuck={r.stuck_fraction:.3f} (>=0.45), "
                  f"mean TV={r.mean_final_tv:.3f} (>=0.3)", time.perf_counter() - t0, 60)


def oracle_tag(adj, supp):
    if len(supp) == 1:
        return Case.DIRAC
    if induced_connected(adj, supp):
        return Case.CONNECTED_SUPPORT
    r = reach(adj)
    if all(r[i, j] for i in supp for j in supp):
        return Case.SUPPORT_IN_ONE_COMPONENT
    return Case.SUPPORT_SPLIT


def test_criterion_09_exhaustive_classification():
    t0 = time.perf_counter()
    total = agree = 0
    for n in range(1, 6):
        labels = [f"x{i}" for i in range(n)]
        pairs = list(itertools.combinations(range(n), 2))
        for mask in range(1 << len(pairs)):
            chosen = [pairs[b] for b in range(len(pairs)) if mask >> b & 1]
            g = build_graph(labels, [(labels[i], labels[j]) for i, j in chosen])
            adj = np.eye(n, dtype=bool)
            for i, j in chosen:
                adj[i, j] = adj[j, i] = True
            for smask in range(1, 1 << n):
                supp = [i for i in range(n) if smask >> i & 1]
                mass = tuple(F(1, len(supp)) if i in supp else F(0) for i in range(n))
                got = classify(Distribution(g.labels, mass), g).tag
                total += 1
                agree += got is oracle_tag(adj, supp)
    assert report(9, agree == total, f"{agree}/{total} agree", time.perf_counter() - t0, 30)


def test_criterion_10_product_chain():
    t0 = time.perf_counter()
    factors = []
    for prefix, q in (("a", "0.3"), ("b", "0.7")):
        g = build_graph([f"{prefix}0", f"{prefix}1"], [(f"{prefix}0", f"{prefix}1")])
        factors.append((Distribution.from_values(g.labels, [1 - F(q), q]), g))
    spec = build_product_spec(factors)
    r = run_product(spec, 10**6, seed=10)
    joint = tv_array(r.joint.empirical.array, spec.joint_target.array)
    marg = [tv_array(m.empirical.array, f[0].array) for m, f in zip(r.marginals, factors)]
    ok = joint <= 0.02 and max(marg) <= 0.01 and r.joint.consistency_violations == 0
    assert report(10, ok, f"joint TV={joint:.4f}, marginal TVs={[round(x, 4) for x in marg]}, "
                  f"violations={r.joint.consistency_violations}", time.perf_counter() - t0, 15)


def enumerate_law(p, steps):
    """Law of X(steps) from the explicit weight of every path with nonzero weight."""
    kers = [kernel_at_time(p, t).matrix if p.mode is Mode.NONHOMOGENEOUS else p.kernel.matrix
            for t in range(steps)]
    n = len(p.states)
    init = p.initial.array
    ends = np.flatnonzero(init > 0)
    weights = init[ends]
    for t in range(steps):
        m = kers[t]
        nxt, w = [], []
        for j in range(n):
            nxt.append(np.full(ends.size, j))
            w.append(weights * m[ends, j])
        ends, weights = np.concatenate(nxt), np.concatenate(w)
        keep = weights > 0
        ends, weights = ends[keep], weights[keep]
    return np.bincount(ends, weights=weights, minlength=n), ends.size


def test_criterion_11_exact_distribution_oracle():
    t0 = time.perf_counter()
    g1, mu1 = ex1()
    labels = [f"v{i}" for i in range(6)]
    g2 = build_graph(labels, list(zip(labels, labels[1:])))
    mu2 = Distribution.from_values(labels, ["1/3", "0", "1/3", "0", "0", "1/3"])
    instances = [
        plan(mu1, g1, schedule=make_schedule("PRACTICAL", mu1, g1, blocks=[2, 3, 4, 5])),
        plan(mu2, g2, schedule=make_schedule("PRACTICAL", mu2, g2, blocks=[3, 4, 6])),
        plan(mu2, g2, epsilon=0.2),
    ]
    worst_exact, worst_z, paths = 0.0, 0.0, 0
    replicas = 10**6
    for i, p in enumerate(instances):
        steps = 12
        law = marginal_law(p, steps)
        enum, count = enumerate_law(p, steps)
        paths += count
        worst_exact = max(worst_exact, float(np.abs(law - enum).max()))
        counts = sample_final_states(p, steps, seed=11 + i, replicas=replicas)
        sigma = np.sqrt(replicas * law * (1 - law))
        dev = np.abs(counts - replicas * law)
        z = np.where(sigma > 0, dev / np.where(sigma > 0, sigma, 1), np.where(dev > 0, np.inf, 0))
        worst_z = max(worst_z, float(z.max()))
    ok = worst_exact <= 1e-12 and worst_z <= 3
    assert report(11, ok, f"|matrix-enum|={worst_exact:.1e} over {paths} paths, "
                  f"worst MC z={worst_z:.2f} (<=3)", time.perf_counter() - t0, 60)
