"""TV between the time-averaged empirical law and the target, over a grid of
horizons, for the homogeneous, epsilon and practical-schedule chains.

    python scripts/tv_convergence.py --seeds 20 --horizon 1000000
"""
import argparse
from dataclasses import dataclass, field

import numpy as np

from graphmc.dist import Distribution
from graphmc.graph import build_graph
from graphmc.planner import make_schedule, plan
from graphmc.simulator import four_state_instance, run


@dataclass
class Config:
    horizon: int = 10**6
    seeds: int = 10
    checkpoints: list = field(default_factory=lambda: [10**3, 10**4, 10**5, 10**6])
    epsilon: float = 0.05
    practical_first: int = 10**4
    practical_ratio: float = 2.0


def chains(cfg: Config):
    labels = [f"v{i}" for i in range(5)]
    path = build_graph(labels, list(zip(labels, labels[1:])))
    mu5 = Distribution.from_values(labels, [0.4, 0.25, 0.15, 0.12, 0.08])
    g, mu = four_state_instance()
    sched = make_schedule("PRACTICAL", mu, g,
                          geometric=(cfg.practical_first, cfg.practical_ratio))
    return {
        "path5 homogeneous": plan(mu5, path),
        f"four-state epsilon={cfg.epsilon}": plan(mu, g, epsilon=cfg.epsilon),
        "four-state practical": plan(mu, g, schedule=sched),
    }


def main(cfg: Config) -> None:
    cps = [t for t in cfg.checkpoints if t <= cfg.horizon]
    for name, p in chains(cfg).items():
        tv = np.array([[v for _, v in run(p, cfg.horizon, seed=s, checkpoints=cps).tv_trace]
                       for s in range(cfg.seeds)])
        print(name)
        for t, m, sd in zip(cps, tv.mean(axis=0), tv.std(axis=0)):
            print(f"  t={t:>9d}  TV mean={m:.4f}  sd={sd:.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=Config.horizon)
    ap.add_argument("--seeds", type=int, default=Config.seeds)
    ap.add_argument("--epsilon", type=float, default=Config.epsilon)
    a = ap.parse_args()
    main(Config(horizon=a.horizon, seeds=a.seeds, epsilon=a.epsilon))
