"""Four-state instance with a new kernel every step: how often the chain
never leaves its starting state, as a function of the horizon.

    python scripts/fast_schedule.py --replicas 1000
"""
import argparse
from dataclasses import dataclass, field

from graphmc.simulator import counterexample_scenario


@dataclass
class Config:
    replicas: int = 1000
    horizons: list = field(default_factory=lambda: [10**2, 10**3, 10**4, 10**5])
    seed: int = 0


def main(cfg: Config) -> None:
    print(f"{'horizon':>8} {'stuck':>7} {'mean TV':>8}")
    for h in cfg.horizons:
        r = counterexample_scenario(cfg.replicas, h, cfg.seed)
        print(f"{h:>8d} {r.stuck_fraction:>7.3f} {r.mean_final_tv:>8.3f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replicas", type=int, default=Config.replicas)
    ap.add_argument("--seed", type=int, default=Config.seed)
    a = ap.parse_args()
    main(Config(replicas=a.replicas, seed=a.seed))
