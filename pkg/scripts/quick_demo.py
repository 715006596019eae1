"""Minimal ask/tell walkthrough on the four-bar truss problem.

Shows the pieces the CLI wires together: initial design, suggestions from a
lookahead acquisition method, and front/hypervolume bookkeeping.
"""

import numpy as np

from molbo.benchmarks import evaluate, make_problem
from molbo.engine import RunConfig, init_state, observe, suggest
from molbo.pareto import hypervolume


def main() -> None:
    cfg = RunConfig(
        problem="four_bar_truss", method="binom", horizon=4, iterations=10,
        init_points=5, seed=0, mc_samples=64, fit_restarts=4,
        pointwise_raw=128, joint_raw=192, opt_restarts=4, refine_evals=60,
    )
    problem = make_problem(cfg.problem)
    state = init_state(cfg)
    print(f"initial hypervolume: {hypervolume(state.front):.4f}")
    for t in range(1, cfg.iterations + 1):
        x = suggest(state, cfg)
        y = evaluate(problem, x)  # the expensive experiment happens here
        state = observe(state, x, y, fit_restarts=cfg.fit_restarts)
        print(f"iter {t:2d}: x={np.round(x, 3)}  y={np.round(y.values, 4)}  "
              f"hv={hypervolume(state.front):.4f}")
    print(f"final front size: {state.front.size}")


if __name__ == "__main__":
    main()
