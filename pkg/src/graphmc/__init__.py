"""Graph-consistent Markov chains whose empirical law converges to a target."""
from .dist import Distribution, kbar, low_mass_set, mixture, support, tv_distance
from .graph import (
    Graph,
    build_graph,
    connected_components,
    induced_subgraph,
    is_adjacent,
    is_connected,
    strong_product,
)
from .kernel import (
    StochasticKernel,
    base_probability,
    build_kernel,
    contraction_check,
    dobrushin_delta,
    lemma_bound_check,
    matrix_power,
    order_states,
    stationary_residual,
    verify_reversible,
)
from .planner import (
    Case,
    ChainPlan,
    Mode,
    Schedule,
    ScheduleKind,
    classify,
    kernel_at_time,
    make_schedule,
    plan,
)
from .product import ProductSpec, build_product_spec, run_product
from .simulator import (
    TrajectoryReport,
    counterexample_scenario,
    ergodic_average,
    run,
    step,
)

__version__ = "0.1.0"
