"""Klyachko (KCBS) pentagram contextuality: geometry, charts, hidden-variable
mixtures, Born-rule values and a Monte Carlo of the two-particle test."""

from .charts import Chart, ChartClass, classify, enumerate_charts, is_valid_chart
from .experiment import (
    BiasedSingleParticle,
    ExperimentStats,
    PairingScheme,
    Quantum,
    SharedChartLHV,
    analytic_targets,
    evaluate,
    run_trials,
)
from .geometry import PENTAGON_EDGES, PENTAGRAM_EDGES, PentagramFrame, angle_between, build_pentagram, context_bases
from .lhv import (
    BiasSpec,
    MixtureWeights,
    PentagonEdge,
    biased_marginals,
    klyachko_sum,
    mixture_marginal,
    pentagon_edge_joint,
    pentagon_sum_bounds,
    solve_marginal_mixtures,
)
from .quantum import (
    EntangledState,
    JointDistribution,
    QutritState,
    born_probability,
    chsh_correlator,
    joint_distribution,
    make_entangled_state,
    max_chsh,
    pentagon_sum_quantum,
    single_particle_klyachko_sum,
)

__version__ = "0.1.0"
