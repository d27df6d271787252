"""Seeded Monte Carlo of the two-particle protocol and of the biased single-particle model.

Randomness is drawn in fixed-size blocks of trials.  Block ``k`` uses a Philox
generator keyed by ``(seed, k)``, so the outcome of trial ``t`` depends only on
``seed`` and ``t`` and never on how blocks are scheduled across workers.  All
tallies are integer counts, merged by addition.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._validation import check_positive_int
from .charts import enumerate_charts
from .geometry import PENTAGON_EDGES, PentagramFrame
from .lhv import (
    BiasSpec,
    MixtureWeights,
    biased_marginals,
    mixture_marginal,
    pentagon_edge_joint,
)
from .quantum import EntangledState, joint_table, make_entangled_state

BLOCK_SIZE = 1 << 16
PROB_CLEAN_TOL = 1e-12

_CHART_BITS = np.array([c.values for c in enumerate_charts()], dtype=np.int8)

# unordered pentagon edge index for each (a, b), 0-based; -1 if not a pentagon edge
_PENTAGON_INDEX = np.full((5, 5), -1, dtype=np.int64)
for _i, (_a, _b) in enumerate(PENTAGON_EDGES):
    _PENTAGON_INDEX[_a - 1, _b - 1] = _PENTAGON_INDEX[_b - 1, _a - 1] = _i


# ---------------------------------------------------------------------------
# models and pairing


@dataclass(frozen=True)
class Quantum:
    state: EntangledState = field(default_factory=make_entangled_state)
    kind = "quantum"


@dataclass(frozen=True)
class SharedChartLHV:
    weights: MixtureWeights
    kind = "lhv"

    def __post_init__(self):
        if not isinstance(self.weights, MixtureWeights):
            object.__setattr__(self, "weights", MixtureWeights(tuple(self.weights)))


@dataclass(frozen=True)
class BiasedSingleParticle:
    bias: BiasSpec
    kind = "biased"


ModelSpec = Union[Quantum, SharedChartLHV, BiasedSingleParticle]


class Case(enum.IntEnum):
    SAME = 0
    PENTAGRAM = 1
    PENTAGON = 2
    INDEPENDENT = 3


@dataclass(frozen=True)
class PairingScheme:
    """Relative frequencies with which B's vertex is chosen relative to A's.

    ``same`` repeats A's vertex, ``pentagram`` picks one of its two orthogonal
    neighbours at random, ``pentagon`` picks the B-endpoint of the oriented
    pentagon edge starting at A (1->4, 4->2, 2->5, 5->3, 3->1), and
    ``independent`` draws B uniformly.
    """

    same: float = 1.0
    pentagram: float = 1.0
    pentagon: float = 1.0
    independent: float = 0.0

    def __post_init__(self):
        p = self.proportions()
        if np.any(p < 0) or not np.all(np.isfinite(p)) or p.sum() <= 0:
            raise ValueError(f"invalid pairing proportions {tuple(p)}")

    def proportions(self) -> np.ndarray:
        return np.array([self.same, self.pentagram, self.pentagon, self.independent], dtype=float)

    def cases(self) -> set[Case]:
        return {c for c, p in zip(Case, self.proportions()) if p > 0}

    @classmethod
    def named(cls, name: str) -> "PairingScheme":
        try:
            return PAIRINGS[name]
        except KeyError:
            raise ValueError(f"unknown pairing {name!r}; choose from {sorted(PAIRINGS)}") from None


PAIRINGS = {
    "mixed": PairingScheme(1, 1, 1, 0),
    "same": PairingScheme(1, 0, 0, 0),
    "pentagram": PairingScheme(0, 1, 0, 0),
    "pentagon": PairingScheme(0, 0, 1, 0),
    "uniform": PairingScheme(0, 0, 0, 1),
}


# ---------------------------------------------------------------------------
# tallies


_TALLY_SHAPES = {
    "a_count": 5, "a_ones": 5, "b_count": 5, "b_ones": 5,
    "same_count": 1, "same_agree": 1,
    "pentagram_count": 1, "pentagram_both": 1,
    "pentagon_count": 5, "pentagon_both": 5,
}


def _empty_tally() -> dict[str, np.ndarray]:
    return {k: np.zeros(n, dtype=np.int64) for k, n in _TALLY_SHAPES.items()}


def _merge(tallies) -> dict[str, np.ndarray]:
    out = _empty_tally()
    for t in tallies:
        for k in out:
            out[k] += t[k]
    return out


def _freq(ones: int, n: int) -> tuple[float, float]:
    f = ones / n
    return f, math.sqrt(f * (1.0 - f) / n)


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float
    n: int


@dataclass(frozen=True)
class ExperimentStats:
    """Integer tallies of a run plus derived frequencies and standard errors."""

    model: str
    trial_count: int
    counts: dict

    def estimates(self) -> dict[str, Estimate]:
        """Frequency estimates for every quantity that received at least one trial."""
        c = self.counts
        out: dict[str, Estimate] = {}
        for side in ("a", "b"):
            for i in range(5):
                n = int(c[f"{side}_count"][i])
                if n:
                    out[f"marginal_{side}_{i + 1}"] = Estimate(*_freq(int(c[f"{side}_ones"][i]), n), n)
        if all(f"marginal_a_{i}" in out for i in range(1, 6)):
            parts = [out[f"marginal_a_{i}"] for i in range(1, 6)]
            out["klyachko_sum"] = Estimate(
                sum(p.value for p in parts), math.sqrt(sum(p.se**2 for p in parts)), sum(p.n for p in parts)
            )
        n = int(c["same_count"][0])
        if n:
            out["agreement"] = Estimate(*_freq(int(c["same_agree"][0]), n), n)
        n = int(c["pentagram_count"][0])
        if n:
            out["pentagram_double_one"] = Estimate(*_freq(int(c["pentagram_both"][0]), n), n)
        edges = []
        for i in range(5):
            n = int(c["pentagon_count"][i])
            if n:
                est = Estimate(*_freq(int(c["pentagon_both"][i]), n), n)
                out[f"pentagon_e{i + 1}"] = est
                edges.append(est)
        n = int(c["pentagon_count"].sum())
        if n:
            out["pentagon_edge_pooled"] = Estimate(*_freq(int(c["pentagon_both"].sum()), n), n)
        if len(edges) == 5:
            out["pentagon_sum"] = Estimate(
                sum(e.value for e in edges), math.sqrt(sum(e.se**2 for e in edges)), n
            )
        return out

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "trial_count": self.trial_count,
            "counts": {k: [int(x) for x in v] for k, v in self.counts.items()},
            "estimates": {k: {"value": e.value, "se": e.se, "n": e.n} for k, e in self.estimates().items()},
        }


# ---------------------------------------------------------------------------
# sampling


def _cumulative(p: np.ndarray) -> np.ndarray:
    """Cumulative table whose last column is exactly 1, with tiny masses zeroed."""
    p = np.where(np.abs(p) < PROB_CLEAN_TOL, 0.0, p)
    if np.any(p < 0):
        raise ValueError("negative probability in sampling table")
    p = p / p.sum(axis=-1, keepdims=True)
    cum = np.cumsum(p, axis=-1)
    cum[..., -1] = 1.0
    return cum


def _draw(cum_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Category ``k`` with ``cum[k-1] <= u < cum[k]``, row-wise."""
    return np.sum(u[:, None] >= cum_rows, axis=1)


class _Sampler:
    def __init__(self, model: ModelSpec, frame: PentagramFrame, pairing: PairingScheme):
        self.model = model
        self.pairing_cum = _cumulative(pairing.proportions())
        if isinstance(model, Quantum):
            self.table = _cumulative(joint_table(model.state, frame))  # (5, 5, 4)
        elif isinstance(model, SharedChartLHV):
            self.charts = _cumulative(np.array([float(x) for x in model.weights]))
        elif isinstance(model, BiasedSingleParticle):
            rows = [[float(x) for x in w] for w in model.bias.per_context.values()]
            self.contexts = _cumulative(np.array(rows))  # context k is pentagram edge (k, k+1)
        else:
            raise TypeError(f"unknown model {model!r}")

    def block(self, seed: int, index: int, size: int) -> dict[str, np.ndarray]:
        rng = np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))
        a = rng.integers(0, 5, size)
        u_case = rng.random(size)
        u_side = rng.integers(0, 2, size)
        u_free = rng.integers(0, 5, size)
        u_out = rng.random(size)
        tally = _empty_tally()

        if isinstance(self.model, BiasedSingleParticle):
            ctx = (a - u_side) % 5
            j = _draw(self.contexts[ctx], u_out)
            ones = _CHART_BITS[j, a]
            tally["a_count"] += np.bincount(a, minlength=5)
            tally["a_ones"] += np.bincount(a, weights=ones, minlength=5).astype(np.int64)
            return tally

        case = np.searchsorted(self.pairing_cum, u_case, side="right")
        b = np.select(
            [case == Case.SAME, case == Case.PENTAGRAM, case == Case.PENTAGON],
            [a, (a + 2 * u_side - 1) % 5, (a + 3) % 5],
            default=u_free,
        )
        if isinstance(self.model, Quantum):
            k = _draw(self.table[a, b], u_out)  # 0: 11, 1: 10, 2: 01, 3: 00
            oa = (k <= 1).astype(np.int64)
            ob = ((k == 0) | (k == 2)).astype(np.int64)
        else:
            j = _draw(np.broadcast_to(self.charts, (size, self.charts.size)), u_out)
            oa = _CHART_BITS[j, a].astype(np.int64)
            ob = _CHART_BITS[j, b].astype(np.int64)

        both = oa & ob
        tally["a_count"] += np.bincount(a, minlength=5)
        tally["a_ones"] += np.bincount(a, weights=oa, minlength=5).astype(np.int64)
        tally["b_count"] += np.bincount(b, minlength=5)
        tally["b_ones"] += np.bincount(b, weights=ob, minlength=5).astype(np.int64)
        same = a == b
        tally["same_count"][0] += int(same.sum())
        tally["same_agree"][0] += int((oa[same] == ob[same]).sum())
        ortho = ((a - b) % 5 == 1) | ((b - a) % 5 == 1)
        tally["pentagram_count"][0] += int(ortho.sum())
        tally["pentagram_both"][0] += int(both[ortho].sum())
        edge = _PENTAGON_INDEX[a, b]
        on_edge = edge >= 0
        tally["pentagon_count"] += np.bincount(edge[on_edge], minlength=5)
        tally["pentagon_both"] += np.bincount(edge[on_edge], weights=both[on_edge], minlength=5).astype(np.int64)
        return tally


def run_trials(model: ModelSpec, frame: PentagramFrame, n: int, seed: int,
               pairing: PairingScheme | str = "mixed", workers: int = 1) -> ExperimentStats:
    """Simulate ``n`` trials of ``model``; the result depends only on (model, n, seed, pairing)."""
    n = check_positive_int(n, "n")
    workers = check_positive_int(workers, "workers")
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    if isinstance(pairing, str):
        pairing = PairingScheme.named(pairing)
    sampler = _Sampler(model, frame, pairing)
    blocks = [(k, min(BLOCK_SIZE, n - k * BLOCK_SIZE)) for k in range(-(-n // BLOCK_SIZE))]
    if workers == 1:
        tallies = [sampler.block(int(seed), k, m) for k, m in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(lambda km: sampler.block(int(seed), *km), blocks))
    return ExperimentStats(model.kind, n, _merge(tallies))


# ---------------------------------------------------------------------------
# analytic targets and verdicts


def analytic_targets(model: ModelSpec, frame: PentagramFrame,
                     pairing: PairingScheme | str = "mixed") -> dict[str, float]:
    """Exact expected value of every quantity ``run_trials`` tallies under ``pairing``."""
    if isinstance(pairing, str):
        pairing = PairingScheme.named(pairing)
    if isinstance(model, BiasedSingleParticle):
        marg = [float(x) for x in biased_marginals(model.bias)]
        out = {f"marginal_a_{i + 1}": m for i, m in enumerate(marg)}
        out["klyachko_sum"] = float(sum(marg))
        return out

    if isinstance(model, Quantum):
        table = joint_table(model.state, frame)
        marg_a = [float(table[i, i, 0] + table[i, i, 1]) for i in range(5)]
        marg_b = [float(table[i, i, 0] + table[i, i, 2]) for i in range(5)]
        agree = float(np.mean([table[i, i, 0] + table[i, i, 3] for i in range(5)]))
        ortho = float(np.mean([table[i, (i + 1) % 5, 0] for i in range(5)]))
        edges = [float(table[a - 1, b - 1, 0]) for a, b in PENTAGON_EDGES]
    elif isinstance(model, SharedChartLHV):
        w = model.weights
        marg_a = marg_b = [float(mixture_marginal(w, i)) for i in range(1, 6)]
        agree, ortho = 1.0, 0.0
        edges = [float(pentagon_edge_joint(w, e)) for e in PENTAGON_EDGES]
    else:
        raise TypeError(f"unknown model {model!r}")

    cases = pairing.cases()
    out = {}
    for i in range(5):
        out[f"marginal_a_{i + 1}"] = marg_a[i]
        out[f"marginal_b_{i + 1}"] = marg_b[i]
    out["klyachko_sum"] = sum(marg_a)
    if cases & {Case.SAME, Case.INDEPENDENT}:
        out["agreement"] = agree
    if cases & {Case.PENTAGRAM, Case.INDEPENDENT}:
        out["pentagram_double_one"] = ortho
    if cases & {Case.PENTAGON, Case.INDEPENDENT}:
        for i, e in enumerate(edges):
            out[f"pentagon_e{i + 1}"] = e
        out["pentagon_sum"] = sum(edges)
        if len(set(np.round(edges, 12))) == 1:
            out["pentagon_edge_pooled"] = edges[0]
    return out


KLYACHKO_BOUND = 2.0
PENTAGON_BOUND = 2.0 / 3.0


@dataclass(frozen=True)
class QuantityCheck:
    name: str
    estimate: float
    se: float
    target: float
    passed: bool

    @property
    def z(self) -> float:
        diff = abs(self.estimate - self.target)
        if self.se == 0:
            return 0.0 if diff == 0 else math.inf
        return diff / self.se


@dataclass(frozen=True)
class Verdict:
    checks: tuple[QuantityCheck, ...]
    inequalities: dict
    sigma: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[QuantityCheck]:
        return [c for c in self.checks if not c.passed]


def evaluate(stats: ExperimentStats, predictions: dict[str, float], sigma: float = 4.0,
             atol: float = 1e-12) -> Verdict:
    """Compare estimates with targets: a quantity passes when ``|est - target| <= sigma * SE``.

    ``atol`` absorbs float rounding in targets such as an agreement of
    ``1.0000000000000004`` against an observed frequency of exactly 1.

    Also reports whether the Klyachko sum (bound 2, from above) and the pentagon
    sum (bound 2/3, from below) are significantly violated at ``sigma``.
    """
    if stats.trial_count < 1:
        raise ValueError("no trials to evaluate")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    est = stats.estimates()
    missing = sorted(set(predictions) - set(est))
    if missing:
        raise ValueError(f"no estimate for predicted quantities: {missing}")
    if not predictions:
        raise ValueError("empty prediction set")
    checks = []
    for name in sorted(predictions):
        e, target = est[name], float(predictions[name])
        checks.append(QuantityCheck(name, e.value, e.se, target, abs(e.value - target) <= sigma * e.se + atol))
    ineq = {}
    if "klyachko_sum" in est:
        k = est["klyachko_sum"]
        ineq["klyachko"] = "violated" if k.value - sigma * k.se > KLYACHKO_BOUND else "satisfied"
    if "pentagon_sum" in est:
        p = est["pentagon_sum"]
        ineq["pentagon"] = "violated" if p.value + sigma * p.se < PENTAGON_BOUND else "satisfied"
    return Verdict(tuple(checks), ineq, sigma)
