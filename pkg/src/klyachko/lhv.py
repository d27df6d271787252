"""Hidden-variable (chart mixture) quantities.

All functions are linear in the chart weights and evaluate them with plain
Python arithmetic, so ``Fraction`` weights give exact rational answers and
float weights give float answers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Mapping, Sequence

from ._validation import DEFAULT_TOL, check_vertex
from .charts import ChartClass, charts_of_class, enumerate_charts
from .geometry import PENTAGON_EDGES, PENTAGRAM_EDGES

N_CHARTS = 11
THIRD = Fraction(1, 3)
_ONES_PER_CHART = tuple(sum(c.values) for c in enumerate_charts())


@dataclass(frozen=True)
class MixtureWeights:
    """A probability distribution over the 11 charts in canonical order."""

    weights: tuple

    def __post_init__(self):
        w = tuple(self.weights)
        if len(w) != N_CHARTS:
            raise ValueError(f"need {N_CHARTS} chart weights, got {len(w)}")
        for x in w:
            if not isinstance(x, Real) or isinstance(x, bool):
                raise TypeError(f"weights must be real numbers, got {x!r}")
            if not math.isfinite(x):
                raise ValueError("weights must be finite")
            if x < 0:
                raise ValueError(f"negative chart weight {x}")
        total = sum(w)
        exact = all(isinstance(x, (int, Fraction)) for x in w)
        if (total != 1) if exact else abs(total - 1) > DEFAULT_TOL:
            raise ValueError(f"chart weights sum to {total}, not 1")
        object.__setattr__(self, "weights", w)

    def __getitem__(self, j: int):
        return self.weights[j]

    def __iter__(self):
        return iter(self.weights)

    def class_weights(self) -> dict[ChartClass, object]:
        return {k: sum(self.weights[j] for j in charts_of_class(k)) for k in ChartClass}

    @classmethod
    def point_mass(cls, j: int) -> "MixtureWeights":
        return cls(tuple(Fraction(int(i == j)) for i in range(N_CHARTS)))

    @classmethod
    def from_class_weights(cls, class_weights: Mapping[ChartClass, object]) -> "MixtureWeights":
        """Spread each class weight uniformly over the charts of that class."""
        w = [Fraction(0)] * N_CHARTS
        for kind, weight in class_weights.items():
            members = charts_of_class(ChartClass(kind))
            for j in members:
                w[j] = weight / len(members)
        return cls(tuple(w))

    @classmethod
    def uniform_over(cls, members: Sequence[int], total=Fraction(1)) -> "MixtureWeights":
        w = [Fraction(0)] * N_CHARTS
        for j in members:
            w[j] = total / len(members)
        return cls(tuple(w))


@dataclass(frozen=True)
class PentagonEdge:
    label: int  # e1..e5
    a_vertex: int
    b_vertex: int

    def __post_init__(self):
        if (self.a_vertex, self.b_vertex) not in PENTAGON_EDGES:
            raise ValueError(f"({self.a_vertex}, {self.b_vertex}) is not an oriented pentagon edge")
        if PENTAGON_EDGES.index((self.a_vertex, self.b_vertex)) != self.label - 1:
            raise ValueError(f"pentagon edge e{self.label} is {PENTAGON_EDGES[self.label - 1]}")


def pentagon_edges() -> tuple[PentagonEdge, ...]:
    return tuple(PentagonEdge(i + 1, a, b) for i, (a, b) in enumerate(PENTAGON_EDGES))


@dataclass(frozen=True)
class BiasSpec:
    """Context-dependent chart distributions, keyed by pentagram edge."""

    per_context: Mapping[tuple[int, int], MixtureWeights]

    def __post_init__(self):
        ctx = dict(self.per_context)
        if set(ctx) != set(PENTAGRAM_EDGES):
            raise ValueError(f"bias needs exactly the contexts {PENTAGRAM_EDGES}, got {sorted(ctx)}")
        for edge, w in ctx.items():
            if not isinstance(w, MixtureWeights):
                ctx[edge] = MixtureWeights(tuple(w))
        object.__setattr__(self, "per_context", {e: ctx[e] for e in PENTAGRAM_EDGES})


def _as_weights(w) -> MixtureWeights:
    return w if isinstance(w, MixtureWeights) else MixtureWeights(tuple(w))


def mixture_marginal(w, vertex: int):
    """Probability that ``vertex`` reads 1 under the chart mixture ``w``."""
    w = _as_weights(w)
    k = check_vertex(vertex)
    return sum((wj for wj, c in zip(w, enumerate_charts()) if c.values[k]), 0)


def klyachko_sum(w):
    """Sum of the five vertex marginals, evaluated chart by chart as sum_j w_j * (ones in chart j)."""
    w = _as_weights(w)
    return sum((wj * n for wj, n in zip(w, _ONES_PER_CHART) if n), 0)


def pentagon_edge_joint(w, edge) -> object:
    """Shared-chart probability that both endpoints of ``edge`` read 1.

    ``edge`` is a :class:`PentagonEdge` or a pair of vertex labels.
    """
    w = _as_weights(w)
    a, b = (edge.a_vertex, edge.b_vertex) if isinstance(edge, PentagonEdge) else edge
    ia, ib = check_vertex(a), check_vertex(b)
    return sum((wj for wj, c in zip(w, enumerate_charts()) if c.values[ia] and c.values[ib]), 0)


def pentagon_sum(w):
    return sum((pentagon_edge_joint(w, e) for e in pentagon_edges()), 0)


def solve_marginal_mixtures() -> tuple[MixtureWeights, MixtureWeights]:
    """The class mixtures (C2, C1) and (C2, C0) giving marginal 1/3 at every vertex.

    Each solves ``x * m2 + y * m_other = 1/3, x + y = 1`` where ``m2 = 2/5``
    and ``m_other`` is the per-vertex rate of the other class (1/5 or 0).
    """
    m = {k: Fraction(int(k), 5) for k in ChartClass}
    out = []
    for other in (ChartClass.C1, ChartClass.C0):
        x = (THIRD - m[other]) / (m[ChartClass.C2] - m[other])
        out.append(MixtureWeights.from_class_weights({ChartClass.C2: x, other: 1 - x}))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# exact LP over marginal-1/3 mixtures


def _constraint_system(marginal: Fraction) -> tuple[list[list[Fraction]], list[Fraction]]:
    charts = enumerate_charts()
    rows = [[Fraction(c.values[k]) for c in charts] for k in range(5)]
    rows.append([Fraction(1)] * N_CHARTS)
    return rows, [marginal] * 5 + [Fraction(1)]


def _row_reduce(rows, rhs):
    """Drop linearly dependent rows of ``[rows | rhs]``; raise if inconsistent."""
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    ncols = len(rows[0])
    pivot_row = 0
    for col in range(ncols):
        piv = next((i for i in range(pivot_row, len(aug)) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[pivot_row], aug[piv] = aug[piv], aug[pivot_row]
        p = aug[pivot_row][col]
        aug[pivot_row] = [x / p for x in aug[pivot_row]]
        for i in range(len(aug)):
            if i != pivot_row and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[pivot_row])]
        pivot_row += 1
    for r in aug[pivot_row:]:
        if r[-1] != 0:
            raise ValueError("inconsistent constraint system")
    kept = aug[:pivot_row]
    return [r[:-1] for r in kept], [r[-1] for r in kept]


def _solve_square(mat, rhs):
    """Exact Gauss-Jordan; returns ``None`` if ``mat`` is singular."""
    n = len(mat)
    aug = [list(r) + [b] for r, b in zip(mat, rhs)]
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    return [aug[i][n] for i in range(n)]


def feasible_vertices(marginal=THIRD) -> list[MixtureWeights]:
    """Vertices of ``{w >= 0 : sum w = 1, every vertex marginal = marginal}``.

    Found by solving every basis of the equality system exactly and keeping
    the nonnegative solutions, deduplicated, in basis-enumeration order.
    """
    rows, rhs = _row_reduce(*_constraint_system(Fraction(marginal)))
    rank = len(rows)
    found: list[tuple] = []
    seen = set()
    for basis in itertools.combinations(range(N_CHARTS), rank):
        sub = [[r[j] for j in basis] for r in rows]
        x = _solve_square(sub, rhs)
        if x is None or any(v < 0 for v in x):
            continue
        full = [Fraction(0)] * N_CHARTS
        for j, v in zip(basis, x):
            full[j] = v
        key = tuple(full)
        if key not in seen:
            seen.add(key)
            found.append(key)
    return [MixtureWeights(k) for k in found]


@dataclass(frozen=True)
class PentagonBounds:
    min: Fraction
    max: Fraction
    argmin: MixtureWeights
    argmax: MixtureWeights

    def __iter__(self):
        return iter((self.min, self.max, self.argmin, self.argmax))


def pentagon_sum_bounds(marginal=THIRD) -> PentagonBounds:
    """Exact range of the five-edge pentagon sum over mixtures with fixed marginals.

    A linear objective over a polytope attains its extremes at vertices, so
    scanning :func:`feasible_vertices` is exact.
    """
    verts = feasible_vertices(marginal)
    if not verts:
        raise ValueError(f"no chart mixture has every marginal equal to {marginal}")
    values = [pentagon_sum(v) for v in verts]
    lo = min(range(len(verts)), key=values.__getitem__)
    hi = max(range(len(verts)), key=values.__getitem__)
    return PentagonBounds(values[lo], values[hi], verts[lo], verts[hi])


# ---------------------------------------------------------------------------
# measurement-bias models


def contexts_of(vertex: int) -> tuple[tuple[int, int], tuple[int, int]]:
    check_vertex(vertex)
    return tuple(e for e in PENTAGRAM_EDGES if vertex in e)


def biased_marginals(bias: BiasSpec) -> list:
    """Per-vertex probability of reading 1 when contexts are chosen at random.

    Each vertex lies in two contexts; with both measured equally often the
    observed marginal is the mean over the two context distributions.
    """
    out = []
    for i in range(1, 6):
        c1, c2 = contexts_of(i)
        out.append((mixture_marginal(bias.per_context[c1], i) + mixture_marginal(bias.per_context[c2], i)) / 2)
    return out


def _edge_groups(a: int, b: int) -> tuple[list[int], list[int], list[int]]:
    only_a, only_b, rest = [], [], []
    for j, c in enumerate(enumerate_charts()):
        if c[a] and not c[b]:
            only_a.append(j)
        elif c[b] and not c[a]:
            only_b.append(j)
        else:
            rest.append(j)
    return only_a, only_b, rest


def edge_group_bias(group_weight, rest_weight=None) -> BiasSpec:
    """Bias putting ``group_weight`` on each single-endpoint chart group of every context.

    Charts with ``v(a)=1, v(b)=0`` share ``group_weight`` uniformly, as do charts
    with ``v(a)=0, v(b)=1``; the remaining charts share ``1 - 2*group_weight``.
    """
    if rest_weight is None:
        rest_weight = 1 - 2 * group_weight
    per = {}
    for a, b in PENTAGRAM_EDGES:
        only_a, only_b, rest = _edge_groups(a, b)
        w = [Fraction(0)] * N_CHARTS
        for group, total in ((only_a, group_weight), (only_b, group_weight), (rest, rest_weight)):
            for j in group:
                w[j] = total / len(group)
        per[(a, b)] = MixtureWeights(tuple(w))
    return BiasSpec(per)


def half_half_bias() -> BiasSpec:
    return edge_group_bias(Fraction(1, 2))


def quantum_matching_bias() -> BiasSpec:
    return edge_group_bias(1 / math.sqrt(5.0))


def context_independent_bias(w) -> BiasSpec:
    w = _as_weights(w)
    return BiasSpec({e: w for e in PENTAGRAM_EDGES})
