"""Noncontextual 0/1 value assignments ("charts") on the five pentagram vertices."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache

from .geometry import PENTAGON_EDGES, PENTAGRAM_EDGES


class ChartClass(enum.IntEnum):
    C0 = 0
    C1 = 1
    C2 = 2


@dataclass(frozen=True)
class Chart:
    """Value ``values[k-1]`` assigned to vertex ``k``."""

    values: tuple[int, int, int, int, int]

    def __post_init__(self):
        vals = tuple(int(x) for x in self.values)
        if len(vals) != 5 or any(x not in (0, 1) for x in vals):
            raise ValueError(f"a chart is five bits, got {self.values!r}")
        if not is_valid_chart(vals):
            raise ValueError(f"{vals} puts two 1s on a pentagram edge")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, label: int) -> int:
        return self.values[label - 1]

    @property
    def ones(self) -> tuple[int, ...]:
        return tuple(k for k in range(1, 6) if self.values[k - 1])

    @property
    def kind(self) -> ChartClass:
        return ChartClass(sum(self.values))

    def __str__(self) -> str:
        return "".join(map(str, self.values))


def is_valid_chart(values) -> bool:
    vals = tuple(values)
    if len(vals) != 5:
        return False
    return not any(vals[a - 1] and vals[b - 1] for a, b in PENTAGRAM_EDGES)


def classify(chart) -> ChartClass:
    if not isinstance(chart, Chart):
        chart = Chart(tuple(chart))
    return chart.kind


def _canonical_key(values: tuple[int, ...]):
    ones = tuple(k for k in range(1, 6) if values[k - 1])
    if len(ones) == 2:
        edge_pos = next(i for i, e in enumerate(PENTAGON_EDGES) if set(e) == set(ones))
        return (2, edge_pos)
    return (len(ones), ones)


@lru_cache(maxsize=None)
def enumerate_charts() -> tuple[Chart, ...]:
    """All 11 valid charts: C0, then C1 by vertex, then C2 in pentagon-edge order 14, 42, 25, 53, 31."""
    valid = [bits for bits in itertools.product((0, 1), repeat=5) if is_valid_chart(bits)]
    return tuple(Chart(bits) for bits in sorted(valid, key=_canonical_key))


def chart_index(chart) -> int:
    """0-based position of ``chart`` in canonical order."""
    vals = chart.values if isinstance(chart, Chart) else tuple(int(x) for x in chart)
    for j, c in enumerate(enumerate_charts()):
        if c.values == vals:
            return j
    raise ValueError(f"{vals} is not a valid chart")


def charts_of_class(kind: ChartClass) -> tuple[int, ...]:
    return tuple(j for j, c in enumerate(enumerate_charts()) if c.kind == kind)
