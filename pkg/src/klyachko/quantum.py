"""Born-rule probabilities for the qutrit state and the maximally entangled pair."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._validation import DEFAULT_TOL, check_orthonormal, check_unit
from .geometry import PENTAGON_EDGES, PentagramFrame


@dataclass(frozen=True)
class QutritState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = check_unit(self.amplitudes, name="qutrit state")
        if amps.shape != (3,):
            raise ValueError(f"qutrit state needs 3 amplitudes, got shape {amps.shape}")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)


@dataclass(frozen=True)
class EntangledState:
    """Two-qutrit pure state.

    ``amplitudes[3*i + j]`` is the coefficient of ``|i>_A |j>_B`` in the
    computational product basis; ``basis`` holds the Schmidt vectors used to
    build it (rows).
    """

    amplitudes: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=float)
        if amps.shape != (9,):
            raise ValueError(f"two-qutrit state needs 9 amplitudes, got shape {amps.shape}")
        check_unit(amps, name="entangled state")
        basis = check_orthonormal(np.array(self.basis, dtype=float), name="Schmidt basis")
        amps.setflags(write=False)
        basis.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "basis", basis)

    def amplitude(self, i: int, j: int) -> float:
        return float(self.amplitudes[3 * i + j])

    def expectation(self, operator: np.ndarray) -> float:
        return float(self.amplitudes @ operator @ self.amplitudes)


@dataclass(frozen=True)
class JointDistribution:
    p11: float
    p10: float
    p01: float
    p00: float

    def __post_init__(self):
        vals = (self.p11, self.p10, self.p01, self.p00)
        if min(vals) < -DEFAULT_TOL:
            raise ValueError(f"negative probability in {vals}")
        if abs(sum(vals) - 1.0) > DEFAULT_TOL:
            raise ValueError(f"joint probabilities sum to {sum(vals)}")

    @property
    def a_marginal(self) -> float:
        return self.p11 + self.p10

    @property
    def b_marginal(self) -> float:
        return self.p11 + self.p01

    @property
    def agreement(self) -> float:
        return self.p11 + self.p00

    @property
    def correlator(self) -> float:
        return self.p11 - self.p10 - self.p01 + self.p00

    def as_array(self) -> np.ndarray:
        return np.array([self.p11, self.p10, self.p01, self.p00])


def projector(direction) -> np.ndarray:
    v = check_unit(direction, name="direction")
    return np.outer(v, v)


def born_probability(state, direction) -> float:
    """``|<direction|state>|**2`` for real unit vectors."""
    if isinstance(state, QutritState):
        state = state.amplitudes
    psi = check_unit(state, name="state")
    d = check_unit(direction, name="direction")
    return float(psi @ d) ** 2


def single_particle_klyachko_sum(frame: PentagramFrame) -> float:
    return sum(born_probability(frame.psi, v) for v in frame.vertices)


def make_entangled_state(basis=None) -> EntangledState:
    """``(1/sqrt 3) sum_i |a_i>|a_i>`` for an orthonormal basis ``{a_i}`` (rows)."""
    basis = np.eye(3) if basis is None else np.asarray(basis, dtype=float)
    basis = check_orthonormal(basis, name="basis")
    if basis.shape != (3, 3):
        raise ValueError(f"need three vectors in R^3, got shape {basis.shape}")
    amps = sum(np.kron(a, a) for a in basis) / math.sqrt(3.0)
    return EntangledState(amps, basis)


def joint_distribution(state: EntangledState, a_vertex: int, b_vertex: int,
                       frame: PentagramFrame) -> JointDistribution:
    pa = projector(frame.vertex(a_vertex))
    pb = projector(frame.vertex(b_vertex))
    eye = np.eye(3)
    return JointDistribution(
        p11=state.expectation(np.kron(pa, pb)),
        p10=state.expectation(np.kron(pa, eye - pb)),
        p01=state.expectation(np.kron(eye - pa, pb)),
        p00=state.expectation(np.kron(eye - pa, eye - pb)),
    )


def joint_table(state: EntangledState, frame: PentagramFrame) -> np.ndarray:
    """Array ``[a-1, b-1, k]`` of (p11, p10, p01, p00) for every vertex pair."""
    out = np.empty((5, 5, 4))
    for a, b in itertools.product(range(1, 6), repeat=2):
        out[a - 1, b - 1] = joint_distribution(state, a, b, frame).as_array()
    return out


def pentagon_sum_quantum(state: EntangledState, frame: PentagramFrame) -> float:
    return sum(joint_distribution(state, a, b, frame).p11 for a, b in PENTAGON_EDGES)


def chsh_correlator(state: EntangledState, a_vertex: int, b_vertex: int,
                    frame: PentagramFrame) -> float:
    """``<X Y>`` for the +-1 observables ``X = 2 P_a - 1`` and ``Y = 2 P_b - 1``."""
    x = 2.0 * projector(frame.vertex(a_vertex)) - np.eye(3)
    y = 2.0 * projector(frame.vertex(b_vertex)) - np.eye(3)
    return state.expectation(np.kron(x, y))


@dataclass(frozen=True)
class ChshMaximum:
    value: float
    x: int
    x_prime: int
    y: int
    y_prime: int


def chsh_value(corr: np.ndarray, x: int, xp: int, y: int, yp: int) -> float:
    c = lambda a, b: corr[a - 1, b - 1]  # noqa: E731
    return float(abs(c(x, y) + c(x, yp) + c(xp, y) - c(xp, yp)))


def correlator_table(state: EntangledState, frame: PentagramFrame) -> np.ndarray:
    return np.array([[chsh_correlator(state, a, b, frame) for b in range(1, 6)] for a in range(1, 6)])


def max_chsh(state: EntangledState, frame: PentagramFrame) -> ChshMaximum:
    """Largest CHSH expression over all 5**4 choices of A- and B-vertices."""
    corr = correlator_table(state, frame)
    best = None
    for x, xp, y, yp in itertools.product(range(1, 6), repeat=4):
        val = chsh_value(corr, x, xp, y, yp)
        if best is None or val > best.value:
            best = ChshMaximum(val, x, xp, y, yp)
    return best

