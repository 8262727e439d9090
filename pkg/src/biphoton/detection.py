"""Click statistics: outcome classes, joint tables, detector imperfections.

Each station watches two detectors, D+ on the analyzer-parallel mode and
D- on the perpendicular one.  With at most two photons the per-station
record (n+, n-) falls into six classes:

    1: (0, 1)   lone D- click
    2: (1, 0)   lone D+ click
    3: (0, 0)   no click
    4: (1, 1)   one click on each detector
    5: (2, 0)   both photons on D+
    6: (0, 2)   both photons on D-

Imperfections are modeled separately: photon loss (efficiency eta) acts
upstream in the state pipeline, while imperfect double-click recognition
(alpha) acts on the finished table, turning class 6 into class 1 and
class 5 into class 2 with probability 1 - alpha per station.
"""

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .fock import (
    C_PAR,
    C_PERP,
    D_PAR,
    D_PERP,
    FockState,
    OccupationVector,
    norm,
)
from .optics import ExperimentConfig, build_experiment_state


class ImpossibleCountError(ValueError):
    """Raised when a station would register more than two photons."""


class StationOutcome(IntEnum):
    """Six-way classification of one station's detector record."""

    SINGLE_MINUS = 1
    SINGLE_PLUS = 2
    NO_CLICK = 3
    COINCIDENCE = 4
    DOUBLE_PLUS = 5
    DOUBLE_MINUS = 6


_CLASS_BY_COUNTS = {
    (0, 1): StationOutcome.SINGLE_MINUS,
    (1, 0): StationOutcome.SINGLE_PLUS,
    (0, 0): StationOutcome.NO_CLICK,
    (1, 1): StationOutcome.COINCIDENCE,
    (2, 0): StationOutcome.DOUBLE_PLUS,
    (0, 2): StationOutcome.DOUBLE_MINUS,
}

_PLUS_MODE = {1: C_PAR, 2: D_PAR}
_MINUS_MODE = {1: C_PERP, 2: D_PERP}


@dataclass(frozen=True)
class DetectorModel:
    """Detector imperfections: double-click recognition and efficiency.

    ``alpha`` is the probability that two photons on one detector are
    recognized as such (1 = ideal).  ``eta`` is the probability that a
    photon reaching a detector is registered.
    """

    alpha: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"efficiency must lie in (0, 1], got {self.eta!r}")


def classify(occ: OccupationVector) -> tuple:
    """Map an occupation over detected modes to per-station outcome classes.

    Loss-ancilla counts are ignored; any other mode outside the four
    detected ones is a contract violation.
    """
    plus = {1: 0, 2: 0}
    minus = {1: 0, 2: 0}
    for mode, count in occ.pairs:
        if mode.lost:
            continue
        if mode in (C_PAR, D_PAR):
            plus[mode.station] += count
        elif mode in (C_PERP, D_PERP):
            minus[mode.station] += count
        else:
            raise ValueError(f"mode {mode} is not a detected mode")
    outcomes = []
    for station in (1, 2):
        key = (plus[station], minus[station])
        if key not in _CLASS_BY_COUNTS:
            raise ImpossibleCountError(
                f"station {station} cannot register counts {key}"
            )
        outcomes.append(_CLASS_BY_COUNTS[key])
    return tuple(outcomes)


@dataclass(frozen=True)
class ValueAssignment:
    """Dichotomic +/-1 value per outcome class, one tuple per station.

    The default assigns -1 only to a lone D- click (class 1) and +1 to
    everything else, including no-click events.
    """

    a: tuple = (-1, 1, 1, 1, 1, 1)
    b: tuple = (-1, 1, 1, 1, 1, 1)

    def __post_init__(self):
        for side in (self.a, self.b):
            if len(side) != 6 or any(v not in (-1, 1) for v in side):
                raise ValueError("values must be six entries of +/-1")

    def value(self, outcome: int, station: int) -> int:
        side = self.a if station == 1 else self.b
        return side[int(outcome) - 1]


DEFAULT_ASSIGNMENT = ValueAssignment()


def assigned_value(values: ValueAssignment, outcome: int, station: int) -> int:
    if station not in (1, 2):
        raise ValueError(f"station must be 1 or 2, got {station!r}")
    return values.value(outcome, station)


@dataclass(frozen=True)
class JointProbabilityTable:
    """6x6 joint outcome probabilities p[i][j] plus the parameters behind them."""

    probs: np.ndarray
    theta1: float
    theta2: float
    eta: float
    alpha: float

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (6, 6):
            raise ValueError("table must be 6x6")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    def p(self, i: int, j: int) -> float:
        """Probability of class i at station 1 and class j at station 2."""
        return float(self.probs[int(i) - 1, int(j) - 1])

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def records(self) -> list:
        """Flat record set {i, j, theta1, theta2, eta, alpha, p}, row-major."""
        out = []
        for i in range(1, 7):
            for j in range(1, 7):
                out.append(
                    {
                        "i": i,
                        "j": j,
                        "theta1": self.theta1,
                        "theta2": self.theta2,
                        "eta": self.eta,
                        "alpha": self.alpha,
                        "p": self.p(i, j),
                    }
                )
        return out


def joint_table(theta1: float, theta2: float, eta: float = 1.0) -> JointProbabilityTable:
    """Joint class probabilities from the loss-expanded state.

    Every entry is a Born-rule sum over final kets; nothing is copied
    from the closed forms, which serve as an independent cross-check.
    The table carries alpha = 1 (recognition errors are applied later).
    """
    cfg = ExperimentConfig(theta1, theta2, eta, include_loss=eta < 1.0)
    state = build_experiment_state(cfg)
    n = norm(state)
    if abs(n - 1.0) > 1e-9:
        raise RuntimeError(f"pipeline produced norm {n!r}, expected 1")
    probs = np.zeros((6, 6))
    for occ, amp in state.items():
        i, j = classify(occ)
        probs[i - 1, j - 1] += abs(amp) ** 2
    return JointProbabilityTable(probs, theta1, theta2, eta, 1.0)


def apply_alpha_confusion(table: JointProbabilityTable, alpha: float) -> JointProbabilityTable:
    """Degrade double-click recognition on a table built at alpha = 1.

    Per station, independently: class 6 mass moves to class 1 and class
    5 mass to class 2, each with weight 1 - alpha.  Implemented as the
    product channel M p M^T, which preserves total mass.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    if table.alpha != 1.0:
        raise ValueError("confusion must start from an alpha = 1 table")
    m = np.eye(6)
    m[0, 5] = 1.0 - alpha
    m[5, 5] = alpha
    m[1, 4] = 1.0 - alpha
    m[4, 4] = alpha
    probs = m @ table.probs @ m.T
    return JointProbabilityTable(probs, table.theta1, table.theta2, table.eta, alpha)


def closed_form_ideal_table(theta1: float, theta2: float) -> np.ndarray:
    """Lossless joint table from the trigonometric closed forms.

    Ten cells are populated: the four two-station coincidences driven by
    theta1 - theta2, and the six one-station pair classes driven by the
    local angle alone.
    """
    d = theta1 - theta2
    p = np.zeros((6, 6))
    p[0, 0] = p[1, 1] = 0.25 * math.sin(d) ** 2
    p[1, 0] = p[0, 1] = 0.25 * math.cos(d) ** 2
    p[4, 2] = p[5, 2] = 0.125 * math.sin(2.0 * theta1) ** 2
    p[2, 4] = p[2, 5] = 0.125 * math.sin(2.0 * theta2) ** 2
    p[3, 2] = 0.25 * math.cos(2.0 * theta1) ** 2
    p[2, 3] = 0.25 * math.cos(2.0 * theta2) ** 2
    return p


def closed_form_lossy_table(theta1: float, theta2: float, eta: float) -> np.ndarray:
    """Joint table with detector efficiency folded in, from closed forms.

    The detected-pair sector scales by eta^2.  Each one-sided lone-click
    class carries eta(1 - eta)/2: the factor 1/2 is forced by
    normalization, since the surviving photon of a split pair reaches a
    given station with probability 1/2 in every relevant ket.  The
    double no-click cell is (1 - eta)^2.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"efficiency must lie in (0, 1], got {eta!r}")
    p = eta * eta * closed_form_ideal_table(theta1, theta2)
    half = 0.5 * eta * (1.0 - eta)
    p[0, 2] += half
    p[1, 2] += half
    p[2, 0] += half
    p[2, 1] += half
    p[2, 2] += (1.0 - eta) ** 2
    return p
