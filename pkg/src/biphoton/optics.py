"""Linear-optics transforms and the interferometer pipeline.

Every element is a linear map on creation operators,

    a_i^dag  ->  sum_j u[i, j] b_j^dag,

applied term by term to a sparse Fock state.  The rows of ``u`` are
orthonormal (an isometry), which keeps the state norm fixed; a lossy
element becomes an isometry by carrying an explicit ancilla mode for the
undetected photon.

The pipeline models a parametric pair entering a symmetric beamsplitter,

    a1x^dag -> (i cx^dag + dx^dag) / sqrt(2)
    a2y^dag -> (cy^dag + i dy^dag) / sqrt(2),

followed by one polarization analyzer per station,

    x^dag -> cos(theta) par^dag + sin(theta) perp^dag
    y^dag -> sin(theta) par^dag - cos(theta) perp^dag,

and, optionally, one loss channel per detected mode,

    t^dag -> sqrt(1 - eta) r^dag + sqrt(eta) t^dag.
"""

import math
from dataclasses import dataclass

import numpy as np

from .fock import (
    A1X,
    A2Y,
    C_PAR,
    C_PERP,
    C_X,
    C_Y,
    DETECTED_MODES,
    D_PAR,
    D_PERP,
    D_X,
    D_Y,
    FockState,
    ModeId,
    OccupationVector,
    create,
    vacuum,
)

#: maximum row-orthonormality defect tolerated at construction
UNITARY_TOLERANCE = 1e-12


class UnknownModeError(ValueError):
    """Raised when a pass-through mode collides with a transform output."""


@dataclass(frozen=True)
class ModeTransform:
    """Isometry on creation operators between named mode lists.

    ``matrix[i, j]`` is the amplitude sending input mode i to output
    mode j.  Construction fails unless the rows are orthonormal within
    UNITARY_TOLERANCE, so every transform preserves the state norm.
    """

    input_modes: tuple
    output_modes: tuple
    matrix: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.matrix, dtype=complex)
        if u.shape != (len(self.input_modes), len(self.output_modes)):
            raise ValueError("matrix shape does not match the mode lists")
        u = u.copy()
        u.flags.writeable = False
        object.__setattr__(self, "matrix", u)
        if not self.is_unitary(UNITARY_TOLERANCE):
            raise ValueError("transform rows are not orthonormal")

    def is_unitary(self, tol: float = UNITARY_TOLERANCE) -> bool:
        gram = self.matrix @ self.matrix.conj().T
        return bool(
            np.max(np.abs(gram - np.eye(len(self.input_modes)))) <= tol
        )


def beamsplitter_5050() -> ModeTransform:
    """Symmetric beamsplitter merging the two source beams."""
    s = 1.0 / math.sqrt(2.0)
    u = np.array(
        [
            [1j * s, s, 0.0, 0.0],
            [0.0, 0.0, s, 1j * s],
        ],
        dtype=complex,
    )
    return ModeTransform((A1X, A2Y), (C_X, D_X, C_Y, D_Y), u)


def polarizer_rotation(station: int, theta: float) -> ModeTransform:
    """Two-channel analyzer at ``station`` rotated by ``theta`` radians."""
    if station == 1:
        inputs, outputs = (C_X, C_Y), (C_PAR, C_PERP)
    elif station == 2:
        inputs, outputs = (D_X, D_Y), (D_PAR, D_PERP)
    else:
        raise ValueError(f"station must be 1 or 2, got {station!r}")
    c, s = math.cos(theta), math.sin(theta)
    u = np.array([[c, s], [s, -c]], dtype=complex)
    return ModeTransform(inputs, outputs, u)


def loss_channel(mode: ModeId, eta: float, ancilla: ModeId = None) -> ModeTransform:
    """Detector loss on ``mode`` with transmission probability ``eta``.

    The reflected photon lands in the ancilla (default: the lost twin of
    ``mode``), so the map stays an isometry and the state stays pure.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"efficiency must lie in (0, 1], got {eta!r}")
    if ancilla is None:
        ancilla = ModeId(mode.beam, mode.channel, lost=True)
    u = np.array([[math.sqrt(1.0 - eta), math.sqrt(eta)]], dtype=complex)
    return ModeTransform((mode,), (ancilla, mode), u)


def apply(transform: ModeTransform, state: FockState) -> FockState:
    """Apply ``transform`` to every term of ``state``.

    Modes that are not inputs of the transform pass through unchanged.
    A pass-through mode that is also one of the transform's outputs
    would silently alias freshly created photons, so that case raises
    UnknownModeError.
    """
    index = {m: i for i, m in enumerate(transform.input_modes)}
    outputs = transform.output_modes
    u = transform.matrix
    out_set = set(outputs)

    result: dict = {}
    for occ, amp in state.terms.items():
        # operator-product coefficient for the normalized ket
        coeff = amp / math.sqrt(occ.factorial_product())
        expansion = {(): coeff}
        for mode in occ.modes_with_multiplicity():
            if mode in index:
                row = u[index[mode]]
                images = [
                    (outputs[j], row[j]) for j in range(len(outputs)) if row[j] != 0
                ]
            else:
                if mode in out_set:
                    raise UnknownModeError(
                        f"occupied mode {mode} is an output of the transform "
                        "but not one of its inputs"
                    )
                images = [(mode, 1.0 + 0j)]
            grown: dict = {}
            for monomial, c in expansion.items():
                for target, w in images:
                    key = tuple(
                        sorted(monomial + (target,), key=ModeId.sort_key)
                    )
                    grown[key] = grown.get(key, 0j) + c * w
            expansion = grown
        for monomial, c in expansion.items():
            occ2 = OccupationVector.of(*monomial)
            amp2 = c * math.sqrt(occ2.factorial_product())
            result[occ2] = result.get(occ2, 0j) + amp2
    return FockState(result)


@dataclass(frozen=True)
class ExperimentConfig:
    """Analyzer angles (radians), detector efficiency, loss flag."""

    theta1: float
    theta2: float
    eta: float = 1.0
    include_loss: bool = False

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"efficiency must lie in (0, 1], got {self.eta!r}")


def build_experiment_state(cfg: ExperimentConfig) -> FockState:
    """Run one photon pair through the full pipeline.

    Source term a1x^dag a2y^dag |0>, then the beamsplitter, then both
    analyzers, then (when ``include_loss`` is set) a loss channel on
    each detected mode.  The overall phase is fixed by the pipeline
    itself: the two-station coincidence amplitudes come out real, e.g.
    the |c par, d par> amplitude is sin(theta1 - theta2) / 2.
    """
    state = create(create(vacuum(), A1X), A2Y)
    state = apply(beamsplitter_5050(), state)
    state = apply(polarizer_rotation(1, cfg.theta1), state)
    state = apply(polarizer_rotation(2, cfg.theta2), state)
    if cfg.include_loss:
        for mode in DETECTED_MODES:
            state = apply(loss_channel(mode, cfg.eta), state)
    return state
