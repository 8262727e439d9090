"""Event-level sampling of the joint click statistics.

Raw outcome pairs are drawn by inverse CDF over the 36 table cells at
alpha = 1; recognition errors are then applied per event and per station
(class 6 relabeled 1, class 5 relabeled 2, each with probability
1 - alpha).  Randomness comes from the counter-based Philox generator,
with one independent stream per (seed, setting index, chunk index), so
output is reproducible bit for bit regardless of chunking or thread
count.  Each event consumes three uniforms: cell choice, station-1
relabel, station-2 relabel; the raw stream therefore does not depend on
alpha.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bell import SETTING_LABELS, ChshSettings
from .detection import DEFAULT_ASSIGNMENT, DetectorModel, StationOutcome, joint_table

#: events drawn per Philox stream
CHUNK_SIZE = 1 << 16


class EmptyEventsError(ValueError):
    """Raised when an estimator is handed no events."""


class MixedSettingsError(ValueError):
    """Raised when a single-setting estimator sees several labels."""


class MissingSettingError(ValueError):
    """Raised when a CHSH estimate lacks one of the four settings."""


@dataclass(frozen=True)
class SamplerConfig:
    """Seeded sampling plan: one batch of events per CHSH setting."""

    seed: int
    n_per_setting: int
    model: DetectorModel
    settings: ChshSettings

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.n_per_setting < 1:
            raise ValueError("n_per_setting must be at least 1")


@dataclass(frozen=True)
class EventRecord:
    """One sampled event, fully labeled."""

    index: int
    setting: str
    psi1: float
    psi2: float
    raw: tuple
    observed: tuple
    a: int
    b: int


class EventBatch:
    """Column-oriented sequence of EventRecord.

    Columns are numpy arrays; indexing with an int materializes a single
    EventRecord, slices and boolean masks return a new batch view.
    """

    def __init__(self, labels, psi1_by_code, psi2_by_code, setting_codes,
                 raw1, raw2, obs1, obs2):
        self.labels = tuple(labels)
        self._psi1 = np.asarray(psi1_by_code, dtype=float)
        self._psi2 = np.asarray(psi2_by_code, dtype=float)
        self.setting_codes = setting_codes
        self.raw1 = raw1
        self.raw2 = raw2
        self.obs1 = obs1
        self.obs2 = obs2

    def __len__(self):
        return len(self.setting_codes)

    @property
    def a(self):
        """Station-1 values under the default assignment."""
        lut = np.asarray(DEFAULT_ASSIGNMENT.a, dtype=np.int8)
        return lut[self.obs1 - 1]

    @property
    def b(self):
        lut = np.asarray(DEFAULT_ASSIGNMENT.b, dtype=np.int8)
        return lut[self.obs2 - 1]

    @property
    def psi1(self):
        return self._psi1[self.setting_codes]

    @property
    def psi2(self):
        return self._psi2[self.setting_codes]

    def __getitem__(self, key):
        if isinstance(key, (int, np.integer)):
            idx = int(key)
            if idx < 0:
                idx += len(self)
            if not 0 <= idx < len(self):
                raise IndexError(idx)
            code = int(self.setting_codes[idx])
            return EventRecord(
                index=idx,
                setting=self.labels[code],
                psi1=float(self._psi1[code]),
                psi2=float(self._psi2[code]),
                raw=(StationOutcome(int(self.raw1[idx])),
                     StationOutcome(int(self.raw2[idx]))),
                observed=(StationOutcome(int(self.obs1[idx])),
                          StationOutcome(int(self.obs2[idx]))),
                a=int(self.a[idx]),
                b=int(self.b[idx]),
            )
        return EventBatch(
            self.labels, self._psi1, self._psi2,
            self.setting_codes[key], self.raw1[key], self.raw2[key],
            self.obs1[key], self.obs2[key],
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def split_by_setting(self) -> dict:
        """One sub-batch per label, in SETTING_LABELS order."""
        out = {}
        for code, label in enumerate(self.labels):
            out[label] = self[self.setting_codes == code]
        return out

    def to_csv(self, path) -> None:
        """Deterministic CSV export; identical configs give identical bytes."""
        a = self.a
        b = self.b
        with open(path, "w", newline="") as fh:
            fh.write("index,setting,psi1,psi2,raw1,raw2,obs1,obs2,a,b\n")
            for i in range(len(self)):
                code = int(self.setting_codes[i])
                fh.write(
                    f"{i},{self.labels[code]},"
                    f"{self._psi1[code]:.9g},{self._psi2[code]:.9g},"
                    f"{int(self.raw1[i])},{int(self.raw2[i])},"
                    f"{int(self.obs1[i])},{int(self.obs2[i])},"
                    f"{int(a[i])},{int(b[i])}\n"
                )


def _stream(seed: int, setting_index: int, chunk_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(seed),
                                 spawn_key=(setting_index, chunk_index))
    return np.random.Generator(np.random.Philox(seq))


def sample_events(cfg: SamplerConfig) -> EventBatch:
    """Draw n_per_setting events for each of the four CHSH settings."""
    n = int(cfg.n_per_setting)
    alpha = cfg.model.alpha
    labels = []
    psi1s = []
    psi2s = []
    codes = []
    raws1 = []
    raws2 = []
    obss1 = []
    obss2 = []
    for k, (label, psi) in enumerate(cfg.settings.pairs()):
        labels.append(label)
        psi1s.append(psi.psi1)
        psi2s.append(psi.psi2)
        theta1, theta2 = psi.to_thetas()
        table = joint_table(theta1, theta2, cfg.model.eta)
        cum = np.cumsum(table.probs.reshape(36))
        # float roundoff must not leave a gap above the last cell
        cum[-1] = max(cum[-1], 1.0)
        for chunk_index in range(math.ceil(n / CHUNK_SIZE)):
            m = min(CHUNK_SIZE, n - chunk_index * CHUNK_SIZE)
            u = _stream(cfg.seed, k, chunk_index).random((3, m))
            cell = np.searchsorted(cum, u[0], side="right").astype(np.uint8)
            raw1 = (cell // 6 + 1).astype(np.uint8)
            raw2 = (cell % 6 + 1).astype(np.uint8)
            obs1 = raw1.copy()
            obs2 = raw2.copy()
            rel1 = u[1] < (1.0 - alpha)
            rel2 = u[2] < (1.0 - alpha)
            obs1[(raw1 == 6) & rel1] = 1
            obs1[(raw1 == 5) & rel1] = 2
            obs2[(raw2 == 6) & rel2] = 1
            obs2[(raw2 == 5) & rel2] = 2
            codes.append(np.full(m, k, dtype=np.uint8))
            raws1.append(raw1)
            raws2.append(raw2)
            obss1.append(obs1)
            obss2.append(obs2)
    return EventBatch(
        labels, psi1s, psi2s,
        np.concatenate(codes), np.concatenate(raws1), np.concatenate(raws2),
        np.concatenate(obss1), np.concatenate(obss2),
    )


def estimate_correlation(events: EventBatch) -> tuple:
    """(mean, standard error) of the product a * b over one setting."""
    if len(events) == 0:
        raise EmptyEventsError("no events")
    if len(np.unique(events.setting_codes)) > 1:
        raise MixedSettingsError("events span several settings")
    ab = events.a.astype(float) * events.b
    n = len(ab)
    mean = float(ab.mean())
    var = float(ab.var(ddof=1)) if n > 1 else 0.0
    return mean, math.sqrt(var / n)


def estimate_chsh(groups) -> tuple:
    """(S estimate, standard error) from per-setting event groups.

    ``groups`` maps each of the four SETTING_LABELS to its events; the
    errors combine in quadrature.
    """
    for label in SETTING_LABELS:
        if label not in groups:
            raise MissingSettingError(f"missing setting {label!r}")
    means = {}
    errs = {}
    for label in SETTING_LABELS:
        means[label], errs[label] = estimate_correlation(groups[label])
    s = means["AB"] + means["A'B"] + means["AB'"] - means["A'B'"]
    err = math.sqrt(sum(e * e for e in errs.values()))
    return s, err
