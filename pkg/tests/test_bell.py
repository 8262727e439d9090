import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biphoton.bell import (
    SETTING_LABELS,
    ChshSettings,
    PsiAngles,
    chsh,
    correlation_closed_form,
    correlation_from_table,
    correlation_via_table,
    hom_port_probabilities,
    table_for,
)
from biphoton.detection import (
    DetectorModel,
    ValueAssignment,
    joint_table,
)

# setting angles quoted for the alpha = 0 maximum, reused across tests
ALPHA0_SETTINGS = ChshSettings(2.93798, 4.25513, -0.20241, 1.11708)

angles = st.floats(-8.0, 8.0, allow_nan=False, allow_subnormal=False)


@given(psi1=angles, psi2=angles)
@settings(max_examples=100)
def test_psi_theta_round_trip_is_exact(psi1, psi2):
    # halving is exact for normal floats, so the round trip loses nothing
    psi = PsiAngles(psi1, psi2)
    assert PsiAngles.from_thetas(*psi.to_thetas()) == psi


def test_theta_convention():
    psi = PsiAngles(1.0, 0.5)
    t1, t2 = psi.to_thetas()
    assert t1 == 0.5
    assert t2 == -0.25


def test_correlation_closed_form_examples():
    # alpha = 0, eta = 1, psi1 = psi2 = pi/2: -cos(pi)/2 = 1/2
    e = correlation_closed_form(PsiAngles(math.pi / 2, math.pi / 2),
                                DetectorModel(alpha=0.0))
    assert abs(e - 0.5) < 1e-12
    # alpha = 1, eta = 0.5, psi1 + psi2 = pi: 0.25 * 1 + 0.25 = 0.5
    e = correlation_closed_form(PsiAngles(math.pi / 3, 2 * math.pi / 3),
                                DetectorModel(eta=0.5))
    assert abs(e - 0.5) < 1e-12


def test_ideal_correlation_depends_on_angle_sum_only():
    model = DetectorModel()
    base = correlation_closed_form(PsiAngles(0.7, 1.1), model)
    shifted = correlation_closed_form(PsiAngles(0.7 + 0.4, 1.1 - 0.4), model)
    assert abs(base - shifted) < 1e-12


def test_correlation_routes_agree_on_sweep():
    rng = np.random.default_rng(3)
    for _ in range(40):
        psi = PsiAngles(*rng.uniform(0.0, 2.0 * math.pi, size=2))
        model = DetectorModel(alpha=rng.uniform(0.0, 1.0),
                              eta=rng.uniform(0.05, 1.0))
        closed = correlation_closed_form(psi, model)
        tabled = correlation_via_table(psi, model)
        assert abs(closed - tabled) < 1e-10


def test_correlation_from_table_with_custom_values():
    # flipping every station-1 value flips the sign of E
    psi = PsiAngles(0.9, 0.4)
    table = table_for(psi, DetectorModel())
    flipped = ValueAssignment(a=(1, -1, -1, -1, -1, -1), b=(-1, 1, 1, 1, 1, 1))
    assert abs(
        correlation_from_table(table, flipped) + correlation_from_table(table)
    ) < 1e-12


def test_chsh_at_standard_ideal_settings():
    settings_ = ChshSettings(0.0, math.pi / 2, 3 * math.pi / 4, 5 * math.pi / 4)
    s = chsh(settings_, DetectorModel())
    assert abs(s - (1.0 + math.sqrt(2.0))) < 1e-12
    s_table = chsh(settings_, DetectorModel(), method="table")
    assert abs(s - s_table) < 1e-10


def test_chsh_alpha0_angle_tuple():
    # frozen: closed-form evaluation of the quoted angles
    s = chsh(ALPHA0_SETTINGS, DetectorModel(alpha=0.0))
    assert abs(s - 2.33712) < 1e-4
    assert abs(s - chsh(ALPHA0_SETTINGS, DetectorModel(alpha=0.0), method="table")) < 1e-10


def test_chsh_rejects_unknown_method():
    with pytest.raises(ValueError):
        chsh(ALPHA0_SETTINGS, DetectorModel(), method="guess")


def test_setting_labels_and_pairs():
    s = ChshSettings(0.1, 0.2, 0.3, 0.4)
    pairs = dict(s.pairs())
    assert tuple(dict(s.pairs())) == SETTING_LABELS
    assert pairs["AB"] == PsiAngles(0.1, 0.3)
    assert pairs["A'B"] == PsiAngles(0.2, 0.3)
    assert pairs["AB'"] == PsiAngles(0.1, 0.4)
    assert pairs["A'B'"] == PsiAngles(0.2, 0.4)


def test_canonicalization_ranges_and_value():
    raw = ChshSettings(7.0, -1.0, 5.0, -9.0)
    canon = raw.canonical()
    for v in (canon.psi1, canon.psi1_prime):
        assert 0.0 <= v < 2.0 * math.pi
    for v in (canon.psi2, canon.psi2_prime):
        assert -math.pi <= v < math.pi
    model = DetectorModel(alpha=0.3, eta=0.8)
    assert abs(chsh(raw, model) - chsh(canon, model)) < 1e-9


def test_hom_ports_at_quarter_rotation():
    probs = hom_port_probabilities(math.pi / 4.0, 0.1)
    assert probs.station1_split < 1e-12
    assert abs(probs.station1_double_plus - 0.125) < 1e-12
    assert abs(probs.station1_double_minus - 0.125) < 1e-12


def test_hom_ports_total_is_half():
    rng = np.random.default_rng(9)
    for _ in range(20):
        t1, t2 = rng.uniform(0.0, 2.0 * math.pi, size=2)
        assert abs(hom_port_probabilities(t1, t2).total - 0.5) < 1e-12


def test_hom_ports_match_table_route():
    t1, t2 = 0.6, 2.3
    probs = hom_port_probabilities(t1, t2)
    table = joint_table(t1, t2)
    assert abs(probs.station1_split - table.p(4, 3)) < 1e-12
    assert abs(probs.station1_double_plus - table.p(5, 3)) < 1e-12
    assert abs(probs.station1_double_minus - table.p(6, 3)) < 1e-12
    assert abs(probs.station2_split - table.p(3, 4)) < 1e-12
    assert abs(probs.station2_double_plus - table.p(3, 5)) < 1e-12
    assert abs(probs.station2_double_minus - table.p(3, 6)) < 1e-12


@given(psi1=angles, psi2=angles, alpha=st.floats(0.0, 1.0), eta=st.floats(0.01, 1.0))
@settings(max_examples=100)
def test_correlation_is_bounded(psi1, psi2, alpha, eta):
    e = correlation_closed_form(PsiAngles(psi1, psi2), DetectorModel(alpha, eta))
    assert abs(e) <= 1.0 + 1e-12


@given(psi1=angles, psi2=angles, alpha=st.floats(0.0, 1.0))
@settings(max_examples=60)
def test_correlation_is_two_pi_periodic(psi1, psi2, alpha):
    model = DetectorModel(alpha=alpha)
    a = correlation_closed_form(PsiAngles(psi1, psi2), model)
    b = correlation_closed_form(
        PsiAngles(psi1 + 2.0 * math.pi, psi2 - 2.0 * math.pi), model
    )
    assert abs(a - b) < 1e-9
