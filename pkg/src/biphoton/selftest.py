"""Runtime invariant checks behind the CLI ``validate`` subcommand.

Each check is a small function that raises AssertionError on failure;
``run_all`` executes them in order and reports one line per check.
The checks mirror the library's structural guarantees (norm
preservation, table normalization, closed form vs table agreement,
sampler determinism, optimizer soundness) at sizes that keep the whole
sweep under a minute.
"""

import math

import numpy as np

from . import bell, detection, fock, montecarlo, optics, optimize


def _rng():
    return np.random.default_rng(20260814)


def check_bosonic_factors():
    s = fock.create(fock.create(fock.vacuum(), fock.C_PAR), fock.C_PAR)
    two = fock.OccupationVector.of(fock.C_PAR, fock.C_PAR)
    assert abs(s.amplitude(two) - math.sqrt(2.0)) < 1e-12, str(s)


def check_creation_linearity():
    rng = _rng()
    for _ in range(20):
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        s1 = fock.FockState({fock.OccupationVector.of(fock.C_PAR): 1.0})
        s2 = fock.FockState({fock.OccupationVector.of(fock.D_PERP): 1.0})
        lhs = fock.create(a * s1 + b * s2, fock.C_PERP)
        rhs = a * fock.create(s1, fock.C_PERP) + b * fock.create(s2, fock.C_PERP)
        assert fock.states_allclose(lhs, rhs, 1e-12)


def check_transform_unitarity():
    assert optics.beamsplitter_5050().is_unitary(1e-12)
    rng = _rng()
    for theta in rng.uniform(0.0, 2.0 * math.pi, size=10):
        assert optics.polarizer_rotation(1, theta).is_unitary(1e-12)
        assert optics.polarizer_rotation(2, theta).is_unitary(1e-12)
    for eta in (0.1, 0.5, 0.97, 1.0):
        assert optics.loss_channel(fock.C_PAR, eta).is_unitary(1e-12)


def check_pipeline_norm():
    rng = _rng()
    for _ in range(20):
        t1, t2 = rng.uniform(0.0, 2.0 * math.pi, size=2)
        eta = rng.uniform(0.05, 1.0)
        state = optics.build_experiment_state(
            optics.ExperimentConfig(t1, t2, eta, include_loss=True)
        )
        assert abs(fock.norm(state) - 1.0) < 1e-12


def check_analyzer_order_independence():
    rng = _rng()
    for _ in range(10):
        t1, t2 = rng.uniform(0.0, 2.0 * math.pi, size=2)
        base = optics.apply(
            optics.beamsplitter_5050(),
            fock.create(fock.create(fock.vacuum(), fock.A1X), fock.A2Y),
        )
        one = optics.apply(
            optics.polarizer_rotation(2, t2),
            optics.apply(optics.polarizer_rotation(1, t1), base),
        )
        other = optics.apply(
            optics.polarizer_rotation(1, t1),
            optics.apply(optics.polarizer_rotation(2, t2), base),
        )
        assert fock.states_allclose(one, other, 1e-12)


def check_final_state_amplitudes():
    # sample rendering included so a failure shows the offending state
    rng = _rng()
    for _ in range(50):
        t1, t2 = rng.uniform(0.0, 2.0 * math.pi, size=2)
        state = optics.build_experiment_state(optics.ExperimentConfig(t1, t2))
        d = t1 - t2
        expected = {
            (fock.C_PAR, fock.D_PAR): 0.5 * math.sin(d),
            (fock.C_PAR, fock.D_PERP): 0.5 * math.cos(d),
            (fock.C_PERP, fock.D_PAR): -0.5 * math.cos(d),
            (fock.C_PERP, fock.D_PERP): 0.5 * math.sin(d),
            (fock.C_PAR, fock.C_PAR): 0.25j * math.sqrt(2.0) * math.sin(2 * t1),
            (fock.C_PERP, fock.C_PERP): -0.25j * math.sqrt(2.0) * math.sin(2 * t1),
            (fock.C_PAR, fock.C_PERP): -0.5j * math.cos(2 * t1),
            (fock.D_PAR, fock.D_PAR): 0.25j * math.sqrt(2.0) * math.sin(2 * t2),
            (fock.D_PERP, fock.D_PERP): -0.25j * math.sqrt(2.0) * math.sin(2 * t2),
            (fock.D_PAR, fock.D_PERP): -0.5j * math.cos(2 * t2),
        }
        for modes, ref in expected.items():
            got = state.amplitude(fock.OccupationVector.of(*modes))
            assert abs(got - ref) < 1e-12, f"{modes}: {got} vs {ref}\n{state}"


def check_table_normalization():
    rng = _rng()
    for _ in range(30):
        t1, t2 = rng.uniform(0.0, 2.0 * math.pi, size=2)
        eta = rng.uniform(0.05, 1.0)
        alpha = rng.uniform(0.0, 1.0)
        table = detection.apply_alpha_confusion(
            detection.joint_table(t1, t2, eta), alpha
        )
        assert abs(table.total - 1.0) < 1e-12
        assert abs(table.p(3, 3) - (1.0 - eta) ** 2) < 1e-12
        assert abs(table.p(1, 3) - table.p(2, 3)) < 1e-12
        assert abs(table.p(3, 1) - table.p(3, 2)) < 1e-12


def check_table_against_formulas():
    rng = _rng()
    for _ in range(20):
        t1, t2 = rng.uniform(0.0, 2.0 * math.pi, size=2)
        eta = rng.uniform(0.05, 1.0)
        table = detection.joint_table(t1, t2, eta)
        ref = detection.closed_form_lossy_table(t1, t2, eta)
        assert np.max(np.abs(table.probs - ref)) < 1e-12


def check_confusion_mass_conservation():
    rng = _rng()
    for _ in range(20):
        t1, t2 = rng.uniform(0.0, 2.0 * math.pi, size=2)
        alpha = rng.uniform(0.0, 1.0)
        base = detection.joint_table(t1, t2)
        out = detection.apply_alpha_confusion(base, alpha)
        assert abs(out.total - base.total) < 1e-15
        # recognition errors never create or destroy class 3/4 events,
        # so those marginals survive even though the partner station
        # still reshuffles the other index within each row or column
        for c in (3, 4):
            row_base = sum(base.p(c, j) for j in range(1, 7))
            row_out = sum(out.p(c, j) for j in range(1, 7))
            col_base = sum(base.p(i, c) for i in range(1, 7))
            col_out = sum(out.p(i, c) for i in range(1, 7))
            assert abs(row_out - row_base) < 1e-15
            assert abs(col_out - col_base) < 1e-15
        for i in (3, 4):
            for j in (3, 4):
                assert abs(out.p(i, j) - base.p(i, j)) < 1e-15


def check_correlation_routes_agree():
    rng = _rng()
    for _ in range(40):
        psi = bell.PsiAngles(*rng.uniform(0.0, 2.0 * math.pi, size=2))
        model = detection.DetectorModel(
            alpha=rng.uniform(0.0, 1.0), eta=rng.uniform(0.05, 1.0)
        )
        closed = bell.correlation_closed_form(psi, model)
        tabled = bell.correlation_via_table(psi, model)
        assert abs(closed - tabled) < 1e-10, (psi, model)
        assert abs(closed) <= 1.0 + 1e-12


def check_efficiency_structure():
    rng = _rng()
    for _ in range(20):
        psi = bell.PsiAngles(*rng.uniform(0.0, 2.0 * math.pi, size=2))
        alpha = rng.uniform(0.0, 1.0)
        eta = rng.uniform(0.05, 1.0)
        e1 = bell.correlation_via_table(psi, detection.DetectorModel(alpha, 1.0))
        ee = bell.correlation_via_table(psi, detection.DetectorModel(alpha, eta))
        assert abs(ee - (eta * eta * e1 + (1.0 - eta) ** 2)) < 1e-10


def check_hom_ports():
    probs = bell.hom_port_probabilities(math.pi / 4.0, 0.3)
    assert probs.station1_split < 1e-12
    assert abs(probs.station1_double_plus - 0.125) < 1e-12
    assert abs(probs.station1_double_minus - 0.125) < 1e-12
    rng = _rng()
    for _ in range(10):
        t1, t2 = rng.uniform(0.0, 2.0 * math.pi, size=2)
        probs = bell.hom_port_probabilities(t1, t2)
        assert abs(probs.total - 0.5) < 1e-12
        table = detection.joint_table(t1, t2)
        assert abs(probs.station1_split - table.p(4, 3)) < 1e-12
        assert abs(probs.station2_double_plus - table.p(3, 5)) < 1e-12


def check_sampler_determinism():
    cfg = montecarlo.SamplerConfig(
        seed=7,
        n_per_setting=2000,
        model=detection.DetectorModel(alpha=0.7, eta=0.9),
        settings=bell.ChshSettings(0.1, 1.2, 2.3, 3.4),
    )
    one = montecarlo.sample_events(cfg)
    two = montecarlo.sample_events(cfg)
    for col in ("setting_codes", "raw1", "raw2", "obs1", "obs2"):
        assert np.array_equal(getattr(one, col), getattr(two, col)), col


def check_sampler_frequencies():
    cfg = montecarlo.SamplerConfig(
        seed=11,
        n_per_setting=100_000,
        model=detection.DetectorModel(),
        settings=bell.ChshSettings(0.0, math.pi / 2.0, 3.0 * math.pi / 4.0,
                                   5.0 * math.pi / 4.0),
    )
    events = montecarlo.sample_events(cfg)
    groups = events.split_by_setting()
    first = groups["AB"]
    theta1, theta2 = bell.PsiAngles(0.0, 3.0 * math.pi / 4.0).to_thetas()
    table = detection.joint_table(theta1, theta2)
    n = len(first)
    emp = np.zeros((6, 6))
    np.add.at(emp, (first.raw1 - 1, first.raw2 - 1), 1.0)
    emp /= n
    assert np.max(np.abs(emp - table.probs)) < 5.0 / math.sqrt(n)
    s, err = montecarlo.estimate_chsh(groups)
    exact = bell.chsh(cfg.settings, cfg.model)
    assert abs(s - exact) < 4.0 * max(err, 1e-3), (s, exact, err)


def check_optimizer_soundness():
    rng = _rng()
    for _ in range(3):
        model = detection.DetectorModel(
            alpha=rng.uniform(0.0, 1.0), eta=rng.uniform(0.5, 1.0)
        )
        result = optimize.maximize_chsh(model, starts=16)
        bound = 2.0 * math.sqrt(2.0) * model.eta**2 + 2.0 * (1.0 - model.eta) ** 2
        assert result.best_value <= bound + 1e-9
        direct = bell.chsh(result.settings, model)
        assert abs(result.best_value - direct) < 1e-9


def check_optimizer_ideal_maximum():
    result = optimize.maximize_chsh(detection.DetectorModel(), starts=32)
    assert abs(result.best_value - (1.0 + math.sqrt(2.0))) < 1e-6


ALL_CHECKS = (
    ("fock: bosonic factors", check_bosonic_factors),
    ("fock: creation is linear", check_creation_linearity),
    ("optics: transforms are isometries", check_transform_unitarity),
    ("optics: pipeline preserves norm", check_pipeline_norm),
    ("optics: analyzer order does not matter", check_analyzer_order_independence),
    ("optics: final-state amplitudes match derivation", check_final_state_amplitudes),
    ("detection: tables normalize and cancel", check_table_normalization),
    ("detection: table matches closed forms", check_table_against_formulas),
    ("detection: confusion conserves mass", check_confusion_mass_conservation),
    ("bell: closed form agrees with table", check_correlation_routes_agree),
    ("bell: efficiency enters as eta^2 plus (1-eta)^2", check_efficiency_structure),
    ("bell: pair bunching at theta = pi/4", check_hom_ports),
    ("montecarlo: fixed seed reproduces streams", check_sampler_determinism),
    ("montecarlo: frequencies converge to the table", check_sampler_frequencies),
    ("optimize: value is sound and self-consistent", check_optimizer_soundness),
    ("optimize: ideal maximum is 1 + sqrt(2)", check_optimizer_ideal_maximum),
)


def run_all(write=print) -> int:
    """Run every check; report one line each; return the failure count."""
    failures = 0
    for name, fn in ALL_CHECKS:
        try:
            fn()
        except Exception as exc:
            failures += 1
            write(f"FAIL {name}: {exc!r}")
        else:
            write(f"PASS {name}")
    write(f"{len(ALL_CHECKS) - failures}/{len(ALL_CHECKS)} checks passed")
    return failures
