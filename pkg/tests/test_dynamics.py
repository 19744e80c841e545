import numpy as np
import pytest

from ejof.dynamics import (
    SweepConfig,
    convergence_order,
    drift_constants,
    evolve_and_compare,
    validate_initial_state,
)
from ejof.qec import pauli_miscalibration, repetition_code_recovery
from ejof.scenarios import ThreeLevelParams, three_level_system


def dfs_states_three_level():
    p0 = np.zeros((3, 3), dtype=complex)
    p0[0, 0] = 1.0
    plus = np.zeros((3, 3), dtype=complex)
    plus[:2, :2] = 0.5
    return (p0, plus)


def test_config_validates():
    states = dfs_states_three_level()
    with pytest.raises(ValueError, match="mode"):
        SweepConfig(epsilons=(0.1,), taus=(1.0,), initial_states=states, mode="cubic")
    with pytest.raises(ValueError, match="epsilons"):
        SweepConfig(epsilons=(), taus=(1.0,), initial_states=states)
    with pytest.raises(ValueError, match="epsilons"):
        SweepConfig(epsilons=(0.1, -0.1), taus=(1.0,), initial_states=states)
    with pytest.raises(ValueError, match="taus"):
        SweepConfig(epsilons=(0.1,), taus=(-1.0,), initial_states=states)
    cfg = SweepConfig(epsilons=(0.1,), taus=(0.0, 1.0), initial_states=states)
    assert cfg.order == 2
    assert SweepConfig(
        epsilons=(0.1,), taus=(1.0,), initial_states=states, mode="first-order"
    ).order == 1


def test_validate_initial_state(three_level):
    lind, _ = three_level
    good = np.zeros((3, 3), dtype=complex)
    good[0, 0] = 1.0
    validate_initial_state(good, lind.dfs)
    with pytest.raises(ValueError, match="trace"):
        validate_initial_state(2 * good, lind.dfs)
    with pytest.raises(ValueError, match="positive"):
        bad = np.diag([1.5, -0.5, 0.0]).astype(complex)
        validate_initial_state(bad, lind.dfs)
    with pytest.raises(ValueError, match="DFS"):
        validate_initial_state(np.diag([0.5, 0.0, 0.5]).astype(complex), lind.dfs)


def three_level_sweep(delta, epsilons=(0.04, 0.02, 0.01), taus=(0.5, 1.0, 2.0, 5.0)):
    # the base system fixes gamma = 1 so the scaled deformation is eps * f
    lind, pert = three_level_system(ThreeLevelParams(delta=delta, Gamma=2.0, gamma=1.0))
    cfg = SweepConfig(epsilons=epsilons, taus=taus, initial_states=dfs_states_three_level())
    return evolve_and_compare(lind, pert, cfg)


def test_three_level_sweep_converges_at_second_order():
    table = three_level_sweep(delta=2.0)
    fit = convergence_order(table)
    assert fit.monotone
    assert fit.slope >= 0.7
    # the neglected terms are third order on the rescaled clock: slope near 2
    assert 1.7 <= fit.slope <= 2.3
    for tau, s in fit.per_tau.items():
        assert s >= 0.7, (tau, s)


def test_sweep_cells_are_physical():
    table = three_level_sweep(delta=2.0, epsilons=(0.04, 0.02), taus=(1.0, 5.0))
    for row in table.rows():
        assert row["trace_error_full"] < 1e-12
        assert row["trace_error_eff"] < 1e-12
        assert row["min_eig_full"] > -1e-12
        assert row["min_eig_eff"] > -1e-12
        assert 0.0 <= row["trace_distance"] <= 1.0


def test_table_accessors():
    table = three_level_sweep(delta=2.0, epsilons=(0.04, 0.02), taus=(1.0, 5.0))
    d = table.distances(0.04)
    assert d.shape == (4,)  # 2 taus x 2 states
    assert table.max_distance(0.04) == d.max()
    assert table.max_distance(0.04, tau=5.0) >= table.max_distance(0.04, tau=5.0) * 0.999
    assert table.max_distance(0.77) == 0.0


def test_convergence_needs_two_epsilons():
    table = three_level_sweep(delta=2.0, epsilons=(0.04,), taus=(1.0,))
    with pytest.raises(ValueError, match="two epsilon"):
        convergence_order(table)


def test_dark_drive_has_bounded_drift():
    # on resonance the effective generator vanishes; the raw state never
    # strays further than C * eps * (1 + tau) with C independent of eps
    table = three_level_sweep(delta=0.0)
    consts = drift_constants(table)
    values = list(consts.values())
    assert max(values) / min(values) <= 1.5
    assert max(values) < 1.0
    # the projected comparison against the frozen state decays at second order
    fit = convergence_order(table)
    assert fit.monotone
    assert fit.slope >= 1.7
    assert table.max_distance(0.01) < 1e-4


def qec_z_sweep(epsilons=(0.04, 0.02, 0.01), taus=(0.5, 1.0, 2.0, 5.0)):
    rec, lind = repetition_code_recovery()
    pert = pauli_miscalibration("Z", 1.0)
    zero = np.zeros((8, 8), dtype=complex)
    rho0 = zero.copy()
    rho0[0, 0] = 1.0
    plus = zero.copy()
    plus[0, 0] = plus[0, 7] = plus[7, 0] = plus[7, 7] = 0.5
    cfg = SweepConfig(epsilons=epsilons, taus=taus, initial_states=(rho0, plus))
    return evolve_and_compare(lind, pert, cfg)


def test_qec_z_sweep_protected():
    table = qec_z_sweep()
    consts = drift_constants(table)
    values = list(consts.values())
    assert max(values) / min(values) <= 1.5
    fit = convergence_order(table)
    assert fit.monotone
    assert fit.slope >= 1.7
    assert table.max_distance(0.01) < 1e-3


def test_secular_decay_shows_up_in_drift():
    # off resonance the drive leaks: the effective decay rate is eps^2, so on
    # the rescaled clock the drift stays O(1) and the fitted constant grows
    # like 1/eps instead of saturating
    table = three_level_sweep(delta=1.0, epsilons=(0.04, 0.01), taus=(5.0,))
    consts = drift_constants(table)
    assert consts[0.01] / consts[0.04] > 2.0
