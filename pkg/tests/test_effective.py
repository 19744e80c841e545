import numpy as np
import pytest

from ejof.effective import (
    Perturbation,
    corner_sensitivity,
    dfs_block,
    effective_coupling,
    effective_lindbladian_closed,
    effective_lindbladian_general,
    effective_to_superop,
    identity_suite,
    perturbation_superops,
    perturbed_superop,
    random_structured_instance,
    verify_equivalence,
)
from ejof.operators import (
    choi_matrix,
    dagger,
    four_corners,
    frob,
)


def test_perturbation_validates_hermiticity():
    with pytest.raises(ValueError, match="Hermitian"):
        Perturbation(v=np.array([[0, 1], [0, 0]], dtype=complex), fs=())


def test_perturbation_validates_shapes():
    v = np.zeros((2, 2))
    with pytest.raises(ValueError, match="shape"):
        Perturbation(v=v, fs=(np.zeros((3, 3)),))


def test_perturbation_requires_matching_jump_count(three_level):
    lind, _ = three_level
    pert = Perturbation.zero(3, 2)
    with pytest.raises(ValueError, match="pad with zero"):
        effective_lindbladian_general(lind, pert)


def test_perturbation_norm_and_scaling(generic_instance):
    _, pert = generic_instance
    assert pert.norm() > 0
    half = pert.scaled(0.5)
    assert abs(half.norm() - 0.5 * pert.norm()) < 1e-12


def test_superops_sum_to_generator_difference(generic_instance):
    # O1 + O2 must equal the exact difference of full Lindbladians
    lind, pert = generic_instance
    o1, o2 = perturbation_superops(lind, pert)
    diff = perturbed_superop(lind, pert) - lind.superop
    assert frob(o1 + o2 - diff) < 1e-12 * max(1.0, frob(diff))


def test_zero_perturbation_gives_zero_generator(three_level):
    lind, _ = three_level
    zero = Perturbation.zero(3, 1)
    gen = effective_lindbladian_general(lind, zero)
    assert np.array_equal(gen, np.zeros_like(gen))
    eff = effective_lindbladian_closed(lind, zero)
    assert frob(eff.h_eff) == 0.0
    assert all(frob(f) == 0.0 for f in eff.jumps_eff)
    assert frob(eff.cp_superop) == 0.0


def test_coupling_is_off_diagonal(generic_instance):
    lind, pert = generic_instance
    c = effective_coupling(lind, pert)
    corners = four_corners(c, lind.dfs)
    assert frob(corners.ul) == 0.0
    assert frob(corners.lr) == 0.0
    assert frob(c) > 0


@pytest.mark.parametrize(
    "d, n, n_jumps, seed, defective, extra",
    [
        (2, 2, 1, 0, False, False),
        (2, 3, 2, 1, False, False),
        (2, 4, 3, 2, False, False),
        (3, 3, 2, 3, False, False),
        (2, 2, 2, 4, True, False),
        (2, 2, 1, 5, True, False),
        (2, 3, 1, 6, False, True),
        (2, 2, 2, 7, True, True),
    ],
)
def test_routes_agree_on_random_instances(d, n, n_jumps, seed, defective, extra):
    lind, pert = random_structured_instance(
        d, n, n_jumps, seed, defective_k=defective, extra_zero_jump=extra
    )
    rep = verify_equivalence(lind, pert)
    assert rep.passed, rep.residual
    assert rep.residual <= 1e-9
    assert rep.general_norm > 0


def test_defective_instance_really_is_defective():
    lind, _ = random_structured_instance(2, 2, 2, 4, defective_k=True)
    kk = lind.k[2:, 2:]
    evals = np.linalg.eigvals(kk)
    assert abs(evals[0] - evals[1]) < 1e-6
    # a Jordan block: (K - lambda)^1 does not vanish although both eigenvalues merge
    lam = evals.mean()
    assert frob(kk - lam * np.eye(2)) > 1e-3


def test_identity_suite_on_random_instances():
    for seed in (11, 12, 13):
        lind, pert = random_structured_instance(2, 3, 2, seed)
        rep = identity_suite(lind, pert)
        assert rep.passed, rep.as_dict()
        assert max(rep.as_dict().values()) <= 1e-11


def test_corner_sensitivity_tiny(generic_instance):
    lind, pert = generic_instance
    rep = corner_sensitivity(lind, pert)
    assert rep.passed, rep.as_dict()
    assert rep.combined_delta <= 1e-10
    assert rep.reference_norm > 0


def test_generator_scales_quadratically():
    # only terms of order s and s^2 appear: L(s*pert) = s*A + s^2*B exactly
    lind, pert = random_structured_instance(2, 3, 2, 21)
    g1 = effective_lindbladian_general(lind, pert.scaled(1.0))
    g2 = effective_lindbladian_general(lind, pert.scaled(2.0))
    g3 = effective_lindbladian_general(lind, pert.scaled(3.0))
    # second difference isolates B, then reconstruct g3 from g1 and g2
    b = (g2 - 2 * g1) / 2.0
    a = g1 - b
    recon = 3 * a + 9 * b
    assert frob(recon - g3) <= 1e-9 * max(frob(g3), 1.0)


def test_h_eff_is_hermitian_and_dfs_supported(generic_instance):
    lind, pert = generic_instance
    eff = effective_lindbladian_closed(lind, pert)
    assert frob(eff.h_eff - dagger(eff.h_eff)) < 1e-13
    corners = four_corners(eff.h_eff, lind.dfs)
    assert frob(corners.ur) + frob(corners.ll) + frob(corners.lr) < 1e-13
    for f in eff.jumps_eff:
        fc = four_corners(f, lind.dfs)
        assert frob(fc.ur) + frob(fc.ll) + frob(fc.lr) < 1e-13


def test_cp_superop_is_completely_positive(generic_instance):
    lind, pert = generic_instance
    eff = effective_lindbladian_closed(lind, pert)
    choi = choi_matrix(eff.cp_superop)
    evals = np.linalg.eigvalsh(choi)
    assert evals.min() > -1e-11


def test_three_level_routes_match(three_level):
    lind, pert = three_level
    gen = effective_lindbladian_general(lind, pert)
    closed = effective_to_superop(effective_lindbladian_closed(lind, pert))
    assert frob(gen - closed) <= 1e-10 * max(frob(gen), 1.0)


def test_dfs_block_shape(three_level):
    lind, pert = three_level
    gen = effective_lindbladian_general(lind, pert)
    block = dfs_block(gen, lind.dfs)
    assert block.shape == (4, 4)
    # the block carries the whole content of the corner-supported superoperator
    assert abs(frob(block) - frob(gen)) < 1e-12


def test_extra_zero_jump_opens_new_channel():
    lind, pert = random_structured_instance(2, 3, 1, 30, extra_zero_jump=True)
    assert len(lind.jumps) == 2
    assert frob(lind.jumps[-1]) == 0.0
    assert frob(pert.fs[-1]) > 0
    rep = verify_equivalence(lind, pert)
    assert rep.passed


def test_defective_k_requires_two_decaying_levels():
    with pytest.raises(ValueError, match="n == 2"):
        random_structured_instance(2, 3, 1, 0, defective_k=True)
