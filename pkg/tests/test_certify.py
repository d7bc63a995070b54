import math

import numpy as np
import pytest

from dragtrack.certify import (B, CertificationFailure, alpha_of,
                               build_report, controller_matrices,
                               estimate_delta_bound, kappa_of,
                               observer_matrix, q_and_eps_star, q_matrix,
                               solve_lyapunov_2x2, spectral_norm,
                               theorem1_constants, theorem2_constants,
                               verify_linear_iss_bound)


def test_lyapunov_identity_case():
    P = solve_lyapunov_2x2(-np.eye(2))
    assert np.array_equal(P, 0.5 * np.eye(2))


def test_lyapunov_companion_case():
    A = np.array([[0.0, 1.0], [-1.0, -1.0]])
    P = solve_lyapunov_2x2(A)
    assert np.allclose(P, [[1.5, 0.5], [0.5, 1.0]], atol=1e-12)
    assert np.max(np.abs(P @ A + A.T @ P + np.eye(2))) <= 1e-10


def test_lyapunov_observer_case():
    A0 = observer_matrix(2.0, 1.0)
    P0 = solve_lyapunov_2x2(A0)
    assert np.allclose(P0, [[0.5, -0.5], [-0.5, 1.5]], atol=1e-12)
    assert np.max(np.abs(P0 @ A0 + A0.T @ P0 + np.eye(2))) <= 1e-10


def test_lyapunov_controller_gain_case():
    # independently computed with a dense continuous-Lyapunov solver
    _, F0 = controller_matrices(1.982, 3.0, 5.0)
    P = solve_lyapunov_2x2(F0)
    want = np.array([[1.2538113017154398, 0.2522704339051466],
                     [0.2522704339051466, 0.2507568113017155]])
    assert np.allclose(P, want, atol=1e-12)


def test_lyapunov_rejects_non_hurwitz():
    with pytest.raises(ValueError):
        solve_lyapunov_2x2(np.eye(2))
    with pytest.raises(ValueError):
        solve_lyapunov_2x2(np.array([[0.0, 1.0], [1.0, -3.0]]))


def test_controller_matrix_scaling():
    F, F0 = controller_matrices(1.982, 3.0, 5.0)
    assert np.allclose(F, [[0.0, 1.0], [-1.982 / 25.0, -0.6]])
    assert np.allclose(F0, [[0.0, 1.0], [-1.982, -3.0]])
    roots = np.linalg.eigvals(F)
    assert np.allclose(sorted(roots), [-0.4035374328443582,
                                       -0.19646256715564175], atol=1e-12)


def test_kappa_values():
    P0 = solve_lyapunov_2x2(controller_matrices(1.982, 3.0, 5.0)[1])
    assert kappa_of(5.0, P0, 0.0) == pytest.approx(-0.8, rel=1e-14)
    assert kappa_of(20.0, P0, 0.0) == pytest.approx(-0.95, rel=1e-14)
    # small eps0 makes kappa positive
    assert kappa_of(0.5, P0, 0.0) == pytest.approx(1.0, rel=1e-14)
    norm = float(np.linalg.norm(P0 @ B))
    assert kappa_of(0.5, P0, 0.1) == pytest.approx(1.0 - 0.1 * norm,
                                                   rel=1e-12)
    with pytest.raises(ValueError):
        kappa_of(0.0, P0, 0.0)
    with pytest.raises(ValueError):
        kappa_of(1.0, P0, -0.1)


def test_alpha_combines_both_norms():
    P0 = np.array([[0.5, -0.5], [-0.5, 1.5]])
    P = np.array([[1.5, 0.5], [0.5, 1.0]])
    a = alpha_of(3.0, 5.0, 0.2, P0, P)
    want = (3.0 / 5.0 * np.linalg.norm(P0 @ B)
            + 5.0 * 0.2 * np.linalg.norm(P @ B))
    assert a == pytest.approx(float(want), rel=1e-14)


def test_q_matrix_and_threshold():
    Q = q_matrix(1.0, 0.5, 0.25)
    assert np.allclose(Q, [[1.0, -0.5], [-0.5, 3.0]])
    # det Q > 0 exactly below the threshold
    eps_star = q_and_eps_star(1.0, 0.5)
    assert eps_star == pytest.approx(0.8, rel=1e-14)
    for eps in (0.5 * eps_star, 0.99 * eps_star):
        assert np.all(np.linalg.eigvalsh(q_matrix(1.0, 0.5, eps)) > 0.0)
    assert np.min(np.linalg.eigvalsh(q_matrix(1.0, 0.5, 1.01 * eps_star))) < 0


def test_threshold_rejects_degenerate_kappa():
    with pytest.raises(CertificationFailure):
        q_and_eps_star(-0.8, 0.5)
    with pytest.raises(CertificationFailure):
        q_and_eps_star(0.0, 0.5)


def test_spectral_norm():
    M = np.array([[3.0, 0.0], [4.0, 0.0]])
    assert spectral_norm(M) == pytest.approx(5.0, rel=1e-12)


def test_theorem1_constants_shape():
    P0 = np.array([[1.5, 0.5], [0.5, 1.0]])
    c = theorem1_constants(P0, kappa=1.0)
    eigs = np.linalg.eigvalsh(P0)
    assert c.lambda1 == pytest.approx(1.0 / eigs[-1], rel=1e-12)
    assert c.lambda3 == pytest.approx(eigs[-1] / eigs[0], rel=1e-12)
    assert c.lambda2 > 0.0 and math.isnan(c.C0)


def test_theorem2_constants_use_block_weight():
    P0 = np.array([[1.5, 0.5], [0.5, 1.0]])
    P = np.array([[0.5, -0.5], [-0.5, 1.5]])
    c = theorem2_constants(P0, P, kappa=1.0, alpha=0.1, eps=0.25)
    lam = np.linalg.eigvalsh(np.block(
        [[P0, np.zeros((2, 2))], [np.zeros((2, 2)), P]]))
    assert c.lambda2 == pytest.approx(lam[-1] / lam[0], rel=1e-12)
    assert c.lambda3 == pytest.approx(lam[0], rel=1e-12)
    assert c.C0 == pytest.approx(spectral_norm(P0) ** 2
                                 + spectral_norm(P) ** 2, rel=1e-12)


def test_delta_bound_trivial_cases():
    assert estimate_delta_bound(np.zeros(5), np.ones(5)) == (0.0, 0.0)
    l, d = estimate_delta_bound(np.array([2.0]), np.array([0.0]))
    assert (l, d) == (0.0, 2.0)


def test_delta_bound_covers_all_samples():
    rng = np.random.default_rng(3)
    x1 = rng.uniform(0.0, 5.0, 400)
    delta = 0.3 * x1 + rng.uniform(0.0, 0.2, 400)
    l, d = estimate_delta_bound(delta, x1)
    assert np.all(np.abs(delta) <= l * np.abs(x1) + d + 1e-12)
    assert 0.0 <= l <= 1.0 and d >= 0.0


def test_delta_bound_rejects_empty():
    with pytest.raises(ValueError):
        estimate_delta_bound(np.array([]), np.array([]))


def test_iss_bound_zero_disturbance_decays():
    F, F0 = controller_matrices(1.982, 3.0, 5.0)
    P0 = solve_lyapunov_2x2(F0)
    ok, worst, margin = verify_linear_iss_bound(F, 0.0, np.array([1.0, 0.0]),
                                                5.0, P0)
    assert ok and worst >= -1e-9
    assert margin[-1] >= 0.0


def test_iss_bound_rejects_unstable_f():
    with pytest.raises(ValueError):
        verify_linear_iss_bound(np.eye(2), 0.0, np.array([1.0, 0.0]), 5.0,
                                np.eye(2))


def test_build_report_flags_degenerate_certificate():
    rep = build_report(1.982, 3.0, 5.0, 2.0, 1.0, 0.481)
    assert rep.kappa == pytest.approx(-0.8, rel=1e-12)
    assert not rep.certified and rep.eps1_star is None
    assert any("kappa" in n for n in rep.notes)
    doc = rep.to_json()
    assert '"kappa"' in doc


def test_build_report_certifies_small_eps0():
    rep = build_report(1.0, 1.0, 0.5, 2.0, 1.0, 0.1)
    assert rep.kappa > 0.0
    assert rep.eps1_star is not None
    assert rep.certified == (0.1 < rep.eps1_star)
