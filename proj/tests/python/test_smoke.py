import numpy as np
import pytest

import lcu_outcomes as lcu


def haar_spec(k, n, weights, seed):
    us = [lcu.haar_random_unitary(2**n, seed * 100 + t) for t in range(k)]
    return lcu.CircuitSpec(weights, us)


def test_version():
    assert lcu.__version__


def test_svd_matches_numpy():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(7, 4)) + 1j * rng.normal(size=(7, 4))
    u, s, v = lcu.svd(a)
    np.testing.assert_allclose(s, np.linalg.svd(a, compute_uv=False), rtol=1e-12)
    np.testing.assert_allclose(u @ np.diag(s) @ v.conj().T, a, atol=1e-12)


def test_circuit_and_factorization():
    spec = haar_spec(4, 3, [0.9, -0.3, 0.5, 0.1], 2)
    v = lcu.circuit_unitary(spec)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(64), atol=1e-10)

    psi = lcu.random_state(8, 3)
    phi = lcu.output_matrix(spec, psi)
    c = lcu.coefficient_matrix(spec)
    x = lcu.row_matrix(spec, psi)
    assert phi.shape == (8, 8)
    np.testing.assert_allclose(phi, c @ x, atol=1e-12)
    np.testing.assert_allclose(c.T @ c, np.eye(4) / 4, atol=1e-12)
    assert np.linalg.matrix_rank(phi, tol=1e-10) <= 4

    p = lcu.outcome_probabilities(spec, psi)
    assert p.shape == (4, 2)
    assert abs(p.sum() - 1) < 1e-10
    # rows of Phi are ordered r-major, so row 0 is outcome (0, 0)
    assert abs(np.linalg.norm(phi[0]) ** 2 - p[0, 0]) < 1e-12

    np.testing.assert_allclose(lcu.invert_with_c(c, phi), x, atol=1e-12)
    target = lcu.extract_target(x, spec.weights)
    expected = sum(w * u @ psi for w, u in zip(spec.weights, spec.unitaries))
    np.testing.assert_allclose(target, expected, atol=1e-12)


def test_completion():
    inst = lcu.sweep_instance(4, 6, seed=5)
    mask = lcu.make_mask(8, 64, 0.0, min_per_column=4, seed=1)
    assert mask.dtype == bool
    assert (mask.sum(axis=0) == 4).all()
    values = lcu.observe(inst["phi"], mask, 0.0, 2)
    assert np.all(values[~mask] == 0)
    rep = lcu.factorized_complete(inst["c"], values, mask)
    err_phi, _ = lcu.recovery_errors(rep["phi_hat"], inst["phi"])
    assert err_phi < 1e-8

    full = np.ones((8, 64), dtype=bool)
    rep = lcu.svp_complete(inst["phi"], full, rank=4)
    assert lcu.recovery_errors(rep["phi_hat"], inst["phi"])[0] < 1e-10
    rep = lcu.als_complete(inst["phi"], full, rank=4, seed=3)
    assert lcu.recovery_errors(rep["phi_hat"], inst["phi"])[0] < 1e-6


def test_trapdoor_round_trip_and_attack():
    pub = lcu.random_public_params(4, 4, "hadamard", 7)
    key = lcu.keygen(4, "hadamard", 8)
    psi = lcu.random_state(16, 9)
    phi = lcu.output_matrix(lcu.build_circuit(key, pub), psi)
    target = lcu.invert_with_key(key, pub, phi)
    expected = sum(w * u @ psi for w, u in zip(key.weights, pub.unitaries))
    assert np.linalg.norm(target - expected) < 1e-10 * np.linalg.norm(expected)

    weights, residual, ok = lcu.hadamard_attack(phi, pub)
    assert ok
    np.testing.assert_allclose(weights, key.weights, atol=1e-10)
    _, _, ok = lcu.hadamard_attack(np.abs(phi).astype(complex), pub)
    assert not ok

    mags = lcu.eval_trapdoor(key, pub, psi)
    np.testing.assert_allclose(mags, np.abs(phi) ** 2, atol=1e-12)


def test_bad_input_raises():
    with pytest.raises(ValueError):
        lcu.CircuitSpec([0.5, 0.5, 0.5], [np.eye(2)] * 3)
    with pytest.raises(ValueError):
        lcu.keygen(3)
