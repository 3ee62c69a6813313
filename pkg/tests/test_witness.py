import json

import numpy as np
import pytest

from spareig import synth
from spareig.errors import InvalidInput, RefusesToCertify
from spareig.solver import SdpConfig, solve
from spareig.witness import (WitnessTriple, certify_solution, check, construct,
                             embed_vector, full_certificate, witness_primal,
                             write_report)


def random_sym(d, rng):
    A = rng.standard_normal((d, d))
    return 0.5 * (A + A.T)


def _clean_rank1(d, s, lam1, seed):
    rng = np.random.default_rng(seed)
    supp = np.sort(rng.choice(d, s, replace=False))
    u = np.zeros(d)
    u[supp] = rng.choice([-1.0, 1.0], s) / np.sqrt(s)
    M = lam1 * np.outer(u, u)
    return 0.5 * (M + M.T), supp, np.sign(u[supp])


def test_embed_vector_interleaves():
    v = embed_vector(np.array([5.0, 6.0]), np.array([7.0, 8.0]),
                     np.array([1, 3]), 4)
    assert v.tolist() == [7.0, 5.0, 8.0, 6.0]


def test_construct_identities():
    # recomputable pieces of the triple across random instances
    for seed in range(20):
        rng = np.random.default_rng(seed)
        d = 12
        M = random_sym(d, rng)
        J = np.sort(rng.choice(d, 4, replace=False))
        signs = rng.choice([-1.0, 1.0], 4)
        rho = 0.3
        tri = construct(M, J, signs, rho)
        assert abs(np.linalg.norm(tri.x_hat) - 1.0) <= 1e-12
        assert float(signs @ tri.x_hat) >= 0.0
        B = M[np.ix_(J, J)] - rho * np.outer(signs, signs)
        assert abs(tri.lambda_hat - np.linalg.eigvalsh(B).max()) <= 1e-10
        Jc = np.setdiff1d(np.arange(d), J)
        w_ref = M[np.ix_(Jc, J)] @ tri.x_hat / (rho * np.abs(tri.x_hat).sum())
        assert np.abs(tri.w_hat - w_ref).max() <= 1e-12
        # the support block is a principal submatrix of the full penalized
        # matrix, so its top eigenvalue can never exceed the full one
        rep = check(tri, M, J, signs, rho)
        c3 = rep["cond3_eig_equal"]
        assert c3["lambda_full"] >= c3["lambda_block"] - 1e-9


def test_rank1_certifies_and_w_is_exactly_zero():
    M, supp, signs = _clean_rank1(30, 6, 10.0, 4)
    rho_hi = 10.0 * (1.0 / np.sqrt(6)) / (8.0 * np.sqrt(2) * 6)
    rho = 0.5 * rho_hi
    tri = construct(M, supp, signs, rho)
    # off-support rows of a supported rank-1 matrix vanish, so w does too
    assert (tri.w_hat == 0.0).all()
    rep = check(tri, M, supp, signs, rho)
    assert rep["certified"], rep
    assert rep["cond2_winf"]["value"] == 0.0


def test_large_rho_breaks_sign_condition():
    M, supp, signs = _clean_rank1(30, 6, 10.0, 4)
    rho = 100.0 * 10.0 * (1.0 / np.sqrt(6)) / (8.0 * np.sqrt(2) * 6)
    tri = construct(M, supp, signs, rho)
    rep = check(tri, M, supp, signs, rho)
    assert not rep["cond1_sign_match"]["pass"]
    assert not rep["certified"]


def test_forced_offsupport_violation_is_reported():
    M, supp, signs = _clean_rank1(30, 6, 10.0, 4)
    rho = 0.03
    tri = construct(M, supp, signs, rho)
    w_bad = tri.w_hat.copy()
    w_bad[0] = 1.5
    rep = check(tri._replace(w_hat=w_bad), M, supp, signs, rho)
    assert rep["cond2_winf"]["value"] == 1.5
    assert not rep["cond2_winf"]["pass"]
    assert not rep["certified"]


def test_flat_block_fails_gap_condition():
    # M[J,J] = rho z z' + a I makes the penalized block a multiple of the
    # identity: zero spectral gap
    rho = 0.2
    z = np.array([1.0, 1.0])
    M = np.zeros((3, 3))
    M[:2, :2] = rho * np.outer(z, z) + 0.7 * np.eye(2)
    J = np.array([0, 1])
    tri = construct(M, J, z, rho)
    rep = check(tri, M, J, z, rho)
    assert rep["cond4_gap"]["value"] <= 1e-8
    assert not rep["cond4_gap"]["pass"]
    assert not rep["certified"]


def test_full_support_has_vacuous_offsupport_condition():
    rng = np.random.default_rng(9)
    u = rng.choice([-1.0, 1.0], 6) / np.sqrt(6)
    M = 10.0 * np.outer(u, u)
    M = 0.5 * (M + M.T)
    J = np.arange(6)
    tri = construct(M, J, np.sign(u), 0.5)
    assert tri.w_hat.size == 0
    rep = check(tri, M, J, np.sign(u), 0.5)
    assert rep["cond2_winf"]["value"] == 0.0
    assert rep["cond2_winf"]["pass"]
    assert rep["certified"], rep


def test_certificate_matrix_shape():
    M, supp, signs = _clean_rank1(20, 5, 10.0, 3)
    tri = construct(M, supp, signs, 0.05)
    Z, mu = full_certificate(tri, supp, 20)
    assert Z.shape == (20, 20)
    assert mu == tri.lambda_hat
    v = embed_vector(tri.z_hat, tri.w_hat, supp, 20)
    assert np.abs(Z - np.outer(v, v)).max() == 0.0
    P = witness_primal(tri, supp, 20)
    assert abs(np.trace(P) - 1.0) <= 1e-12
    off = np.setdiff1d(np.arange(20), supp)
    assert np.abs(P[off]).max() == 0.0


def test_certify_refuses_unconverged():
    rng = np.random.default_rng(2)
    M = random_sym(15, rng)
    sol = solve(M, SdpConfig()._replace(rho=0.2, max_iter=3))
    assert not sol.converged
    with pytest.raises(RefusesToCertify):
        certify_solution(M, np.arange(5), np.ones(5), 0.2, sol)


def test_certify_threshold_regression():
    # instance where all four analytic conditions hold but the witness
    # eigenvector has a squared entry below the support threshold, so the
    # extracted support misses an index; certification must refuse
    noise = synth.noise_spec(5.0, 0.1)
    ss = np.random.SeedSequence(7, spawn_key=(20, 5, 1))
    rng = np.random.default_rng(ss)
    gt = synth.generate_ground_truth(40, 5, 20.0, rng)
    obs = synth.sample_observation(gt, 0.5, noise, rng)
    sol = solve(obs.M, SdpConfig()._replace(rho=0.2))
    signs = np.sign(gt.eigenvectors[gt.support, 0])
    out = certify_solution(obs.M, gt.support, signs, 0.2, sol)
    assert out["report"]["certified"]
    assert not out["support_above_eta"]
    assert not out["certified"]
    assert not out["support_match"]
    tri = construct(obs.M, gt.support, signs, 0.2)
    assert (tri.x_hat ** 2).min() < 1e-3


def test_certified_implies_support_match():
    noise = synth.noise_spec(5.0, 0.1)
    cert = bad = 0
    for rho in (0.2, 0.3):
        for p in (0.7, 0.9):
            for seed in range(3):
                ss = np.random.SeedSequence(
                    7, spawn_key=(int(rho * 100), int(p * 10), seed))
                rng = np.random.default_rng(ss)
                gt = synth.generate_ground_truth(40, 5, 20.0, rng)
                obs = synth.sample_observation(gt, p, noise, rng)
                sol = solve(obs.M, SdpConfig()._replace(rho=rho))
                signs = np.sign(gt.eigenvectors[gt.support, 0])
                out = certify_solution(obs.M, gt.support, signs, rho, sol)
                assert "support_above_eta" in out
                if out["certified"]:
                    cert += 1
                    if not out["support_match"]:
                        bad += 1
                    assert out["frobenius_gap"] <= 1e-5
    assert cert >= 8
    assert bad == 0


def test_bad_inputs_rejected():
    M, supp, signs = _clean_rank1(20, 5, 10.0, 3)
    with pytest.raises(InvalidInput):
        construct(M, supp, signs, 0.0)
    with pytest.raises(InvalidInput):
        construct(M, np.array([1, 1, 2, 3, 4]), signs, 0.1)
    with pytest.raises(InvalidInput):
        construct(M, supp, signs[:3], 0.1)
    z0 = signs.copy()
    z0[0] = 0.0
    with pytest.raises(InvalidInput):
        construct(M, supp, z0, 0.1)


def test_write_report_round_trip(tmp_path):
    M, supp, signs = _clean_rank1(20, 5, 10.0, 3)
    tri = construct(M, supp, signs, 0.05)
    rep = check(tri, M, supp, signs, 0.05)
    path = tmp_path / "witness.json"
    write_report(path, rep)
    with open(path) as fh:
        loaded = json.load(fh)
    assert loaded["certified"] is True
    assert loaded["cond2_winf"]["value"] == rep["cond2_winf"]["value"]
