import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from azrenyi.channels import (
    QuantumMap,
    RangeError,
    Subalgebra,
    apply,
    choi_from_transfer,
    compose,
    depolarizing,
    dpi_gap,
    embedding,
    identity_channel,
    make_channel,
    petz_dual,
    petz_dual_p,
    pinching,
    predual,
    random_cptp,
    recover,
    refine_chain,
    restrict,
    sufficiency_test,
    transpose_composed,
    transpose_map,
    unitary_channel,
    unvec,
    vec,
)
from azrenyi.divergence import AlphaZ, q_alpha_z
from azrenyi.matcore import matrix_power, schatten_norm
from helpers import rand_herm, rand_state, rand_unitary
from oracles import choi_from_kraus, kraus_adjoint_apply, kraus_apply, petz_recovery_dense

seeds = st.integers(0, 2**32 - 1)
P, Q = np.diag([0.5, 0.5]), np.diag([0.25, 0.75])


def dpi_params(rng):
    if rng.random() < 0.5:
        a = rng.uniform(0.05, 0.95)
        return AlphaZ(a, rng.uniform(max(a, 1 - a), 3))
    a = rng.uniform(1.05, 3)
    return AlphaZ(a, rng.uniform(max(a / 2, a - 1), a))


def test_vec_is_column_major():
    a = np.arange(4.0).reshape(2, 2)
    assert np.array_equal(vec(a), [0, 2, 1, 3])
    assert np.array_equal(unvec(vec(a), 2), a)


# construction and flags


def test_kraus_and_transfer_agree(rng):
    gamma = random_cptp(2, 3, seed=1)
    b = rand_herm(2, rng)
    assert np.allclose(apply(gamma, b), kraus_apply(gamma.kraus, b), atol=1e-12)
    with pytest.raises(ValueError):
        QuantumMap(2, 3, gamma.transfer, tuple(k * 1.1 for k in gamma.kraus))


def test_rejects_hermiticity_breaking_transfer():
    t = np.eye(4, dtype=complex)
    t[0, 1] = 1j
    with pytest.raises(ValueError):
        QuantumMap(2, 2, t)
    with pytest.raises(ValueError):
        QuantumMap(2, 2, np.eye(3))


def test_apply_examples(rng):
    b = rand_herm(3, rng)
    assert np.allclose(apply(identity_channel(3), b), b)
    u = rand_unitary(3, rng)
    assert np.allclose(apply(unitary_channel(u), b), u.conj().T @ b @ u, atol=1e-12)
    off = b - np.diag(np.diag(b))
    assert np.allclose(apply(pinching([[0], [1], [2]]), off), 0, atol=1e-14)
    with pytest.raises(ValueError):
        apply(identity_channel(2), b)


def test_flags():
    assert identity_channel(2).completely_positive and identity_channel(2).unital
    dep = depolarizing(3, 0.4)
    assert dep.unital and dep.trace_preserving and dep.completely_positive
    emb = embedding(2, 3)
    assert emb.dim_in == 2 and emb.dim_out == 6 and emb.unital and not emb.trace_preserving
    t = transpose_map(2)
    assert t.positive and t.unital and not t.completely_positive and not t.two_positive
    tc = transpose_composed(random_cptp(2, 2, seed=4))
    assert tc.positive and tc.unital and not tc.completely_positive


@pytest.mark.parametrize("d_in,d_out", [(2, 2), (2, 3), (3, 2), (1, 3), (4, 4)])
def test_random_cptp_choi(d_in, d_out):
    gamma = random_cptp(d_in, d_out, seed=d_in * 10 + d_out)
    c = choi_from_transfer(gamma.transfer, gamma.dim_in, gamma.dim_out)
    assert np.allclose(c, choi_from_kraus(gamma.kraus, d_in), atol=1e-12)
    assert np.min(np.linalg.eigvalsh(c)) >= -1e-10
    assert np.allclose(apply(gamma, np.eye(d_in)), np.eye(d_out), atol=1e-10)
    assert gamma.dual.trace_preserving and gamma.completely_positive


def test_random_cptp_deterministic():
    assert np.array_equal(random_cptp(2, 3, seed=5).transfer, random_cptp(2, 3, seed=5).transfer)
    assert not np.array_equal(random_cptp(2, 3, seed=5).transfer, random_cptp(2, 3, seed=6).transfer)


def test_make_channel_examples(rng):
    assert np.allclose(make_channel({"kind": "depolarizing", "dim": 2, "t": 0}).transfer, np.eye(4))
    assert np.allclose(make_channel({"kind": "pinching", "blocks": [[0, 1, 2]]}).transfer, np.eye(9))
    u = rand_unitary(2, rng)
    assert np.allclose(make_channel({"kind": "unitary", "u": u}).transfer, unitary_channel(u).transfer)
    g = make_channel({"kind": "random_cptp", "dim_in": 2, "dim_out": 2, "seed": 3})
    assert g.completely_positive and g.unital
    k = make_channel({"kind": "kraus", "ops": [np.eye(2)]})
    assert np.allclose(k.transfer, np.eye(4))
    t = make_channel({"kind": "transfer", "dim_in": 2, "dim_out": 2, "matrix": np.eye(4)})
    assert t.completely_positive
    assert make_channel({"kind": "embedding", "dim": 2, "multiplicity": 2}).dim_out == 4
    for bad in ({"kind": "nope"}, {"dim": 2}, {"kind": "depolarizing", "dim": 2}, {"kind": "depolarizing", "dim": 2, "t": 2},
                {"kind": "pinching", "blocks": [[0], [0, 1]]}, {"kind": "unitary", "u": np.ones((2, 2))}):
        with pytest.raises(ValueError):
            make_channel(bad)


# predual


def test_predual_examples():
    assert np.allclose(predual(identity_channel(3)).transfer, np.eye(9))
    g = random_cptp(2, 3, seed=2)
    assert np.allclose(predual(predual(g)).transfer, g.transfer)
    assert predual(g).dim_in == 3 and predual(g).dim_out == 2


def test_predual_adjointness(rng):
    for i in range(20):
        g = random_cptp(2, 3, seed=i) if i % 2 else transpose_composed(random_cptp(3, 3, seed=i))
        b, h = rand_herm(g.dim_in, rng), rand_herm(g.dim_out, rng)
        lhs = np.trace(apply(g, b) @ h)
        rhs = np.trace(b @ apply(predual(g), h))
        assert abs(lhs - rhs) <= 1e-10
        if g.kraus is not None:
            assert np.allclose(apply(predual(g), h), kraus_adjoint_apply(g.kraus, h), atol=1e-12)


def test_unital_iff_predual_trace_preserving():
    for g in (random_cptp(2, 3, seed=0), embedding(2, 2), depolarizing(2, 0.3)):
        assert g.unital == g.dual.trace_preserving


def test_compose(rng):
    g1, g2 = random_cptp(2, 3, seed=1), random_cptp(3, 2, seed=2)
    b = rand_herm(2, rng)
    assert np.allclose(apply(compose(g2, g1), b), apply(g2, apply(g1, b)), atol=1e-12)
    with pytest.raises(ValueError):
        compose(g1, g1)


# Petz dual


def test_petz_dual_identity_and_unitary(rng):
    rho = rand_state(3, rng)
    assert np.allclose(petz_dual(identity_channel(3), rho).transfer, np.eye(9), atol=1e-10)
    u = rand_unitary(3, rng)
    pd = petz_dual(unitary_channel(u), rho)
    for i in range(3):
        for j in range(3):
            e = np.zeros((3, 3))
            e[i, j] = 1
            assert np.allclose(apply(pd, e), u @ e @ u.conj().T, atol=1e-10)


def test_petz_dual_matches_dense_oracle(rng):
    g = random_cptp(2, 3, seed=8)
    rho = rand_state(3, rng)
    h = rand_state(2, rng)
    assert np.allclose(recover(g, rho, h), petz_recovery_dense(g.kraus, rho, h), atol=1e-10)


@given(seeds, st.integers(1, 3), st.integers(2, 4))
def test_recovery_identity(seed, d_in, d_out):
    rng = np.random.default_rng(seed)
    g = random_cptp(d_in, d_out, seed=seed)
    rho = rand_state(d_out, rng, rank=int(rng.integers(1, d_out + 1)))
    sigma = apply(g.dual, rho)
    assert schatten_norm(recover(g, rho, sigma) - rho, 1) <= 1e-10 * np.real(np.trace(rho))


@given(seeds)
def test_petz_dual_unital_and_cp(seed):
    rng = np.random.default_rng(seed)
    g = random_cptp(2, 3, seed=seed)
    pd = petz_dual(g, rand_state(3, rng))
    assert np.allclose(apply(pd, np.eye(3)), np.eye(2), atol=1e-9)
    assert pd.completely_positive and pd.two_positive


def test_petz_dual_rank_deficient_reference_is_unital_on_support(rng):
    g = pinching([[0, 1], [2]])
    rho = np.zeros((3, 3), dtype=complex)
    rho[:2, :2] = rand_state(2, rng)
    pd = petz_dual(g, rho)
    s = np.diag([1.0, 1.0, 0.0])
    assert np.allclose(apply(pd, np.eye(3)), s, atol=1e-9)


def test_double_petz_dual(rng):
    g = random_cptp(2, 3, seed=12)
    rho = rand_state(3, rng)
    pd = petz_dual(g, rho)
    back = petz_dual(pd, apply(g.dual, rho))
    assert np.allclose(back.transfer, g.transfer, atol=1e-9)


def test_petz_dual_rejects_zero():
    with pytest.raises(ValueError):
        petz_dual(identity_channel(2), np.zeros((2, 2)))


def test_petz_dual_p_examples(rng):
    g = random_cptp(2, 3, seed=4)
    rho = rand_state(3, rng)
    sigma = apply(g.dual, rho)
    k = rand_herm(2, rng)
    assert np.allclose(petz_dual_p(g, rho, 1, k), apply(petz_dual(g, rho).dual, k), atol=1e-10)
    assert np.allclose(petz_dual_p(identity_channel(3), rho, 2.5, np.eye(3)), np.eye(3), atol=1e-10)
    p = 1.7
    b = rand_herm(2, rng)
    sp = matrix_power(sigma, 1 / (2 * p))
    rp = matrix_power(rho, 1 / (2 * p))
    assert np.allclose(petz_dual_p(g, rho, p, sp @ b @ sp), rp @ apply(g, b) @ rp, atol=1e-10)
    with pytest.raises(ValueError):
        petz_dual_p(g, rho, 0.5, k)


def test_petz_dual_p_support_check(rng):
    g = pinching([[0, 1], [2]])
    rho = np.diag([0.5, 0.5, 0.0])
    with pytest.raises(ValueError):
        petz_dual_p(g, rho, 2, np.eye(3))
    petz_dual_p(g, rho, 2, np.diag([1.0, 2.0, 0.0]))


@given(seeds, st.floats(1.0, 6.0))
def test_petz_dual_p_contraction(seed, p):
    rng = np.random.default_rng(seed)
    g = random_cptp(2, 3, seed=seed)
    rho = rand_state(3, rng)
    k = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert schatten_norm(petz_dual_p(g, rho, p, k), p) <= schatten_norm(k, p) + 1e-9


@given(seeds, st.floats(0.5, 4.0), st.booleans())
def test_norm_comparison_under_positive_maps(seed, p, cp):
    rng = np.random.default_rng(seed)
    g = random_cptp(2, 3, seed=seed)
    if not cp:
        g = transpose_composed(g)
    rho = rand_state(3, rng)
    b = rand_state(2, rng) * rng.uniform(0.1, 5)
    sig = matrix_power(apply(g.dual, rho), 1 / (2 * p))
    r = matrix_power(rho, 1 / (2 * p))
    lhs = schatten_norm(sig @ b @ sig, p)
    rhs = schatten_norm(r @ apply(g, b) @ r, p)
    if p < 1:
        assert lhs <= rhs + 1e-9
    else:
        assert lhs >= rhs - 1e-9


# DPI


def test_dpi_examples():
    par = AlphaZ(2, 1)
    res = dpi_gap(P, Q, identity_channel(2), par)
    assert res.gap == pytest.approx(0, abs=1e-14)
    res = dpi_gap(P, Q, depolarizing(2, 0.5), par)
    assert res.before == pytest.approx(math.log(4 / 3), rel=1e-12)
    assert res.after == pytest.approx(math.log(16 / 15), rel=1e-12)
    assert res.gap > 0 and not res.exploratory
    block = np.zeros((3, 3), dtype=complex)
    block[:2, :2] = [[0.3, 0.1], [0.1, 0.2]]
    block[2, 2] = 0.5
    other = np.diag([0.2, 0.3, 0.5]).astype(complex)
    assert dpi_gap(block, other, pinching([[0, 1], [2]]), par).gap == pytest.approx(0, abs=1e-12)
    assert dpi_gap(P, Q, identity_channel(2), AlphaZ(3, 1)).exploratory


def test_dpi_random(rng):
    for i in range(200):
        par = dpi_params(rng)
        d_in = int(rng.integers(1, 4))
        g = random_cptp(d_in, 3, seed=i)
        if i % 3 == 0 and d_in == 3:
            g = transpose_composed(g)
        psi, phi = rand_state(3, rng), rand_state(3, rng)
        res = dpi_gap(psi, phi, g, par)
        assert res.gap >= -1e-8


def test_dpi_through_embedding_partial_trace(rng):
    g = embedding(2, 2)
    psi, phi = rand_state(4, rng), rand_state(4, rng)
    assert dpi_gap(psi, phi, g, AlphaZ(0.5, 0.7)).gap >= -1e-10


@given(seeds, st.booleans())
def test_joint_concavity_convexity(seed, low):
    rng = np.random.default_rng(seed)
    par = dpi_params(rng)
    while (par.alpha < 1) != low:
        par = dpi_params(rng)
    p1, p2, f1, f2 = (rand_state(3, rng) for _ in range(4))
    mid = q_alpha_z((p1 + p2) / 2, (f1 + f2) / 2, par)
    avg = (q_alpha_z(p1, f1, par) + q_alpha_z(p2, f2, par)) / 2
    if low:
        assert mid >= avg - 1e-8
    else:
        assert mid <= avg + 1e-8


# sufficiency


def test_sufficiency_examples(rng):
    par = AlphaZ(0.5, 1)
    psi, phi = rand_state(2, rng), rand_state(2, rng)
    res = sufficiency_test(psi, phi, unitary_channel(rand_unitary(2, rng)), par)
    assert res.equality and res.recovered and res.residual <= 1e-10
    b1 = np.zeros((3, 3), dtype=complex)
    b1[:2, :2] = rand_state(2, rng) * 0.6
    b1[2, 2] = 0.4
    b2 = np.zeros((3, 3), dtype=complex)
    b2[:2, :2] = rand_state(2, rng) * 0.3
    b2[2, 2] = 0.7
    res = sufficiency_test(b1, b2, pinching([[0, 1], [2]]), par)
    assert res.equality and res.recovered
    res = sufficiency_test(psi, phi, depolarizing(2, 0.5), par)
    assert not res.equality and not res.recovered and res.residual > 1e-3


def test_sufficiency_range_errors(rng):
    psi, phi = rand_state(2, rng), rand_state(2, rng)
    with pytest.raises(RangeError):
        sufficiency_test(psi, phi, identity_channel(2), AlphaZ(2, 1))
    with pytest.raises(RangeError):
        sufficiency_test(psi, phi, identity_channel(2), AlphaZ(0.5, 0.5))
    with pytest.raises(ValueError):
        sufficiency_test(psi, phi, transpose_map(2), AlphaZ(0.5, 1))
    pure = np.diag([1.0, 0.0])
    with pytest.raises(RangeError):
        # alpha > 1 with s(psi) not in s(phi): D is infinite
        sufficiency_test(P, pure, identity_channel(2), AlphaZ(1.5, 1))


def test_sufficiency_equality_iff_recovery(rng):
    par_list = [AlphaZ(0.5, 1), AlphaZ(0.3, 0.8), AlphaZ(1.5, 1), AlphaZ(1.8, 1.2)]
    for i in range(30):
        par = par_list[i % 4]
        psi, phi = rand_state(3, rng), rand_state(3, rng)
        kind = i % 3
        if kind == 0:
            g = unitary_channel(rand_unitary(3, rng))
        elif kind == 1:
            # common second factor: the partial trace is reversible
            g = embedding(3, 2)
            sig = rand_state(2, rng)
            psi, phi = np.kron(psi, sig), np.kron(phi, sig)
        else:
            g = random_cptp(2, 3, seed=i)
        res = sufficiency_test(psi, phi, g, par)
        assert res.equality == res.recovered
        assert res.equality == (kind != 2)


# subalgebras


def test_subalgebra_validation():
    with pytest.raises(ValueError):
        Subalgebra()
    with pytest.raises(ValueError):
        Subalgebra(blocks=[[0], [0]])
    with pytest.raises(ValueError):
        Subalgebra.corner(np.diag([1.0, 0.5]))
    assert Subalgebra.corner(np.diag([1.0, 0.0])).kind == "corner"
    assert Subalgebra.block_diagonal([[0, 1]]).kind == "blocks"


def test_restrict_examples(rng):
    psi = rand_state(3, rng)
    assert np.allclose(restrict(psi, Subalgebra.corner(np.eye(3))), psi, atol=1e-12)
    assert np.allclose(restrict(psi, Subalgebra.block_diagonal([[0], [1], [2]])), np.diag(np.diag(psi)))
    v = rand_unitary(3, rng)[:, :2]
    proj = v @ v.conj().T
    assert np.trace(restrict(psi, Subalgebra.corner(proj))) == pytest.approx(np.trace(proj @ psi @ proj), abs=1e-12)


def test_pinching_bimodule(rng):
    blocks = [[0, 1], [2, 3]]
    e = pinching(blocks)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))

    def block_op():
        out = np.zeros((4, 4), dtype=complex)
        out[:2, :2] = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        out[2:, 2:] = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        return out

    a, b = block_op(), block_op()
    assert np.allclose(apply(e, a @ x @ b), a @ apply(e, x) @ b, atol=1e-10)


def test_refine_chain():
    chain = refine_chain([[0], [1], [2], [3], [4]])
    assert chain[0] == ((0,), (1,), (2,), (3,), (4,))
    assert chain[-1] == ((0, 1, 2, 3, 4),)
    assert len(chain) == 4


def test_corner_expectation_is_trace_preserving(rng):
    psi = rand_state(4, rng)
    e = np.diag([1.0, 1.0, 0.0, 0.0])
    out = Subalgebra.corner(e).expectation(psi)
    assert np.trace(out) == pytest.approx(np.trace(psi))
    assert np.allclose(out[:2, :2], psi[:2, :2])
